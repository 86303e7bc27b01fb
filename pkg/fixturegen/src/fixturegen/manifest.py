"""Corpus manifest: one entry per generated file, labels as ground truth.

Fixtures are scannable artifacts living one-per-repo-directory; aux files
(disassembly oracles, the manifest itself, the verification stamp) are
listed separately so the on-disk tree and the manifest stay a bijection.
"""

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List

LABELS = ("Malicious", "Benign", "PoC")

MANIFEST_NAME = "manifest.json"
STAMP_NAME = "oracle_ok"


@dataclass
class FixtureEntry:
    path: str  # relative to the corpus root, first segment is the repo dir
    repo_kind: str  # Model | Dataset
    label: str
    expected_findings: List[str] = field(default_factory=list)
    expected_flows: List[Dict[str, str]] = field(default_factory=list)
    expected_behavior: str = "Unclassified"
    expected_verdict: str = "Clean"
    # payload shape for the guarded loader; empty for payload-free files
    payload_api: str = ""
    payload_arg: str = ""
    notes: str = ""


@dataclass
class AuxFile:
    path: str
    role: str  # disasm-oracle | manifest | stamp
    fixture: str = ""  # the fixture this file belongs to, if any


@dataclass
class FixtureManifest:
    seed: int
    generator: Dict[str, str] = field(default_factory=dict)
    fixtures: List[FixtureEntry] = field(default_factory=list)
    aux_files: List[AuxFile] = field(default_factory=list)

    def merge(self, fragment: "FixtureManifest") -> None:
        self.fixtures.extend(fragment.fixtures)
        self.aux_files.extend(fragment.aux_files)

    def to_json(self) -> str:
        doc = {
            "seed": self.seed,
            "generator": self.generator,
            "fixtures": [asdict(f) for f in sorted(self.fixtures, key=lambda f: f.path)],
            "aux_files": [asdict(a) for a in sorted(self.aux_files, key=lambda a: a.path)],
        }
        return json.dumps(doc, indent=1, sort_keys=True) + "\n"

    def write(self, root: Path) -> None:
        (Path(root) / MANIFEST_NAME).write_text(self.to_json())


def load_manifest(root: Path) -> FixtureManifest:
    doc = json.loads((Path(root) / MANIFEST_NAME).read_text())
    return FixtureManifest(
        seed=doc["seed"],
        generator=doc["generator"],
        fixtures=[FixtureEntry(**f) for f in doc["fixtures"]],
        aux_files=[AuxFile(**a) for a in doc["aux_files"]],
    )


def check_complete(root: Path, manifest: FixtureManifest) -> List[str]:
    """Bijection check: every file on disk maps to exactly one entry."""
    root = Path(root)
    on_disk = {p.relative_to(root).as_posix() for p in root.rglob("*") if p.is_file()}
    listed: List[str] = [f.path for f in manifest.fixtures] + [a.path for a in manifest.aux_files]
    problems = []
    seen = set()
    for path in listed:
        if path in seen:
            problems.append(f"duplicate manifest entry: {path}")
        seen.add(path)
    for path in sorted(on_disk - seen):
        problems.append(f"file not in manifest: {path}")
    for path in sorted(seen - on_disk):
        problems.append(f"manifest entry missing on disk: {path}")
    for fx in manifest.fixtures:
        if fx.label not in LABELS:
            problems.append(f"{fx.path}: unknown label {fx.label}")
    return problems
