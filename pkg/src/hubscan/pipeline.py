"""End-to-end scan orchestration.

Walks a repository tree laid out like a hub mirror (owner/name), decides
which analyzer chain each artifact needs from its detected format, fuses
the per-analyzer results into one finding list, classifies the overall
behavior, and assembles a deterministic report.

Analyzers never execute artifact content; everything here is parsing and
matching over bytes.  Per-stage failures become ParserDegradation
findings instead of aborting the scan, so one corrupt file cannot hide
the rest of a repository.
"""

from __future__ import annotations

import ast
import enum
import hashlib
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import hubscan
from hubscan.formats import ArtifactFormat, FormatKind, VulnLevel, classify_vulnerability, identify_format
from hubscan.keras_tf import (
    DEFAULT_RISKY_OPS,
    KerasTfError,
    LayerConfig,
    check_unsafe_operators,
    detect_lambda,
    parse_h5_model_config,
    parse_keras_zip,
    scan_saved_model_full,
    synthesize_pyc,
)
from hubscan.pickle_scan import (
    LiftError,
    disassemble_full,
    extract_snippets,
    find_unsafe_opcodes,
    lift_full,
)
from hubscan.pickle_scan.disasm import DisassemblyError
from hubscan.rules.matcher import RuleMatch, match
from hubscan.rules.parser import Rule, parse_rules
from hubscan.scripts import (
    ApiEntry,
    PyAst,
    _degraded_scan,
    analyze_source,
    load_api_table,
)
from hubscan.taint import (
    TaintConfig,
    build_dataflow,
    detect_flows,
    load_taint_config,
    seed_and_propagate,
)
from hubscan.ziparchive import ArchiveError, extract_pickle_members

SCHEMA_VERSION = 1

# GraphDef op spellings of the risky I/O ops, added at the scanner layer
# so the analyzer default stays the canonical two-entry list
RISKY_OP_ALIASES = ("ReadFile", "WriteFile")


class Severity(enum.IntEnum):
    INFO = 0
    LOW = 1
    MEDIUM = 2
    HIGH = 3
    CRITICAL = 4

    @property
    def label(self) -> str:
        return self.name.capitalize()


SEVERITY_BY_NAME = {s.name.lower(): s for s in Severity}


@dataclass(frozen=True)
class ArtifactRef:
    repo_id: str
    repo_kind: str  # Model | Dataset
    rel_path: str
    format: ArtifactFormat


@dataclass
class Finding:
    kind: str
    severity: Severity
    path: str
    line: Optional[int] = None
    offset: Optional[int] = None
    api: Optional[str] = None
    rule: Optional[str] = None
    category: Optional[str] = None
    snippet: Optional[str] = None
    detail: str = ""

    def to_dict(self) -> Dict[str, object]:
        out: Dict[str, object] = {
            "kind": self.kind,
            "severity": self.severity.label,
            "path": self.path,
            "detail": self.detail,
        }
        for key in ("line", "offset", "api", "rule", "category", "snippet"):
            value = getattr(self, key)
            if value is not None:
                out[key] = value
        return out

    def sort_key(self) -> Tuple:
        position = self.offset if self.offset is not None else (self.line or 0)
        return (
            self.path,
            position,
            self.kind,
            self.api or "",
            self.rule or "",
            self.category or "",
            self.detail,
        )


@dataclass
class ScanConfig:
    rules: List[Rule]
    taint: TaintConfig
    table: List[ApiEntry]
    risky_ops: Tuple[str, ...]
    rule_pack_hash: str
    artifacts_dir: Optional[Path] = None


def _bundled_rules_dir() -> Path:
    return Path(str(resources.files("hubscan.data").joinpath("rules")))


def load_scan_config(
    rules_dir: Optional[Path] = None,
    taint_path: Optional[Path] = None,
    table_path: Optional[Path] = None,
    artifacts_dir: Optional[Path] = None,
) -> ScanConfig:
    directory = Path(rules_dir) if rules_dir is not None else _bundled_rules_dir()
    rules: List[Rule] = []
    digest = hashlib.sha256()
    for path in sorted(directory.glob("*.rules")):
        data = path.read_bytes()
        digest.update(path.name.encode("utf-8"))
        digest.update(data)
        rules.extend(parse_rules(data.decode("utf-8")))
    return ScanConfig(
        rules=rules,
        taint=load_taint_config(taint_path),
        table=load_api_table(table_path),
        risky_ops=DEFAULT_RISKY_OPS + RISKY_OP_ALIASES,
        rule_pack_hash=digest.hexdigest(),
        artifacts_dir=Path(artifacts_dir) if artifacts_dir is not None else None,
    )


# ---------------------------------------------------------------------------
# severity policy
# ---------------------------------------------------------------------------

_API_CATEGORY_SEVERITY = {
    "BuiltinFunctions": Severity.MEDIUM,
    "CommandExecution": Severity.MEDIUM,
    "Network": Severity.MEDIUM,
    "FileSystem": Severity.INFO,
    "SystemInformation": Severity.INFO,
    "Cryptography": Severity.LOW,
    "YamlLoad": Severity.MEDIUM,
}
# ubiquitous in legitimate loaders; reported but only as Info
_INFO_APIS = frozenset(["getattr", "open"])


def _api_severity(category: str, api: str) -> Severity:
    if api.split(".")[-1] in _INFO_APIS and category == "BuiltinFunctions":
        return Severity.INFO
    return _API_CATEGORY_SEVERITY.get(category, Severity.LOW)


def _snippet_severity(callee: str) -> Severity:
    short = callee.split(".")[-1]
    if short == "getattr":
        return Severity.INFO
    if callee == "operator.attrgetter":
        return Severity.LOW
    return Severity.HIGH


def _rule_severity(meta: Dict[str, object]) -> Severity:
    return SEVERITY_BY_NAME.get(str(meta.get("severity", "medium")).lower(), Severity.MEDIUM)


def _pd(path: str, detail: str) -> Finding:
    return Finding("ParserDegradation", Severity.INFO, path, detail=detail)


# ---------------------------------------------------------------------------
# per-format analyzer chains
# ---------------------------------------------------------------------------


def _raw_rule_matches(data: bytes, config: ScanConfig, target: str = "") -> List[RuleMatch]:
    hits = []
    for rule in config.rules:
        result = match(rule, data, target)
        if result is not None:
            hits.append(result)
    return hits


def _rule_findings(path: str, matches: Sequence[RuleMatch], origin: str = "") -> List[Finding]:
    findings = []
    for m in matches:
        offsets = sorted(off for hits in m.matched for off in hits.offsets)
        detail = str(m.meta.get("description", ""))
        if origin:
            detail = f"{detail} ({origin})" if detail else origin
        findings.append(
            Finding(
                "RuleMatch",
                _rule_severity(m.meta),
                path,
                offset=offsets[0] if offsets else None,
                rule=m.rule_name,
                category=m.meta.get("taint_source_category"),
                detail=detail,
            )
        )
    return findings


def _scan_script_text(
    path: str, text: str, config: ScanConfig, origin: str = ""
) -> List[Finding]:
    """Script-analyzer + rule-engine + taint-engine over one piece of source."""
    findings: List[Finding] = []
    suffix = f" ({origin})" if origin else ""
    tree, imports, api_findings = analyze_source(text, config.table)
    for f in api_findings:
        detail = f"call to {f.api}{suffix}"
        if f.degraded:
            detail += " [regex fallback]"
        findings.append(
            Finding(
                "UnsafeApi",
                _api_severity(f.category, f.api),
                path,
                line=f.line,
                api=f.api,
                category=f.category,
                snippet=f.call_snippet or None,
                detail=detail,
            )
        )
    if tree.degraded:
        findings.append(_pd(path, f"script parse failed{suffix}: {tree.degraded_reason}"))
    pattern_hits = _raw_rule_matches(text.encode("utf-8"), config, target=path)
    findings.extend(_rule_findings(path, pattern_hits, origin))
    if tree.root is not None:
        graph = build_dataflow(tree, imports, config.table)
        tainted = seed_and_propagate(graph, config.taint, pattern_hits)
        for flow in detect_flows(graph, tainted, config.taint):
            findings.append(
                Finding(
                    "TaintFlow",
                    Severity.HIGH,
                    path,
                    line=flow.source.line,
                    api=flow.source.api,
                    category=flow.category,
                    detail=(
                        f"{flow.category}: {flow.source.api} (line {flow.source.line}) -> "
                        f"{flow.sink.api} (line {flow.sink.line}), "
                        f"confidence {flow.confidence}{suffix}"
                    ),
                )
            )
    return findings


def _looks_like_code(text: str) -> bool:
    try:
        tree = ast.parse(text)
    except (SyntaxError, ValueError):
        return False
    return any(
        isinstance(node, (ast.Call, ast.Import, ast.ImportFrom)) for node in ast.walk(tree)
    )


def _scan_pickle_bytes(path: str, data: bytes, config: ScanConfig) -> List[Finding]:
    findings: List[Finding] = []
    try:
        dis = disassemble_full(data)
    except DisassemblyError as exc:
        offset = getattr(exc, "offset", None)
        findings.append(_pd(path, f"pickle disassembly failed at offset {offset}: {exc}"))
        return findings
    for ins, opcode in find_unsafe_opcodes(dis.instructions):
        findings.append(
            Finding(
                "UnsafeOpcode",
                Severity.LOW,
                path,
                offset=ins.offset,
                api=opcode,
                detail=f"{opcode} opcode (can invoke importable callables)",
            )
        )
    if dis.trailing:
        findings.append(_pd(path, f"{len(dis.trailing)} trailing byte(s) after STOP"))
    try:
        lifted = lift_full(dis.instructions)
    except LiftError as exc:
        findings.append(
            _pd(path, f"pickle lift failed at offset {getattr(exc, 'offset', None)}: {exc}")
        )
        return findings
    for warning in lifted.warnings:
        findings.append(_pd(path, f"pickle lift: {warning}"))
    for sn in extract_snippets(lifted):
        preview = "; ".join(sn.arg_strings)[:200] or None
        findings.append(
            Finding(
                "SuspiciousSnippet",
                _snippet_severity(sn.callee),
                path,
                offset=sn.source_offset,
                api=sn.callee,
                snippet=preview,
                detail=f"{sn.callee} invoked from pickle with {sn.arg_count} arg(s)",
            )
        )
        for arg in sn.arg_strings:
            if _looks_like_code(arg):
                findings.extend(
                    _scan_script_text(
                        path, arg, config, origin=f"code inside pickle snippet @{sn.source_offset}"
                    )
                )
            else:
                snippet_hits = _raw_rule_matches(arg.encode("utf-8"), config, target=path)
                findings.extend(
                    _rule_findings(path, snippet_hits, f"pickle snippet @{sn.source_offset}")
                )
    return findings


def _keras_layer_findings(
    path: str,
    layers: Sequence[LayerConfig],
    raw_strings: Sequence[str],
    config: ScanConfig,
) -> List[Finding]:
    findings: List[Finding] = []
    lam = detect_lambda(layers)
    for index, payload in enumerate(lam.payloads):
        severity = Severity.MEDIUM
        joined = "\n".join(payload.embedded_strings)
        extra: List[Finding] = []
        if joined:
            hits = _raw_rule_matches(joined.encode("utf-8"), config, target=path)
            origin = f"strings in Lambda '{payload.layer_name}' bytecode"
            extra.extend(_rule_findings(path, hits, origin))
            degraded = _degraded_scan(PyAst(None, joined, degraded=True), config.table)
            for f in degraded:
                extra.append(
                    Finding(
                        "UnsafeApi",
                        _api_severity(f.category, f.api),
                        path,
                        api=f.api,
                        category=f.category,
                        snippet=f.call_snippet or None,
                        detail=f"{f.api} named in {origin}",
                    )
                )
            if extra:
                severity = Severity.HIGH
        if payload.error:
            detail = f"opaque Lambda payload in layer '{payload.layer_name}': {payload.error}"
        else:
            detail = (
                f"Lambda layer '{payload.layer_name}' carries serialized bytecode "
                f"({payload.form}, {len(payload.embedded_strings)} embedded string(s))"
            )
        findings.append(
            Finding(
                "LambdaLayer",
                severity,
                path,
                snippet="; ".join(payload.embedded_strings)[:200] or None,
                detail=detail,
            )
        )
        findings.extend(extra)
        if config.artifacts_dir is not None and payload.bytecode:
            out_dir = Path(config.artifacts_dir)
            out_dir.mkdir(parents=True, exist_ok=True)
            stem = Path(path.replace("::", "_")).name
            out_file = out_dir / f"{stem}.lambda{index}.pyc"
            out_file.write_bytes(synthesize_pyc(payload.bytecode))
            findings.append(
                _pd(path, f"Lambda bytecode written to {out_file.name} for offline review")
            )
    ops = check_unsafe_operators(layers, raw_strings, config.risky_ops)
    for op in ops.ops:
        findings.append(
            Finding(
                "UnsafeOperator",
                Severity.MEDIUM,
                path,
                api=op,
                detail=f"graph operator {op} reads or writes files at load time",
            )
        )
    return findings


def _scan_keras_model(path: str, data: bytes, config: ScanConfig, zipped: bool) -> List[Finding]:
    stage = "keras archive config" if zipped else "hdf5 model config"
    try:
        layers = parse_keras_zip(data) if zipped else parse_h5_model_config(data)
    except KerasTfError as exc:
        return [_pd(path, f"{stage}: {exc}")]
    return _keras_layer_findings(path, layers, (), config)


def _scan_saved_model(path: str, data: bytes, config: ScanConfig) -> List[Finding]:
    findings: List[Finding] = []
    scan = scan_saved_model_full(data)
    if scan.degraded:
        findings.append(_pd(path, f"metadata wire parse degraded: {scan.degraded_reason}"))
    findings.extend(_keras_layer_findings(path, scan.layers, scan.strings, config))
    return findings


_PICKLE_FAMILY = frozenset(
    [FormatKind.PICKLE_RAW, FormatKind.JOBLIB, FormatKind.DILL, FormatKind.CLOUDPICKLE]
)


def scan_artifact(ref: ArtifactRef, data: bytes, config: ScanConfig) -> List[Finding]:
    """Dispatch one artifact through the analyzer chain its format needs."""
    kind = ref.format.kind
    path = ref.rel_path
    findings: List[Finding] = []

    if kind in _PICKLE_FAMILY:
        findings.extend(_scan_pickle_bytes(path, data, config))
        findings.extend(_rule_findings(path, _raw_rule_matches(data, config, path)))
    elif kind == FormatKind.PYTORCH_ZIP:
        try:
            entries = extract_pickle_members(data)
        except ArchiveError as exc:
            findings.append(_pd(path, f"archive extraction: {exc}"))
            entries = []
        for entry in entries:
            member_path = f"{path}::{entry.path}"
            findings.extend(_scan_pickle_bytes(member_path, entry.data, config))
            findings.extend(
                _rule_findings(member_path, _raw_rule_matches(entry.data, config, member_path))
            )
        findings.extend(_rule_findings(path, _raw_rule_matches(data, config, path)))
    elif kind in (FormatKind.HDF5_KERAS, FormatKind.KERAS_ZIP):
        findings.extend(_scan_keras_model(path, data, config, kind == FormatKind.KERAS_ZIP))
        findings.extend(_rule_findings(path, _raw_rule_matches(data, config, path)))
    elif kind == FormatKind.SAVED_MODEL:
        findings.extend(_scan_saved_model(path, data, config))
        findings.extend(_rule_findings(path, _raw_rule_matches(data, config, path)))
    elif kind == FormatKind.PYTHON_SCRIPT:
        findings.extend(_scan_script_text(path, data.decode("utf-8", "replace"), config))
    else:
        # Safe or unparsed formats still get the byte-pattern pass
        findings.extend(_rule_findings(path, _raw_rule_matches(data, config, path)))
    return findings


# ---------------------------------------------------------------------------
# repository walking
# ---------------------------------------------------------------------------

_META_FILES = frozenset([".gitattributes", "readme.md", "readme", "readme.txt", "readme.rst"])


@dataclass
class WalkResult:
    artifacts: List[ArtifactRef]
    empty: bool
    notes: List[str] = field(default_factory=list)


def _repo_id(root: Path) -> str:
    resolved = root.resolve()
    parent = resolved.parent.name
    return f"{parent}/{resolved.name}" if parent else resolved.name


def walk_repo_full(root: Path) -> WalkResult:
    root = Path(root)
    if not root.is_dir():
        raise NotADirectoryError(str(root))
    files = sorted(
        p for p in root.rglob("*") if p.is_file() and ".git" not in p.relative_to(root).parts
    )
    content = [p for p in files if p.name.lower() not in _META_FILES]
    if not content:
        return WalkResult([], True, ["empty repo: metadata files only"])

    notes: List[str] = []
    classified: List[Tuple[Path, ArtifactFormat]] = []
    for path in content:
        try:
            with open(path, "rb") as fh:
                head = fh.read(512)
        except OSError as exc:
            notes.append(f"{path.relative_to(root).as_posix()}: unreadable ({exc})")
            continue
        classified.append((path, identify_format(path.name, head)))

    model_like = [
        (p, fmt)
        for p, fmt in classified
        if fmt.kind not in (FormatKind.UNKNOWN, FormatKind.PYTHON_SCRIPT)
    ]
    scripts = [
        (p, fmt)
        for p, fmt in classified
        if fmt.kind == FormatKind.PYTHON_SCRIPT and p.parent == root
    ]
    vulnerable_models = [
        (p, fmt)
        for p, fmt in model_like
        if classify_vulnerability(fmt) in (VulnLevel.VULNERABLE, VulnLevel.PARTIAL)
    ]
    repo_kind = "Dataset" if scripts and not vulnerable_models else "Model"
    repo = _repo_id(root)

    artifacts = []
    for path, fmt in model_like + scripts:
        rel = path.relative_to(root).as_posix()
        artifacts.append(ArtifactRef(repo, repo_kind, rel, fmt))
        if classify_vulnerability(fmt) == VulnLevel.SAFE:
            notes.append(f"{rel}: safe format {fmt.kind.value}, code analyzers skipped")
    primary = f"{root.resolve().name}.py"
    for path, _fmt in scripts:
        if path.name == primary:
            notes.append(f"{primary}: primary loading script (named after the repo)")
    artifacts.sort(key=lambda a: a.rel_path)
    return WalkResult(artifacts, False, notes)


def walk_repo(root: Path) -> List[ArtifactRef]:
    return walk_repo_full(root).artifacts


# ---------------------------------------------------------------------------
# behavior classification and reporting
# ---------------------------------------------------------------------------

_SYSINFO_MARKERS = ("uname", "whoami", "ifconfig", "ipconfig", "ps -", "systeminfo")
_POC_MARKERS = (
    "pwned",
    "proof of concept",
    "proof-of-concept",
    "hacked by",
    "you have been hacked",
    "pickle can run code",
)
_EXEC_APIS = frozenset(["exec", "eval", "compile", "__import__"])
_FETCH_APIS = frozenset(
    ["requests.get", "requests.post", "urllib.request.urlopen", "urllib.request.Request"]
)


def classify_behavior(findings: Sequence[Finding]) -> str:
    """Priority-ordered label from the fused finding set; pure function."""
    rule_names = {f.rule for f in findings if f.kind == "RuleMatch"}
    flows = [f for f in findings if f.kind == "TaintFlow"]
    flow_categories = {f.category for f in flows}
    text_pool = " ".join(
        filter(None, (f.snippet for f in findings if f.kind in ("SuspiciousSnippet", "UnsafeApi")))
    ).lower()

    if "reverse_shell" in rule_names or "RemoteControl" in flow_categories:
        return "RemoteControl"
    if "chrome_credentials" in rule_names:
        return "CredentialTheft"
    leaks = [f for f in flows if f.category == "SensitiveInfoLeak"]
    if leaks:
        for leak in leaks:
            api = leak.api or ""
            if api.startswith("platform.") or api == "os.getlogin":
                return "SystemReconnaissance"
            if api == "subprocess.check_output" and any(
                marker in text_pool for marker in _SYSINFO_MARKERS
            ):
                return "SystemReconnaissance"
        return "SensitiveInfoTheft"
    apis = {f.api for f in findings if f.kind in ("UnsafeApi", "SuspiciousSnippet") and f.api}
    short_apis = {a.split(".")[-1] for a in apis}
    if "Backdoor" in flow_categories or (
        apis & _FETCH_APIS and (short_apis & _EXEC_APIS)
    ):
        return "Downloader"
    if findings and not flows and any(marker in text_pool for marker in _POC_MARKERS):
        return "ProofOfConcept"
    return "Unclassified"


def compute_verdict(findings: Sequence[Finding]) -> str:
    if not findings:
        return "Clean"
    top = max(f.severity for f in findings)
    if top >= Severity.HIGH:
        return "Malicious"
    if top in (Severity.LOW, Severity.MEDIUM):
        return "Suspicious"
    return "Clean"


@dataclass
class ScanReport:
    repo_id: str
    scanned_files: int
    findings: List[Finding]
    behavior: str
    verdict: str
    tool_version: str
    rule_pack_hash: str
    duration_ms: int

    def to_dict(self) -> Dict[str, object]:
        return {
            "schema_version": SCHEMA_VERSION,
            "repo_id": self.repo_id,
            "verdict": self.verdict,
            "behavior": self.behavior,
            "scanned_files": self.scanned_files,
            "findings": [f.to_dict() for f in self.findings],
            "tool_version": self.tool_version,
            "rule_pack_hash": self.rule_pack_hash,
            "duration_ms": self.duration_ms,
        }


def aggregate_report(
    repo_id: str,
    findings: Sequence[Finding],
    scanned_files: int,
    rule_pack_hash: str,
    duration_ms: int = 0,
) -> ScanReport:
    unique: List[Finding] = []
    seen = set()
    for f in findings:
        key = (f.kind, f.path, f.line, f.offset, f.api, f.rule, f.category, f.snippet, f.detail)
        if key in seen:
            continue
        seen.add(key)
        unique.append(f)
    unique.sort(key=lambda f: f.sort_key())
    return ScanReport(
        repo_id=repo_id,
        scanned_files=scanned_files,
        findings=unique,
        behavior=classify_behavior(unique),
        verdict=compute_verdict(unique),
        tool_version=hubscan.__version__,
        rule_pack_hash=rule_pack_hash,
        duration_ms=duration_ms,
    )


def scan_repo(
    root: Path,
    config: Optional[ScanConfig] = None,
    jobs: int = 1,
    deterministic: bool = False,
) -> ScanReport:
    """Scan one repository directory and aggregate everything it contains."""
    if config is None:
        config = load_scan_config()
    started = time.monotonic()
    root = Path(root)
    walk = walk_repo_full(root)

    def work(ref: ArtifactRef) -> List[Finding]:
        try:
            data = (root / ref.rel_path).read_bytes()
        except OSError as exc:
            return [_pd(ref.rel_path, f"read failed: {exc}")]
        try:
            return scan_artifact(ref, data, config)
        except Exception as exc:  # per-stage guard: degrade, never crash the repo
            return [_pd(ref.rel_path, f"analyzer error: {type(exc).__name__}: {exc}")]

    if jobs <= 1 or len(walk.artifacts) <= 1:
        batches = [work(ref) for ref in walk.artifacts]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            batches = list(pool.map(work, walk.artifacts))
    findings = [f for batch in batches for f in batch]
    duration = 0 if deterministic else int((time.monotonic() - started) * 1000)
    return aggregate_report(
        _repo_id(root), findings, len(walk.artifacts), config.rule_pack_hash, duration
    )


def report_to_json(reports: Sequence[ScanReport]) -> str:
    payload = reports[0].to_dict() if len(reports) == 1 else [r.to_dict() for r in reports]
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def report_to_text(report: ScanReport) -> str:
    lines = [
        f"repo:     {report.repo_id}",
        f"verdict:  {report.verdict}    behavior: {report.behavior}",
        f"scanned:  {report.scanned_files} file(s), {len(report.findings)} finding(s)"
        + ("" if report.scanned_files else "  (empty or metadata-only repo)"),
    ]
    for f in report.findings:
        location = f.path
        if f.offset is not None:
            location += f"@{f.offset}"
        elif f.line is not None:
            location += f":{f.line}"
        subject = f.api or f.rule or ""
        parts = [p for p in (subject, f.detail) if p]
        lines.append(f"  [{f.severity.label:<8}] {f.kind:<18} {location}  {' - '.join(parts)}")
    return "\n".join(lines) + "\n"
