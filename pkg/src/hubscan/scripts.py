"""Static analysis of dataset loading scripts.

Parses Python source, resolves import aliases to canonical dotted paths,
and reports every call site whose resolved receiver matches the unsafe
API table.  No suppression happens here: ubiquitous-but-listed APIs
(os.path.join, open) are still reported and the pipeline assigns them a
low severity; actual intent filtering is the taint engine's job.

When the source does not parse, the analyzer degrades to a regex scan
over the raw text so that deliberately broken scripts cannot dodge the
table entirely; degraded findings carry a flag saying so.
"""

from __future__ import annotations

import ast
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

_BUILTIN_NAMES = frozenset(
    ["eval", "exec", "execfile", "__import__", "getattr", "compile", "open"]
)


@dataclass
class PyAst:
    root: Optional[ast.AST]
    source: str
    degraded: bool = False
    degraded_reason: Optional[str] = None


@dataclass
class ImportMap:
    aliases: Dict[str, str] = field(default_factory=dict)
    star_imports: List[str] = field(default_factory=list)


@dataclass
class UnsafeApiFinding:
    api: str  # canonical dotted path, never the local alias
    category: str
    line: int
    column: int
    call_snippet: str
    degraded: bool = False


@dataclass(frozen=True)
class ApiEntry:
    category: str
    path: str  # trailing * already stripped
    wildcard: bool


def load_api_table(path: Optional[Path] = None) -> List[ApiEntry]:
    """Load the category<TAB>dotted.path[*] table; default is the bundled one."""
    if path is None:
        text = resources.files("hubscan.data").joinpath("unsafe_apis.tsv").read_text()
    else:
        text = Path(path).read_text()
    entries = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "\t" not in line:
            raise ValueError(f"unsafe-API table line {lineno}: missing tab separator")
        category, _, pattern = line.partition("\t")
        pattern = pattern.strip()
        wildcard = pattern.endswith("*")
        entries.append(ApiEntry(category.strip(), pattern.rstrip("*"), wildcard))
    return entries


def parse_python(source: str) -> PyAst:
    """Parse source; on syntax errors fall back to degraded (regex-only) mode."""
    try:
        return PyAst(ast.parse(source), source)
    except SyntaxError as exc:
        return PyAst(None, source, degraded=True, degraded_reason=str(exc))


def collect_imports(tree: PyAst) -> ImportMap:
    imports = ImportMap()
    if tree.root is None:
        return imports
    for node in ast.walk(tree.root):
        if isinstance(node, ast.Import):
            for alias in node.names:
                if alias.asname:
                    imports.aliases[alias.asname] = alias.name
                else:
                    # `import os.path` binds the top-level package name
                    top = alias.name.split(".")[0]
                    imports.aliases[top] = top
        elif isinstance(node, ast.ImportFrom):
            if node.level:
                continue  # repo-relative imports are out of scope
            module = node.module or ""
            for alias in node.names:
                if alias.name == "*":
                    imports.star_imports.append(module)
                else:
                    bound = alias.asname or alias.name
                    imports.aliases[bound] = f"{module}.{alias.name}" if module else alias.name
    return imports


def _resolve_chain(node: ast.AST) -> Optional[List[str]]:
    """Attribute chain to name parts; None when the receiver is dynamic."""
    parts: List[str] = []
    while isinstance(node, ast.Attribute):
        parts.append(node.attr)
        node = node.value
    if isinstance(node, ast.Name):
        parts.append(node.id)
        return parts[::-1]
    return None


class _Resolver:
    """Canonicalizes call receivers through imports and simple var origins."""

    def __init__(self, imports: ImportMap, entries: Sequence[ApiEntry]):
        self.imports = imports
        self.entries = entries
        self.var_origin: Dict[str, str] = {}
        # bare names importable from a star-imported module, per the table
        self.star_members: Dict[str, str] = {}
        for module in imports.star_imports:
            prefix = module + "."
            for entry in entries:
                if entry.path.startswith(prefix):
                    member = entry.path[len(prefix) :].split(".")[0]
                    self.star_members[member] = f"{module}.{member}"

    def canonical_paths(self, node: ast.AST) -> List[str]:
        parts = _resolve_chain(node)
        if parts is None:
            return []
        head, rest = parts[0], parts[1:]
        candidates: List[str] = []
        if head in self.imports.aliases:
            candidates.append(".".join([self.imports.aliases[head]] + rest))
        elif head in self.var_origin:
            origin = self.var_origin[head]
            # s = socket.socket(); s.connect(...) has a module-scoped
            # spelling (socket.connect, preferred) and a class-scoped one
            top = origin.split(".")[0]
            if rest:
                candidates.append(".".join([top] + rest))
            class_scoped = ".".join([origin] + rest)
            if class_scoped not in candidates:
                candidates.append(class_scoped)
        elif not rest and head in self.star_members:
            candidates.append(self.star_members[head])
        else:
            candidates.append(".".join(parts))
        return candidates

    def note_assignment(self, node: ast.Assign) -> None:
        if len(node.targets) != 1 or not isinstance(node.targets[0], ast.Name):
            return
        value = node.value
        source: Optional[ast.AST] = None
        if isinstance(value, ast.Call):
            source = value.func
        elif isinstance(value, (ast.Name, ast.Attribute)):
            source = value
        if source is None:
            return
        paths = self.canonical_paths(source)
        if paths:
            self.var_origin[node.targets[0].id] = paths[0]


def _match_entry(path: str, entry: ApiEntry) -> bool:
    if entry.wildcard:
        return path.startswith(entry.path)
    return path == entry.path or path.startswith(entry.path + ".")


def _normalize(path: str) -> str:
    # explicit builtins.eval(...) is the same API as bare eval(...)
    if path.startswith("builtins."):
        return path[len("builtins.") :]
    return path


def _snippet(source: str, node: ast.AST) -> str:
    segment = ast.get_source_segment(source, node)
    if segment is None:
        segment = ""
    segment = " ".join(segment.split())
    return segment[:200]


def find_unsafe_api_calls(
    tree: PyAst,
    imports: ImportMap,
    table: Sequence[ApiEntry],
) -> List[UnsafeApiFinding]:
    """Report every call whose canonical receiver path is in the table."""
    if tree.root is None:
        return _degraded_scan(tree, table)

    resolver = _Resolver(imports, table)
    findings: List[UnsafeApiFinding] = []
    for node in ast.walk(tree.root):
        if isinstance(node, ast.Assign):
            resolver.note_assignment(node)
            continue
        if not isinstance(node, ast.Call):
            continue
        paths = [_normalize(p) for p in resolver.canonical_paths(node.func)]
        for path in paths:
            hits = [entry for entry in table if _match_entry(path, entry)]
            for entry in hits:
                findings.append(
                    UnsafeApiFinding(
                        # wildcard rows report the concrete function hit
                        api=path if entry.wildcard else entry.path,
                        category=entry.category,
                        line=node.lineno,
                        column=node.col_offset,
                        call_snippet=_snippet(tree.source, node),
                    )
                )
            if hits:
                break  # first interpretation that matches wins
    findings.sort(key=lambda f: (f.line, f.column, f.api))
    return findings


def _degraded_scan(tree: PyAst, table: Sequence[ApiEntry]) -> List[UnsafeApiFinding]:
    """Regex fallback for unparseable source: literal dotted-path search."""
    findings = []
    for entry in table:
        if "." not in entry.path:
            # bare builtins produce too much noise without an AST
            pattern = re.compile(rf"(?<![\w.]){re.escape(entry.path)}\s*\(")
        else:
            pattern = re.compile(rf"(?<![\w.]){re.escape(entry.path)}(?![\w])")
        for m in pattern.finditer(tree.source):
            line = tree.source.count("\n", 0, m.start()) + 1
            col = m.start() - (tree.source.rfind("\n", 0, m.start()) + 1)
            line_text = tree.source.splitlines()[line - 1] if tree.source else ""
            findings.append(
                UnsafeApiFinding(
                    api=entry.path + ("*" if entry.wildcard else ""),
                    category=entry.category,
                    line=line,
                    column=col,
                    call_snippet=" ".join(line_text.split())[:200],
                    degraded=True,
                )
            )
    findings.sort(key=lambda f: (f.line, f.column, f.api))
    return findings


def analyze_source(
    source: str, table: Optional[Sequence[ApiEntry]] = None
) -> Tuple[PyAst, ImportMap, List[UnsafeApiFinding]]:
    """One-call convenience: parse, collect imports, match the table."""
    if table is None:
        table = load_api_table()
    tree = parse_python(source)
    imports = collect_imports(tree)
    return tree, imports, find_unsafe_api_calls(tree, imports, table)
