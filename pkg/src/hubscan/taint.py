"""Source-to-sink taint tracking over loading-script ASTs.

The def-use graph is flow-sensitive within each function: assignments
create fresh variable versions, branches fork the environment and merge
through join nodes, and loops run their body twice so taint can travel
around the back edge.  Calls to functions defined in the same file get
one level of parameter/return wiring; taint that has already crossed a
call edge will not cross another, which keeps the analysis predictable.

Sources are configured per threat category: either API paths (call
results and attribute reads like os.environ) or pattern:<rule> entries
seeding string literals that a rule matched.  A flow is reported when a
tainted value enters a sink call through an argument edge; the witness
path replays as graph edges and is re-checkable.

Everything propagates conservatively: containers are field-insensitive,
unknown constructs pass taint through, and there are no sanitizers by
default (the config has a hook, shipped empty).
"""

from __future__ import annotations

import ast
import configparser
from collections import deque
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from hubscan.rules.matcher import RuleMatch
from hubscan.scripts import (
    ApiEntry,
    ImportMap,
    PyAst,
    _Resolver,
    collect_imports,
    load_api_table,
)

THREAT_CATEGORIES = (
    "HiddenAuthentication",
    "Backdoor",
    "Cryptojacking",
    "EmbeddedShell",
    "RemoteControl",
    "SensitiveInfoLeak",
    "SuspiciousExecution",
)


@dataclass
class TaintCategory:
    name: str
    sources: List[str] = field(default_factory=list)  # API paths or pattern:<rule>
    sinks: List[str] = field(default_factory=list)
    sanitizers: List[str] = field(default_factory=list)


@dataclass
class TaintConfig:
    categories: List[TaintCategory] = field(default_factory=list)

    def by_name(self) -> Dict[str, TaintCategory]:
        return {c.name: c for c in self.categories}


def _split_list(raw: str) -> List[str]:
    return [item.strip() for item in raw.replace("\n", ",").split(",") if item.strip()]


def load_taint_config(path: Optional[Path] = None) -> TaintConfig:
    """Read the per-category sources/sinks config; default is the bundled one."""
    if path is None:
        text = resources.files("hubscan.data").joinpath("taint_default.conf").read_text()
    else:
        text = Path(path).read_text()
    parser = configparser.ConfigParser(interpolation=None)
    parser.read_string(text)
    config = TaintConfig()
    for section in parser.sections():
        if section not in THREAT_CATEGORIES:
            raise ValueError(f"unknown threat category {section!r} in taint config")
        config.categories.append(
            TaintCategory(
                name=section,
                sources=_split_list(parser.get(section, "sources", fallback="")),
                sinks=_split_list(parser.get(section, "sinks", fallback="")),
                sanitizers=_split_list(parser.get(section, "sanitizers", fallback="")),
            )
        )
    return config


def validate_taint_config(
    config: TaintConfig, table: Sequence[ApiEntry], rule_names: Iterable[str]
) -> List[str]:
    """Every source/sink must be a table entry or a known pattern rule."""
    table_paths = {e.path + ("*" if e.wildcard else "") for e in table}
    known_rules = set(rule_names)
    problems = []
    for category in config.categories:
        for kind, entries in (("source", category.sources), ("sink", category.sinks)):
            for entry in entries:
                if entry.startswith("pattern:"):
                    if entry[len("pattern:") :] not in known_rules:
                        problems.append(
                            f"{category.name}: {kind} {entry!r} names an unknown rule"
                        )
                elif entry not in table_paths:
                    problems.append(
                        f"{category.name}: {kind} {entry!r} is not in the unsafe-API table"
                    )
    return problems


# ---------------------------------------------------------------------------
# def-use graph
# ---------------------------------------------------------------------------

# edge tags: "flow" plain dataflow, "arg" argument into a call node,
# "param"/"ret" the one-level call edges (crossing one costs the level)
ARG, FLOW, PARAM, RET = "arg", "flow", "param", "ret"


@dataclass
class DFNode:
    nid: int
    kind: str  # var | call | attr | literal | param | return | expr | join
    label: str
    scope: str
    line: int
    col: int
    # canonical-path candidates for call/attr nodes, preferred first
    resolved: List[str] = field(default_factory=list)
    span: Optional[Tuple[int, int]] = None  # byte span for literal nodes
    text: Optional[str] = None  # literal content


class DefUseGraph:
    def __init__(self) -> None:
        self.nodes: List[DFNode] = []
        self.succs: Dict[int, List[Tuple[int, str]]] = {}
        self.preds: Dict[int, List[Tuple[int, str]]] = {}
        self.call_nodes: List[int] = []
        self.attr_nodes: List[int] = []
        self.literal_nodes: List[int] = []

    def add_node(self, kind: str, label: str, scope: str, line: int, col: int) -> int:
        nid = len(self.nodes)
        self.nodes.append(DFNode(nid, kind, label, scope, line, col))
        self.succs[nid] = []
        self.preds[nid] = []
        return nid

    def add_edge(self, src: int, dst: int, tag: str = FLOW) -> None:
        if src == dst:
            return
        if (dst, tag) not in self.succs[src]:
            self.succs[src].append((dst, tag))
            self.preds[dst].append((src, tag))


@dataclass
class _FuncScope:
    qualname: str
    node: ast.AST
    params: List[str]
    param_nids: Dict[str, int]
    return_nid: int
    env_at_def: Dict[str, int]


def _match_api(path: str, entry: str) -> bool:
    if entry.endswith("*"):
        return path.startswith(entry[:-1])
    return path == entry or path.startswith(entry + ".")


def _first_matching(paths: Sequence[str], entries: Sequence[str]) -> Optional[str]:
    """First configured entry any resolution candidate matches, candidate order."""
    for path in paths:
        for entry in entries:
            if _match_api(path, entry):
                return entry
    return None


class _Builder:
    def __init__(self, tree: PyAst, imports: ImportMap, table: Sequence[ApiEntry]):
        self.tree = tree
        self.graph = DefUseGraph()
        self.resolver = _Resolver(imports, table)
        self.funcs: Dict[str, _FuncScope] = {}
        # (name, lineno, col) -> qualname; lets visit_stmt find the scope
        # registered by the pre-pass without re-deriving class prefixes
        self.qual_by_pos: Dict[Tuple[str, int, int], str] = {}
        self.line_offsets = self._line_offsets()

    def _line_offsets(self) -> List[int]:
        offsets = [0]
        for line in self.tree.source.split("\n")[:-1]:
            offsets.append(offsets[-1] + len(line.encode("utf-8")) + 1)
        return offsets

    def _span(self, node: ast.AST) -> Optional[Tuple[int, int]]:
        # ast col offsets are utf-8 byte offsets within the line
        if getattr(node, "end_lineno", None) is None:
            return None
        try:
            start = self.line_offsets[node.lineno - 1] + node.col_offset
            end = self.line_offsets[node.end_lineno - 1] + node.end_col_offset
        except IndexError:
            return None
        return (start, end)

    def _paths(self, node: ast.AST) -> List[str]:
        return [_strip_builtins(p) for p in self.resolver.canonical_paths(node)]

    # -- scope registration ----------------------------------------------------

    def register_functions(self, root: ast.AST) -> None:
        """Pre-register every def (methods included) so call edges wire
        regardless of definition order."""

        def walk(node: ast.AST, prefix: str) -> None:
            for child in ast.iter_child_nodes(node):
                if isinstance(child, (ast.FunctionDef, ast.AsyncFunctionDef)):
                    qual = f"{prefix}.{child.name}" if prefix else child.name
                    args = child.args
                    names = [a.arg for a in args.posonlyargs + args.args + args.kwonlyargs]
                    if args.vararg:
                        names.append(args.vararg.arg)
                    if args.kwarg:
                        names.append(args.kwarg.arg)
                    pnids = {
                        n: self.graph.add_node("param", n, qual, child.lineno, child.col_offset)
                        for n in names
                    }
                    rnid = self.graph.add_node("return", f"{qual}()", qual, child.lineno, 0)
                    self.funcs[qual] = _FuncScope(qual, child, names, pnids, rnid, {})
                    self.qual_by_pos[(child.name, child.lineno, child.col_offset)] = qual
                    walk(child, qual)
                elif isinstance(child, ast.ClassDef):
                    walk(child, f"{prefix}.{child.name}" if prefix else child.name)
                else:
                    walk(child, prefix)

        walk(root, "")

    def _lookup_func(self, parts: Optional[List[str]]) -> Optional[_FuncScope]:
        if parts is None:
            return None
        dotted = ".".join(parts)
        if dotted in self.funcs:
            return self.funcs[dotted]
        if len(parts) == 2 and parts[0] in ("self", "cls"):
            # self.m() from inside a class: match any method named m
            for qual, scope in self.funcs.items():
                if qual.split(".")[-1] == parts[1] and "." in qual:
                    return scope
        return None

    # -- expression visitation ---------------------------------------------------

    def visit_expr(self, node: ast.AST, env: Dict[str, int], scope: str) -> Optional[int]:
        g = self.graph
        line = getattr(node, "lineno", 0)
        col = getattr(node, "col_offset", 0)

        if isinstance(node, ast.Constant):
            if isinstance(node.value, (str, bytes)):
                nid = g.add_node("literal", "str-literal", scope, line, col)
                dfnode = g.nodes[nid]
                dfnode.span = self._span(node)
                value = node.value
                dfnode.text = value if isinstance(value, str) else value.decode("utf-8", "replace")
                g.literal_nodes.append(nid)
                return nid
            return None

        if isinstance(node, ast.Name):
            return env.get(node.id)

        if isinstance(node, ast.Attribute):
            base = self.visit_expr(node.value, env, scope)
            parts = _attr_parts(node)
            nid = g.add_node(
                "attr", ".".join(parts) if parts else f"<dynamic>.{node.attr}", scope, line, col
            )
            g.nodes[nid].resolved = self._paths(node)
            g.attr_nodes.append(nid)
            if base is not None:
                g.add_edge(base, nid)
            return nid

        if isinstance(node, ast.Call):
            paths = self._paths(node.func)
            nid = g.add_node("call", (paths[0] if paths else "<dynamic>") + "()", scope, line, col)
            g.nodes[nid].resolved = paths
            g.call_nodes.append(nid)
            # receiver taint carries into the result: tainted.method() is tainted
            if isinstance(node.func, ast.Name):
                fnid = env.get(node.func.id)
            else:
                fnid = self.visit_expr(node.func, env, scope)
            if fnid is not None:
                g.add_edge(fnid, nid, FLOW)
            arg_nids: List[Optional[int]] = []
            for arg in node.args:
                if isinstance(arg, ast.Starred):
                    arg = arg.value
                anid = self.visit_expr(arg, env, scope)
                arg_nids.append(anid)
                if anid is not None:
                    g.add_edge(anid, nid, ARG)
            kw_nids: Dict[str, Optional[int]] = {}
            for kw in node.keywords:
                knid = self.visit_expr(kw.value, env, scope)
                if kw.arg is not None:
                    kw_nids[kw.arg] = knid
                if knid is not None:
                    g.add_edge(knid, nid, ARG)
            self._wire_call_edges(_attr_parts(node.func), arg_nids, kw_nids, nid)
            return nid

        if isinstance(node, (ast.BinOp, ast.BoolOp, ast.Compare, ast.UnaryOp)):
            nid = g.add_node("expr", type(node).__name__, scope, line, col)
            for child in ast.iter_child_nodes(node):
                if isinstance(child, (ast.operator, ast.boolop, ast.cmpop, ast.unaryop)):
                    continue
                cnid = self.visit_expr(child, env, scope)
                if cnid is not None:
                    g.add_edge(cnid, nid)
            return nid

        if isinstance(node, ast.JoinedStr):
            nid = g.add_node("expr", "f-string", scope, line, col)
            for value in node.values:
                inner = value.value if isinstance(value, ast.FormattedValue) else value
                cnid = self.visit_expr(inner, env, scope)
                if cnid is not None:
                    g.add_edge(cnid, nid)
            return nid

        if isinstance(node, (ast.List, ast.Tuple, ast.Set)):
            nid = g.add_node("expr", type(node).__name__.lower(), scope, line, col)
            for elt in node.elts:
                inner = elt.value if isinstance(elt, ast.Starred) else elt
                cnid = self.visit_expr(inner, env, scope)
                if cnid is not None:
                    g.add_edge(cnid, nid)
            return nid

        if isinstance(node, ast.Dict):
            nid = g.add_node("expr", "dict", scope, line, col)
            for part in list(node.keys) + list(node.values):
                if part is None:
                    continue
                cnid = self.visit_expr(part, env, scope)
                if cnid is not None:
                    g.add_edge(cnid, nid)
            return nid

        if isinstance(node, ast.Subscript):
            nid = g.add_node("expr", "subscript", scope, line, col)
            for child in (node.value, node.slice):
                cnid = self.visit_expr(child, env, scope)
                if cnid is not None:
                    g.add_edge(cnid, nid)
            return nid

        if isinstance(node, ast.IfExp):
            nid = g.add_node("expr", "ifexp", scope, line, col)
            for child in (node.body, node.orelse):
                cnid = self.visit_expr(child, env, scope)
                if cnid is not None:
                    g.add_edge(cnid, nid)
            return nid

        if isinstance(node, ast.Lambda):
            return g.add_node("expr", "lambda", scope, line, col)

        if isinstance(node, (ast.ListComp, ast.SetComp, ast.DictComp, ast.GeneratorExp)):
            # field-insensitive: every expression inside feeds the result
            nid = g.add_node("expr", "comprehension", scope, line, col)
            comp_env = dict(env)
            for gen in node.generators:
                inid = self.visit_expr(gen.iter, comp_env, scope)
                for name in _target_names(gen.target):
                    vnid = g.add_node("var", name, scope, line, col)
                    if inid is not None:
                        g.add_edge(inid, vnid)
                    comp_env[name] = vnid
                for cond in gen.ifs:
                    self.visit_expr(cond, comp_env, scope)
            elements = [node.key, node.value] if isinstance(node, ast.DictComp) else [node.elt]
            for elem in elements:
                cnid = self.visit_expr(elem, comp_env, scope)
                if cnid is not None:
                    g.add_edge(cnid, nid)
            return nid

        if isinstance(node, (ast.Await, ast.Starred)):
            return self.visit_expr(node.value, env, scope)

        if isinstance(node, ast.NamedExpr):
            vnid = self.visit_expr(node.value, env, scope)
            if isinstance(node.target, ast.Name):
                self._define(node.target.id, vnid, env, scope, line, col)
            return vnid

        # unknown constructs pass taint through
        child_nids = [
            cnid
            for child in ast.iter_child_nodes(node)
            if isinstance(child, ast.expr)
            for cnid in [self.visit_expr(child, env, scope)]
            if cnid is not None
        ]
        if not child_nids:
            return None
        nid = g.add_node("expr", type(node).__name__, scope, line, col)
        for cnid in child_nids:
            g.add_edge(cnid, nid)
        return nid

    def _wire_call_edges(
        self,
        parts: Optional[List[str]],
        arg_nids: List[Optional[int]],
        kw_nids: Dict[str, Optional[int]],
        call_nid: int,
    ) -> None:
        func = self._lookup_func(parts)
        if func is None:
            return
        params = func.params
        skip_self = 1 if params and params[0] in ("self", "cls") and parts and len(parts) == 2 else 0
        for i, anid in enumerate(arg_nids):
            idx = i + skip_self
            if anid is not None and idx < len(params):
                self.graph.add_edge(anid, func.param_nids[params[idx]], PARAM)
        for name, knid in kw_nids.items():
            if knid is not None and name in func.param_nids:
                self.graph.add_edge(knid, func.param_nids[name], PARAM)
        self.graph.add_edge(func.return_nid, call_nid, RET)

    # -- statement visitation -----------------------------------------------------

    def _define(
        self,
        name: str,
        value_nid: Optional[int],
        env: Dict[str, int],
        scope: str,
        line: int,
        col: int,
        extra_preds: Sequence[int] = (),
    ) -> None:
        nid = self.graph.add_node("var", name, scope, line, col)
        if value_nid is not None:
            self.graph.add_edge(value_nid, nid)
        for pred in extra_preds:
            self.graph.add_edge(pred, nid)
        env[name] = nid

    def _assign_target(
        self,
        target: ast.AST,
        value_nid: Optional[int],
        value_ast: Optional[ast.AST],
        env: Dict[str, int],
        scope: str,
    ) -> None:
        line = getattr(target, "lineno", 0)
        col = getattr(target, "col_offset", 0)
        if isinstance(target, ast.Name):
            self._define(target.id, value_nid, env, scope, line, col)
        elif isinstance(target, (ast.Tuple, ast.List)):
            elts = target.elts
            if (
                isinstance(value_ast, (ast.Tuple, ast.List))
                and len(value_ast.elts) == len(elts)
                and not any(isinstance(e, ast.Starred) for e in elts)
                and not any(isinstance(e, ast.Starred) for e in value_ast.elts)
            ):
                # positional unpacking: x, y = (t, clean) taints x only
                for tgt, val in zip(elts, value_ast.elts):
                    vnid = self.visit_expr(val, env, scope)
                    self._assign_target(tgt, vnid, val, env, scope)
            else:
                for tgt in elts:
                    inner = tgt.value if isinstance(tgt, ast.Starred) else tgt
                    self._assign_target(inner, value_nid, None, env, scope)
        elif isinstance(target, (ast.Subscript, ast.Attribute)):
            # write-through: mutating d[k] or obj.f taints the container var
            base = target.value
            while isinstance(base, (ast.Subscript, ast.Attribute)):
                base = base.value
            if isinstance(base, ast.Name):
                old = env.get(base.id)
                extra = [old] if old is not None else []
                self._define(base.id, value_nid, env, scope, line, col, extra_preds=extra)

    def visit_body(self, body: Sequence[ast.stmt], env: Dict[str, int], scope: str) -> None:
        for stmt in body:
            self.visit_stmt(stmt, env, scope)

    def _merge_envs(
        self,
        base_env: Dict[str, int],
        branch_envs: List[Dict[str, int]],
        scope: str,
        line: int,
    ) -> Dict[str, int]:
        merged = dict(base_env)
        names: Set[str] = set()
        for env in branch_envs:
            names.update(env)
        for name in names:
            versions = {env[name] for env in branch_envs if name in env}
            if name in base_env:
                versions.add(base_env[name])
            if len(versions) == 1:
                merged[name] = versions.pop()
            elif versions:
                join = self.graph.add_node("join", name, scope, line, 0)
                for v in sorted(versions):
                    self.graph.add_edge(v, join)
                merged[name] = join
        return merged

    def visit_stmt(self, stmt: ast.stmt, env: Dict[str, int], scope: str) -> None:
        g = self.graph
        if isinstance(stmt, (ast.FunctionDef, ast.AsyncFunctionDef)):
            for deco in stmt.decorator_list:
                self.visit_expr(deco, env, scope)
            for default in list(stmt.args.defaults) + [d for d in stmt.args.kw_defaults if d]:
                self.visit_expr(default, env, scope)
            qual = self.qual_by_pos.get((stmt.name, stmt.lineno, stmt.col_offset))
            if qual is not None:
                self.funcs[qual].env_at_def = dict(env)
            env[stmt.name] = g.add_node("var", stmt.name, scope, stmt.lineno, stmt.col_offset)
            return
        if isinstance(stmt, ast.ClassDef):
            for deco in stmt.decorator_list:
                self.visit_expr(deco, env, scope)
            self.visit_body(stmt.body, env, scope)
            return
        if isinstance(stmt, (ast.Import, ast.ImportFrom)):
            return
        if isinstance(stmt, ast.Assign):
            value_nid = self.visit_expr(stmt.value, env, scope)
            for target in stmt.targets:
                self._assign_target(target, value_nid, stmt.value, env, scope)
            self.resolver.note_assignment(stmt)
            return
        if isinstance(stmt, ast.AnnAssign):
            if stmt.value is not None:
                value_nid = self.visit_expr(stmt.value, env, scope)
                self._assign_target(stmt.target, value_nid, stmt.value, env, scope)
            return
        if isinstance(stmt, ast.AugAssign):
            value_nid = self.visit_expr(stmt.value, env, scope)
            if isinstance(stmt.target, ast.Name):
                old = env.get(stmt.target.id)
                extra = [old] if old is not None else []
                self._define(
                    stmt.target.id, value_nid, env, scope, stmt.lineno, stmt.col_offset,
                    extra_preds=extra,
                )
            else:
                self._assign_target(stmt.target, value_nid, None, env, scope)
            return
        if isinstance(stmt, ast.Return):
            if stmt.value is not None:
                vnid = self.visit_expr(stmt.value, env, scope)
                if vnid is not None and scope in self.funcs:
                    g.add_edge(vnid, self.funcs[scope].return_nid)
            return
        if isinstance(stmt, ast.Expr):
            value_nid = self.visit_expr(stmt.value, env, scope)
            call = stmt.value
            if (
                isinstance(call, ast.Call)
                and isinstance(call.func, ast.Attribute)
                and isinstance(call.func.value, ast.Name)
                and call.func.value.id in env
                and value_nid is not None
            ):
                # bare method call: assume the receiver may absorb the
                # arguments (parts.append(x), cfg.update(d), fh.write(s))
                base = call.func.value.id
                self._define(
                    base,
                    value_nid,
                    env,
                    scope,
                    stmt.lineno,
                    stmt.col_offset,
                    extra_preds=[env[base]],
                )
            return
        if isinstance(stmt, ast.If):
            self.visit_expr(stmt.test, env, scope)
            body_env = dict(env)
            self.visit_body(stmt.body, body_env, scope)
            else_env = dict(env)
            self.visit_body(stmt.orelse, else_env, scope)
            merged = self._merge_envs(env, [body_env, else_env], scope, stmt.lineno)
            env.clear()
            env.update(merged)
            return
        if isinstance(stmt, (ast.For, ast.AsyncFor)):
            iter_nid = self.visit_expr(stmt.iter, env, scope)
            loop_env = dict(env)
            self._assign_target(stmt.target, iter_nid, None, loop_env, scope)
            # second pass lets taint ride the back edge
            for _ in range(2):
                self.visit_body(stmt.body, loop_env, scope)
            self.visit_body(stmt.orelse, loop_env, scope)
            merged = self._merge_envs(env, [loop_env], scope, stmt.lineno)
            env.clear()
            env.update(merged)
            return
        if isinstance(stmt, ast.While):
            self.visit_expr(stmt.test, env, scope)
            loop_env = dict(env)
            for _ in range(2):
                self.visit_body(stmt.body, loop_env, scope)
            self.visit_body(stmt.orelse, loop_env, scope)
            merged = self._merge_envs(env, [loop_env], scope, stmt.lineno)
            env.clear()
            env.update(merged)
            return
        if isinstance(stmt, (ast.With, ast.AsyncWith)):
            for item in stmt.items:
                cnid = self.visit_expr(item.context_expr, env, scope)
                if item.optional_vars is not None:
                    self._assign_target(item.optional_vars, cnid, None, env, scope)
            self.visit_body(stmt.body, env, scope)
            return
        if isinstance(stmt, ast.Try):
            body_env = dict(env)
            self.visit_body(stmt.body, body_env, scope)
            handler_envs = []
            for handler in stmt.handlers:
                henv = dict(body_env)
                if handler.name:
                    henv[handler.name] = g.add_node(
                        "var", handler.name, scope, handler.lineno, handler.col_offset
                    )
                self.visit_body(handler.body, henv, scope)
                handler_envs.append(henv)
            merged = self._merge_envs(env, [body_env] + handler_envs, scope, stmt.lineno)
            env.clear()
            env.update(merged)
            self.visit_body(stmt.orelse, env, scope)
            self.visit_body(stmt.finalbody, env, scope)
            return
        if isinstance(stmt, (ast.Raise, ast.Assert)):
            for child in ast.iter_child_nodes(stmt):
                if isinstance(child, ast.expr):
                    self.visit_expr(child, env, scope)
            return
        if isinstance(stmt, ast.Delete):
            for target in stmt.targets:
                for name in _target_names(target):
                    env.pop(name, None)
            return
        # Global/Nonlocal/Pass/Break/Continue: no dataflow
        return

    # -- top-level build --------------------------------------------------------

    def build(self) -> DefUseGraph:
        root = self.tree.root
        if root is None:
            return self.graph
        self.register_functions(root)
        module_env: Dict[str, int] = {}
        self.visit_body(root.body, module_env, "<module>")  # type: ignore[attr-defined]
        for qual, func in self.funcs.items():
            env = dict(module_env)
            env.update(func.env_at_def)
            env.update(func.param_nids)
            self.visit_body(func.node.body, env, qual)  # type: ignore[attr-defined]
        return self.graph


def _attr_parts(node: ast.AST) -> Optional[List[str]]:
    parts: List[str] = []
    while isinstance(node, ast.Attribute):
        parts.append(node.attr)
        node = node.value
    if isinstance(node, ast.Name):
        parts.append(node.id)
        return parts[::-1]
    return None


def _strip_builtins(path: str) -> str:
    return path[len("builtins.") :] if path.startswith("builtins.") else path


def _target_names(node: ast.AST) -> List[str]:
    if isinstance(node, ast.Name):
        return [node.id]
    if isinstance(node, (ast.Tuple, ast.List)):
        out = []
        for elt in node.elts:
            inner = elt.value if isinstance(elt, ast.Starred) else elt
            out.extend(_target_names(inner))
        return out
    return []


def build_dataflow(
    tree: PyAst,
    imports: Optional[ImportMap] = None,
    table: Optional[Sequence[ApiEntry]] = None,
) -> DefUseGraph:
    """Build the per-scope def-use graph for one parsed script."""
    if imports is None:
        imports = collect_imports(tree)
    if table is None:
        table = load_api_table()
    return _Builder(tree, imports, table).build()


# ---------------------------------------------------------------------------
# seeding, propagation, flow detection
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Seed:
    nid: int
    category: str
    origin: str  # the API path or pattern:<rule> that made this a source


class TaintSet:
    """Result of propagation: acts as the tainted-node set, and carries the
    per-seed BFS forests that detect_flows backtracks for witness paths."""

    def __init__(self) -> None:
        self.tainted: Set[int] = set()
        self.seeds: List[_Seed] = []
        # (seed, (nid, crossed)) -> (prev_nid, prev_crossed, tag)
        self.parents: Dict[Tuple[_Seed, Tuple[int, bool]], Tuple[int, bool, str]] = {}
        # seed -> [(sink nid, crossed at arrival, matched sink entry)]
        self.reached: Dict[_Seed, List[Tuple[int, bool, str]]] = {}

    def __contains__(self, nid: int) -> bool:
        return nid in self.tainted

    def __iter__(self):
        return iter(sorted(self.tainted))

    def __len__(self) -> int:
        return len(self.tainted)


def _category_seeds(
    graph: DefUseGraph,
    category: TaintCategory,
    pattern_hits: Sequence[RuleMatch],
) -> List[_Seed]:
    seeds = []
    api_sources = [s for s in category.sources if not s.startswith("pattern:")]
    pattern_sources = {s[len("pattern:") :] for s in category.sources if s.startswith("pattern:")}
    # a rule can also opt in via its own meta, without a config edit
    for rmatch in pattern_hits:
        if rmatch.meta.get("taint_source_category") == category.name:
            pattern_sources.add(rmatch.rule_name)

    for nid in graph.call_nodes + graph.attr_nodes:
        entry = _first_matching(graph.nodes[nid].resolved, api_sources)
        if entry is not None:
            seeds.append(_Seed(nid, category.name, entry))

    if pattern_sources and pattern_hits:
        hits_by_rule: Dict[str, List[Tuple[int, int]]] = {}
        for rmatch in pattern_hits:
            if rmatch.rule_name in pattern_sources:
                spans = hits_by_rule.setdefault(rmatch.rule_name, [])
                for shits in rmatch.matched:
                    if shits.spans:
                        spans.extend(shits.spans)
                    else:
                        spans.extend((off, off + 1) for off in shits.offsets)
        for nid in graph.literal_nodes:
            span = graph.nodes[nid].span
            if span is None:
                continue
            for rule_name, hit_spans in hits_by_rule.items():
                # a hit anywhere overlapping the literal taints it, even when
                # the match begins outside (e.g. a name = "value" regex)
                if any(a < span[1] and span[0] < b for a, b in hit_spans):
                    seeds.append(_Seed(nid, category.name, f"pattern:{rule_name}"))
                    break
    return seeds


def _sink_nodes(graph: DefUseGraph, category: TaintCategory) -> Dict[int, str]:
    out = {}
    for nid in graph.call_nodes:
        entry = _first_matching(graph.nodes[nid].resolved, category.sinks)
        if entry is not None:
            out[nid] = entry
    return out


def seed_and_propagate(
    graph: DefUseGraph,
    config: TaintConfig,
    pattern_hits: Sequence[RuleMatch] = (),
) -> TaintSet:
    """BFS from every source seed; taint crosses at most one call edge."""
    state = TaintSet()
    for category in config.categories:
        sinks = _sink_nodes(graph, category)
        for seed in _category_seeds(graph, category, pattern_hits):
            state.seeds.append(seed)
            start = (seed.nid, False)
            queue = deque([start])
            visited = {start}
            state.tainted.add(seed.nid)
            while queue:
                nid, crossed = queue.popleft()
                for dst, tag in graph.succs[nid]:
                    if tag in (PARAM, RET):
                        if crossed:
                            continue  # one call level only
                        new_crossed = True
                    else:
                        new_crossed = crossed
                    key = (dst, new_crossed)
                    if key in visited:
                        continue
                    visited.add(key)
                    state.parents[(seed, key)] = (nid, crossed, tag)
                    state.tainted.add(dst)
                    if tag == ARG and dst in sinks:
                        state.reached.setdefault(seed, []).append(
                            (dst, new_crossed, sinks[dst])
                        )
                    queue.append(key)
    return state


@dataclass
class FlowPoint:
    api: str  # source origin (API path or pattern:<rule>) / matched sink entry
    line: int
    col: int


@dataclass
class TaintFlow:
    category: str
    source: FlowPoint
    sink: FlowPoint
    path: List[Tuple[int, int, str]]  # (line, col, node label) hops
    confidence: str  # High same-function, Medium across a call edge
    node_path: List[int] = field(default_factory=list)  # graph node ids, for replay


def detect_flows(
    graph: DefUseGraph, tainted: TaintSet, config: TaintConfig
) -> List[TaintFlow]:
    """Turn recorded sink arrivals into flows with replayable witness paths."""
    flows = []
    seen = set()
    for seed in tainted.seeds:
        for sink_nid, crossed, sink_api in tainted.reached.get(seed, []):
            src_node = graph.nodes[seed.nid]
            snk_node = graph.nodes[sink_nid]
            # loop bodies are visited twice, so dedupe by position not nid
            key = (
                seed.category,
                src_node.line,
                src_node.col,
                snk_node.line,
                snk_node.col,
            )
            if key in seen:
                continue
            seen.add(key)
            path_states = [(sink_nid, crossed)]
            while path_states[-1] != (seed.nid, False):
                prev_nid, prev_crossed, _tag = tainted.parents[(seed, path_states[-1])]
                path_states.append((prev_nid, prev_crossed))
            path_states.reverse()
            nodes = [graph.nodes[nid] for nid, _ in path_states]
            flows.append(
                TaintFlow(
                    category=seed.category,
                    source=FlowPoint(seed.origin, src_node.line, src_node.col),
                    sink=FlowPoint(sink_api, snk_node.line, snk_node.col),
                    path=[(n.line, n.col, n.label) for n in nodes],
                    confidence="Medium" if crossed else "High",
                    node_path=[nid for nid, _ in path_states],
                )
            )
    flows.sort(
        key=lambda f: (f.category, f.source.line, f.source.col, f.sink.line, f.sink.col)
    )
    return flows


def analyze_taint(
    source: str,
    pattern_hits: Sequence[RuleMatch] = (),
    config: Optional[TaintConfig] = None,
    table: Optional[Sequence[ApiEntry]] = None,
) -> List[TaintFlow]:
    """Parse, build, seed, propagate, detect: the whole run for one script."""
    from hubscan.scripts import parse_python

    if config is None:
        config = load_taint_config()
    tree = parse_python(source)
    if tree.root is None:
        return []
    graph = build_dataflow(tree, table=table)
    tainted = seed_and_propagate(graph, config, pattern_hits)
    return detect_flows(graph, tainted, config)
