"""Extraction of suspicious code payloads from lifted pickle trees.

A pickle that calls or instantiates something from the model-side unsafe
API list (exec/eval/compile/getattr, runpy._run_code, os.system,
subprocess anything, webbrowser.open, operator.attrgetter) gets each such
site reported as a SuspiciousSnippet carrying the string arguments, which
downstream analysis treats as embedded source code.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Tuple, Union

from hubscan.pickle_scan.lift import (
    Call,
    Instance,
    Lift,
    Literal,
    SymbolicValue,
    SymbolRef,
    iter_all,
    iter_nodes,
)

# (module, name) pairs; name "*" matches any attribute of the module.
# __builtin__ is the Python 2 spelling of builtins and is folded into it.
UNSAFE_CALLEES = frozenset(
    [
        ("builtins", "exec"),
        ("builtins", "eval"),
        ("builtins", "compile"),
        ("builtins", "getattr"),
        ("runpy", "_run_code"),
        ("os", "system"),
        ("posix", "system"),
        ("subprocess", "*"),
        ("webbrowser", "open"),
        ("operator", "attrgetter"),
    ]
)

_MODULE_ALIASES = {"__builtin__": "builtins"}


@dataclass
class SuspiciousSnippet:
    callee: str  # dotted path, e.g. "os.system"
    arg_strings: List[str] = field(default_factory=list)
    arg_count: int = 0  # total arguments, including non-strings
    source_offset: int = -1
    origin: str = "Pickle"  # Pickle | KerasLambda | TfOperator


def _match_callee(ref: SymbolRef) -> Optional[str]:
    module = _MODULE_ALIASES.get(ref.module, ref.module)
    if (module, ref.name) in UNSAFE_CALLEES or (module, "*") in UNSAFE_CALLEES:
        return f"{module}.{ref.name}" if ref.name else module
    return None


def _collect_args(args: Tuple[SymbolicValue, ...]) -> Tuple[List[str], int]:
    strings = [
        a.value for a in args if isinstance(a, Literal) and isinstance(a.value, str)
    ]
    return strings, len(args)


def extract_snippets(tree: Union[SymbolicValue, Lift]) -> List[SuspiciousSnippet]:
    """Walk a lifted tree (or a whole Lift) and pull out unsafe call sites.

    Both Call nodes (REDUCE) and Instance nodes (NEWOBJ / NEWOBJ_EX / OBJ
    / INST) are considered: instantiating os.system via INST runs it just
    as surely as REDUCE does.
    """
    nodes: Iterable[SymbolicValue]
    if isinstance(tree, Lift):
        nodes = iter_all(tree)
    else:
        nodes = iter_nodes(tree)

    snippets: List[SuspiciousSnippet] = []
    seen: set = set()
    for node in nodes:
        if id(node) in seen:
            continue
        seen.add(id(node))
        if isinstance(node, Call) and isinstance(node.callee, SymbolRef):
            callee = _match_callee(node.callee)
            if callee is None:
                continue
            strings, count = _collect_args(node.args)
            snippets.append(
                SuspiciousSnippet(callee, strings, count, node.offset, "Pickle")
            )
        elif isinstance(node, Instance) and isinstance(node.cls, SymbolRef):
            callee = _match_callee(node.cls)
            if callee is None:
                continue
            strings, count = _collect_args(node.args)
            snippets.append(
                SuspiciousSnippet(callee, strings, count, node.offset, "Pickle")
            )
    snippets.sort(key=lambda s: s.source_offset)
    return snippets
