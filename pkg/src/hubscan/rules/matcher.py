"""Pattern search and condition evaluation over byte targets.

Semantics are pinned down to the byte: text search is overlapping
substring search (nocase folds ASCII letters only, bytes >= 0x80 compare
exactly), regexes run bytewise and non-overlapping, hex patterns do a
masked compare where ?? admits any byte.  Every reported offset
re-verifies: applying the raw pattern at that offset succeeds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from hubscan.rules.parser import (
    AndNode,
    CondNode,
    HexPattern,
    IdNode,
    NotNode,
    OfThemNode,
    OrNode,
    Rule,
    RuleSyntaxError,
    StringDef,
    TextPattern,
    RegexPattern,
    parse_rules,
)


@dataclass
class StringHits:
    string_id: str
    offsets: List[int] = field(default_factory=list)
    spans: List[Tuple[int, int]] = field(default_factory=list)  # [start, end) per hit


@dataclass
class RuleMatch:
    rule_name: str
    matched: List[StringHits] = field(default_factory=list)
    target: str = ""  # artifact path or extracted-snippet id
    meta: Dict[str, str] = field(default_factory=dict)


def _find_text(pattern: TextPattern, data: bytes) -> List[Tuple[int, int]]:
    needle = pattern.value
    haystack = data
    if pattern.nocase:
        needle = needle.lower()
        haystack = data.lower()
    if not needle:
        return []
    spans = []
    start = 0
    while True:
        idx = haystack.find(needle, start)
        if idx < 0:
            return spans
        spans.append((idx, idx + len(needle)))
        start = idx + 1  # overlapping occurrences count


def _find_regex(pattern: RegexPattern, data: bytes) -> List[Tuple[int, int]]:
    return [(m.start(), m.end()) for m in pattern.compiled().finditer(data)]


def _find_hex(pattern: HexPattern, data: bytes) -> List[Tuple[int, int]]:
    mask = pattern.bytes_mask
    n = len(mask)
    if n == 0 or n > len(data):
        return []
    # anchor on the longest literal run to skip impossible positions fast
    spans = []
    for i in range(len(data) - n + 1):
        ok = True
        for j, want in enumerate(mask):
            if want is not None and data[i + j] != want:
                ok = False
                break
        if ok:
            spans.append((i, i + n))
    return spans


def find_string_spans(sdef: StringDef, data: bytes) -> List[Tuple[int, int]]:
    """Every hit as a [start, end) byte interval."""
    if isinstance(sdef.pattern, TextPattern):
        return _find_text(sdef.pattern, data)
    if isinstance(sdef.pattern, RegexPattern):
        return _find_regex(sdef.pattern, data)
    return _find_hex(sdef.pattern, data)


def find_string(sdef: StringDef, data: bytes) -> List[int]:
    return [start for start, _ in find_string_spans(sdef, data)]


def verify_at(sdef: StringDef, data: bytes, offset: int) -> bool:
    """Re-check a reported offset directly against the raw pattern."""
    p = sdef.pattern
    if isinstance(p, TextPattern):
        region = data[offset : offset + len(p.value)]
        if p.nocase:
            return region.lower() == p.value.lower()
        return region == p.value
    if isinstance(p, RegexPattern):
        return p.compiled().match(data, offset) is not None
    region = data[offset : offset + len(p.bytes_mask)]
    if len(region) != len(p.bytes_mask):
        return False
    return all(w is None or region[j] == w for j, w in enumerate(p.bytes_mask))


def _eval(node: CondNode, hit_ids: frozenset) -> bool:
    if isinstance(node, IdNode):
        return node.sid in hit_ids
    if isinstance(node, NotNode):
        return not _eval(node.operand, hit_ids)
    if isinstance(node, AndNode):
        return _eval(node.left, hit_ids) and _eval(node.right, hit_ids)
    if isinstance(node, OrNode):
        return _eval(node.left, hit_ids) or _eval(node.right, hit_ids)
    if isinstance(node, OfThemNode):
        return len(hit_ids) >= node.count
    raise AssertionError(f"unknown condition node {node!r}")


def match(rule: Rule, data: bytes, target: str = "") -> Optional[RuleMatch]:
    """Evaluate one rule against one byte target."""
    hits = []
    for s in rule.strings:
        spans = find_string_spans(s, data)
        hits.append(StringHits(s.sid, [a for a, _ in spans], spans))
    hit_ids = frozenset(h.string_id for h in hits if h.offsets)
    assert rule.condition is not None
    if not _eval(rule.condition, hit_ids):
        return None
    return RuleMatch(
        rule_name=rule.name,
        matched=[h for h in hits if h.offsets],
        target=target,
        meta=dict(rule.meta),
    )


def scan_targets(
    rules: Sequence[Rule], targets: Sequence[Tuple[str, bytes]]
) -> List[RuleMatch]:
    """All rules against all targets, in (rule, target) order."""
    out = []
    for rule in rules:
        for target_id, data in targets:
            m = match(rule, data, target_id)
            if m is not None:
                out.append(m)
    return out


def load_rules_dir(directory: Path) -> List[Rule]:
    """Parse every *.rules file under a directory, sorted by file name."""
    rules = []
    for path in sorted(Path(directory).glob("*.rules")):
        try:
            rules.extend(parse_rules(path.read_text()))
        except RuleSyntaxError as exc:
            raise type(exc)(f"{path.name}: {exc.message}", exc.line, exc.column) from exc
    return rules
