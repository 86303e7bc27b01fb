from hubscan.rules.parser import (
    DuplicateStringId,
    HexPattern,
    RegexCompileError,
    RegexPattern,
    Rule,
    RuleSyntaxError,
    StringDef,
    TextPattern,
    UndeclaredIdInCondition,
    parse_rules,
)
from hubscan.rules.matcher import (
    RuleMatch,
    StringHits,
    find_string,
    load_rules_dir,
    match,
    scan_targets,
    verify_at,
)

__all__ = [
    "DuplicateStringId",
    "HexPattern",
    "RegexCompileError",
    "RegexPattern",
    "Rule",
    "RuleMatch",
    "RuleSyntaxError",
    "StringDef",
    "StringHits",
    "TextPattern",
    "UndeclaredIdInCondition",
    "find_string",
    "load_rules_dir",
    "match",
    "parse_rules",
    "scan_targets",
    "verify_at",
]
