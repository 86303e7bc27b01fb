"""Parser for the rule language (a YARA subset).

Grammar:

    rule NAME {
        meta:
            key = "value" | 123 | true | false
        strings:
            $id = "text literal" [nocase]
            $id = /regex/
            $id = { AA BB ?? CC }
        condition:
            expr := term ('or' term)*
            term := factor ('and' factor)*
            factor := 'not' factor | '(' expr ')' | $id
                    | ('any' | 'all' | INT) 'of' 'them'
    }

`//` and `/* */` comments are allowed anywhere whitespace is.  No
modules, external variables, or offset operators: the bundled threat
patterns do not need them.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union


class RuleSyntaxError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.message = message
        self.line = line
        self.column = column


class DuplicateStringId(RuleSyntaxError):
    pass


class UndeclaredIdInCondition(RuleSyntaxError):
    pass


class RegexCompileError(RuleSyntaxError):
    pass


@dataclass(frozen=True)
class TextPattern:
    value: bytes
    nocase: bool = False


@dataclass(frozen=True)
class RegexPattern:
    source: str

    def compiled(self) -> "re.Pattern[bytes]":
        return re.compile(self.source.encode("utf-8"), re.DOTALL)


@dataclass(frozen=True)
class HexPattern:
    # one entry per byte position; None is the ?? wildcard
    bytes_mask: Tuple[Optional[int], ...]


Pattern = Union[TextPattern, RegexPattern, HexPattern]


@dataclass(frozen=True)
class StringDef:
    sid: str  # includes the $ prefix
    pattern: Pattern


# condition AST
@dataclass(frozen=True)
class IdNode:
    sid: str


@dataclass(frozen=True)
class NotNode:
    operand: "CondNode"


@dataclass(frozen=True)
class AndNode:
    left: "CondNode"
    right: "CondNode"


@dataclass(frozen=True)
class OrNode:
    left: "CondNode"
    right: "CondNode"


@dataclass(frozen=True)
class OfThemNode:
    count: int  # already resolved: any -> 1, all -> len(strings)


CondNode = Union[IdNode, NotNode, AndNode, OrNode, OfThemNode]


@dataclass
class Rule:
    name: str
    meta: Dict[str, str] = field(default_factory=dict)
    strings: List[StringDef] = field(default_factory=list)
    condition: Optional[CondNode] = None


class _Cursor:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def location(self, pos: Optional[int] = None) -> Tuple[int, int]:
        p = self.pos if pos is None else pos
        line = self.text.count("\n", 0, p) + 1
        col = p - (self.text.rfind("\n", 0, p) + 1) + 1
        return line, col

    def error(self, message: str, cls=RuleSyntaxError, pos: Optional[int] = None):
        line, col = self.location(pos)
        raise cls(message, line, col)

    def eof(self) -> bool:
        self.skip_trivia()
        return self.pos >= len(self.text)

    def skip_trivia(self) -> None:
        while self.pos < len(self.text):
            c = self.text[self.pos]
            if c in " \t\r\n":
                self.pos += 1
            elif self.text.startswith("//", self.pos):
                nl = self.text.find("\n", self.pos)
                self.pos = len(self.text) if nl < 0 else nl + 1
            elif self.text.startswith("/*", self.pos):
                end = self.text.find("*/", self.pos + 2)
                if end < 0:
                    self.error("unterminated /* comment")
                self.pos = end + 2
            else:
                return

    def peek_word(self) -> str:
        self.skip_trivia()
        m = re.match(r"[A-Za-z_][A-Za-z0-9_]*", self.text[self.pos :])
        return m.group() if m else ""

    def take_word(self) -> str:
        word = self.peek_word()
        if not word:
            self.error("expected an identifier")
        self.pos += len(word)
        return word

    def expect_word(self, word: str) -> None:
        got = self.peek_word()
        if got != word:
            self.error(f"expected {word!r}, found {got or self.text[self.pos:self.pos+1]!r}")
        self.pos += len(word)

    def peek_char(self) -> str:
        self.skip_trivia()
        return self.text[self.pos : self.pos + 1]

    def expect_char(self, char: str) -> None:
        if self.peek_char() != char:
            self.error(f"expected {char!r}, found {self.peek_char()!r}")
        self.pos += 1

    def try_char(self, char: str) -> bool:
        if self.peek_char() == char:
            self.pos += 1
            return True
        return False


_ESCAPES = {"n": b"\n", "t": b"\t", "r": b"\r", '"': b'"', "\\": b"\\", "0": b"\x00"}


def _read_quoted(cur: _Cursor) -> bytes:
    cur.expect_char('"')
    out = bytearray()
    while True:
        if cur.pos >= len(cur.text):
            cur.error("unterminated string literal")
        c = cur.text[cur.pos]
        cur.pos += 1
        if c == '"':
            return bytes(out)
        if c == "\n":
            cur.error("newline inside string literal", pos=cur.pos - 1)
        if c == "\\":
            if cur.pos >= len(cur.text):
                cur.error("dangling escape in string literal")
            e = cur.text[cur.pos]
            cur.pos += 1
            if e in _ESCAPES:
                out += _ESCAPES[e]
            elif e == "x":
                hexpart = cur.text[cur.pos : cur.pos + 2]
                if len(hexpart) != 2 or not re.fullmatch(r"[0-9A-Fa-f]{2}", hexpart):
                    cur.error("invalid \\x escape in string literal")
                out.append(int(hexpart, 16))
                cur.pos += 2
            else:
                cur.error(f"unknown escape \\{e} in string literal")
        else:
            out += c.encode("utf-8")


def _read_regex(cur: _Cursor) -> RegexPattern:
    start = cur.pos
    cur.expect_char("/")
    out = []
    while True:
        if cur.pos >= len(cur.text):
            cur.error("unterminated regex", pos=start)
        c = cur.text[cur.pos]
        cur.pos += 1
        if c == "/":
            break
        if c == "\n":
            cur.error("newline inside regex", pos=cur.pos - 1)
        if c == "\\" and cur.pos < len(cur.text):
            nxt = cur.text[cur.pos]
            cur.pos += 1
            if nxt == "/":
                out.append("/")  # YARA-style escaped delimiter
            else:
                out.append(c)
                out.append(nxt)
        else:
            out.append(c)
    source = "".join(out)
    pattern = RegexPattern(source)
    try:
        pattern.compiled()
    except re.error as exc:
        cur.error(f"regex does not compile: {exc}", RegexCompileError, pos=start)
    return pattern


def _read_hex(cur: _Cursor) -> HexPattern:
    start = cur.pos
    cur.expect_char("{")
    entries: List[Optional[int]] = []
    nibbles: List[str] = []

    def flush_pair():
        if len(nibbles) == 1:
            cur.error("hex pattern has an odd nibble count", pos=start)

    while True:
        cur.skip_trivia()
        if cur.pos >= len(cur.text):
            cur.error("unterminated hex pattern", pos=start)
        c = cur.text[cur.pos]
        if c == "}":
            flush_pair()
            cur.pos += 1
            break
        if c == "?":
            flush_pair()
            if cur.text[cur.pos : cur.pos + 2] != "??":
                cur.error("wildcard nibbles must come in ?? pairs")
            entries.append(None)
            cur.pos += 2
        elif re.fullmatch(r"[0-9A-Fa-f]", c):
            nibbles.append(c)
            cur.pos += 1
            if len(nibbles) == 2:
                entries.append(int("".join(nibbles), 16))
                nibbles.clear()
        else:
            cur.error(f"unexpected {c!r} in hex pattern")
    if not entries:
        cur.error("empty hex pattern", pos=start)
    return HexPattern(tuple(entries))


def _read_meta_value(cur: _Cursor) -> str:
    c = cur.peek_char()
    if c == '"':
        return _read_quoted(cur).decode("utf-8", "replace")
    word = cur.peek_word()
    if word in ("true", "false"):
        cur.pos += len(word)
        return word
    m = re.match(r"-?\d+", cur.text[cur.pos :])
    if m:
        cur.pos += len(m.group())
        return m.group()
    cur.error("expected a string, integer, or boolean meta value")
    raise AssertionError  # unreachable


def _read_string_id(cur: _Cursor) -> str:
    cur.expect_char("$")
    word = cur.take_word()
    return "$" + word


_CONDITION_KEYWORDS = frozenset(["and", "or", "not", "of", "them", "any", "all"])


def _parse_condition(cur: _Cursor, string_count: int) -> CondNode:
    def parse_or() -> CondNode:
        node = parse_and()
        while cur.peek_word() == "or":
            cur.expect_word("or")
            node = OrNode(node, parse_and())
        return node

    def parse_and() -> CondNode:
        node = parse_factor()
        while cur.peek_word() == "and":
            cur.expect_word("and")
            node = AndNode(node, parse_factor())
        return node

    def parse_of(count: int) -> CondNode:
        cur.expect_word("of")
        cur.expect_word("them")
        return OfThemNode(count)

    def parse_factor() -> CondNode:
        word = cur.peek_word()
        if word == "not":
            cur.expect_word("not")
            return NotNode(parse_factor())
        if word == "any":
            cur.expect_word("any")
            return parse_of(1)
        if word == "all":
            cur.expect_word("all")
            return parse_of(string_count)
        if cur.peek_char() == "(":
            cur.expect_char("(")
            node = parse_or()
            cur.expect_char(")")
            return node
        if cur.peek_char() == "$":
            return IdNode(_read_string_id(cur))
        m = re.match(r"\d+", cur.text[cur.pos :])
        if m:
            cur.pos += len(m.group())
            return parse_of(int(m.group()))
        cur.error("expected a condition term")
        raise AssertionError  # unreachable

    return parse_or()


def _validate_condition(cur: _Cursor, rule: Rule, cond_pos: int) -> None:
    declared = {s.sid for s in rule.strings}

    def visit(node: CondNode) -> None:
        if isinstance(node, IdNode):
            if node.sid not in declared:
                line, col = cur.location(cond_pos)
                raise UndeclaredIdInCondition(
                    f"condition of rule {rule.name!r} references undeclared {node.sid}",
                    line,
                    col,
                )
        elif isinstance(node, NotNode):
            visit(node.operand)
        elif isinstance(node, (AndNode, OrNode)):
            visit(node.left)
            visit(node.right)

    assert rule.condition is not None
    visit(rule.condition)


def _parse_rule(cur: _Cursor) -> Rule:
    cur.expect_word("rule")
    name = cur.take_word()
    rule = Rule(name)
    cur.expect_char("{")

    section = None
    cond_pos = cur.pos
    while True:
        if cur.peek_char() == "}":
            cur.expect_char("}")
            break
        word = cur.peek_word()
        if word in ("meta", "strings", "condition"):
            cur.expect_word(word)
            cur.expect_char(":")
            section = word
            if word == "condition":
                cur.skip_trivia()
                cond_pos = cur.pos
                rule.condition = _parse_condition(cur, len(rule.strings))
            continue
        if section == "meta":
            key = cur.take_word()
            cur.expect_char("=")
            rule.meta[key] = _read_meta_value(cur)
        elif section == "strings":
            sid_pos = cur.pos
            sid = _read_string_id(cur)
            if any(s.sid == sid for s in rule.strings):
                line, col = cur.location(sid_pos)
                raise DuplicateStringId(
                    f"string id {sid} declared twice in rule {name!r}", line, col
                )
            cur.expect_char("=")
            c = cur.peek_char()
            if c == '"':
                value = _read_quoted(cur)
                nocase = False
                if cur.peek_word() == "nocase":
                    cur.expect_word("nocase")
                    nocase = True
                pattern: Pattern = TextPattern(value, nocase)
            elif c == "/":
                pattern = _read_regex(cur)
            elif c == "{":
                pattern = _read_hex(cur)
            else:
                cur.error("expected a text, regex, or hex pattern")
                raise AssertionError  # unreachable
            rule.strings.append(StringDef(sid, pattern))
        else:
            cur.error(f"unexpected content in rule {name!r} (missing section header?)")

    if rule.condition is None:
        cur.error(f"rule {name!r} has no condition section")
    _validate_condition(cur, rule, cond_pos)
    return rule


def parse_rules(text: str) -> List[Rule]:
    """Parse a rule file; multiple rules per file."""
    cur = _Cursor(text)
    rules = []
    while not cur.eof():
        rules.append(_parse_rule(cur))
    return rules
