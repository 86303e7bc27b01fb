"""Schema-less protobuf wire-format walker.

SavedModel containers are deep protobuf trees; we only need the strings
buried in them (layer metadata JSON, op names), so rather than bundling
generated schema code this walks the wire format directly: varint keys,
recursion into length-delimited fields that parse cleanly as messages,
everything else treated as a leaf.
"""

from __future__ import annotations

from typing import Iterator, List, Tuple

# wire types
VARINT = 0
FIXED64 = 1
LENGTH_DELIMITED = 2
FIXED32 = 5

_MAX_VARINT_BYTES = 10
_MAX_DEPTH = 48


class MalformedWireFormat(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


def read_varint(data: bytes, pos: int, base: int = 0) -> Tuple[int, int]:
    result = 0
    shift = 0
    start = pos
    while True:
        if pos >= len(data):
            raise MalformedWireFormat("varint runs past end", base + start)
        if pos - start >= _MAX_VARINT_BYTES:
            raise MalformedWireFormat("varint too long", base + start)
        byte = data[pos]
        result |= (byte & 0x7F) << shift
        pos += 1
        if not byte & 0x80:
            return result, pos
        shift += 7


def iter_fields(data: bytes, base: int = 0) -> Iterator[Tuple[int, int, object, int]]:
    """Yield (field_number, wire_type, value, absolute_offset) for one message.

    value is an int for varint/fixed fields and bytes for length-delimited
    ones.  Raises MalformedWireFormat on anything that cannot be a valid
    message, including the legacy group wire types.
    """
    pos = 0
    while pos < len(data):
        at = base + pos
        key, pos = read_varint(data, pos, base)
        field, wire = key >> 3, key & 7
        if field == 0:
            raise MalformedWireFormat("field number 0", at)
        if wire == VARINT:
            value, pos = read_varint(data, pos, base)
            yield field, wire, value, at
        elif wire == FIXED64:
            if pos + 8 > len(data):
                raise MalformedWireFormat("fixed64 runs past end", base + pos)
            yield field, wire, int.from_bytes(data[pos : pos + 8], "little"), at
            pos += 8
        elif wire == FIXED32:
            if pos + 4 > len(data):
                raise MalformedWireFormat("fixed32 runs past end", base + pos)
            yield field, wire, int.from_bytes(data[pos : pos + 4], "little"), at
            pos += 4
        elif wire == LENGTH_DELIMITED:
            length, pos = read_varint(data, pos, base)
            if pos + length > len(data):
                raise MalformedWireFormat("length-delimited field runs past end", at)
            yield field, wire, data[pos : pos + length], at
            pos += length
        else:
            raise MalformedWireFormat(f"unsupported wire type {wire}", at)


def _printable_text(payload: bytes) -> str:
    if not payload:
        return ""
    try:
        text = payload.decode("utf-8")
    except UnicodeDecodeError:
        return ""
    if all(c.isprintable() or c in "\n\r\t " for c in text):
        return text
    return ""


def collect_strings(data: bytes) -> Tuple[List[Tuple[str, int]], "MalformedWireFormat | None"]:
    """Extract every plausible string from a wire-format message tree.

    Returns (text, absolute_offset) pairs plus the top-level wire error,
    if any; strings collected before the error are kept.  Length-delimited
    payloads that parse fully as messages are recursed into; printable
    payloads are recorded as strings (a payload can be both: protobuf is
    ambiguous without a schema, and for a scanner missing a string is
    worse than listing one twice).
    """
    out: List[Tuple[str, int]] = []

    def visit(buf: bytes, base: int, depth: int) -> None:
        for _field, wire, value, at in iter_fields(buf, base):
            if wire != LENGTH_DELIMITED:
                continue
            payload = value  # type: ignore[assignment]
            assert isinstance(payload, bytes)
            text = _printable_text(payload)
            if len(text) >= 2:
                out.append((text, at))
            if depth < _MAX_DEPTH and payload:
                try:
                    visit(payload, at, depth + 1)
                except MalformedWireFormat:
                    pass  # leaf, not a nested message

    try:
        visit(data, 0, 0)
    except MalformedWireFormat as err:
        return out, err
    return out, None
