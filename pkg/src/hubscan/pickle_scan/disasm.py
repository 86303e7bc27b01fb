"""Pickle bytecode disassembler.

Decodes a pickle stream into instructions without building any objects.
Argument decoding follows the standard unpickler's semantics so dumps are
directly comparable with reference tooling: proto-0 strings are unquoted
and escape-decoded, ``I00``/``I01`` become booleans, GLOBAL and INST
render their two lines joined by a space.

The debug dump format is one instruction per line: ``OFFSET OPCODE ARG``.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import List, Optional, Tuple

from hubscan.pickle_scan.opcodes import OPCODES


class DisassemblyError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class TruncatedStream(DisassemblyError):
    pass


class UnknownOpcode(DisassemblyError):
    def __init__(self, byte: int, offset: int):
        super().__init__(f"unknown opcode byte 0x{byte:02x}", offset)
        self.byte = byte


class MissingStop(DisassemblyError):
    def __init__(self, offset: int):
        super().__init__("stream ended before STOP", offset)


@dataclass(frozen=True)
class PickleInstruction:
    offset: int
    opcode: str
    arg: object = None


@dataclass
class Disassembly:
    instructions: List[PickleInstruction]
    trailing: bytes  # bytes after STOP, reported but never consumed


def _unescape(data: bytes, offset: int) -> bytes:
    out = bytearray()
    i = 0
    n = len(data)
    while i < n:
        c = data[i]
        if c != 0x5C:  # backslash
            out.append(c)
            i += 1
            continue
        if i + 1 >= n:
            out.append(c)
            break
        e = data[i + 1]
        i += 2
        simple = {
            ord("\\"): b"\\", ord("'"): b"'", ord('"'): b'"',
            ord("a"): b"\a", ord("b"): b"\b", ord("f"): b"\f",
            ord("n"): b"\n", ord("r"): b"\r", ord("t"): b"\t",
            ord("v"): b"\v", ord("\n"): b"",
        }
        if e in simple:
            out += simple[e]
        elif e == ord("x"):
            hexpart = data[i : i + 2]
            if len(hexpart) != 2:
                raise TruncatedStream("invalid \\x escape", offset)
            try:
                out.append(int(hexpart, 16))
            except ValueError:
                raise DisassemblyError("invalid \\x escape", offset) from None
            i += 2
        elif 0x30 <= e <= 0x37:  # octal, up to 3 digits
            digits = chr(e)
            while i < n and len(digits) < 3 and 0x30 <= data[i] <= 0x37:
                digits += chr(data[i])
                i += 1
            out.append(int(digits, 8) & 0xFF)
        else:
            # unknown escapes pass through verbatim
            out.append(0x5C)
            out.append(e)
    return bytes(out)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int, what: str) -> bytes:
        if self.pos + n > len(self.data):
            raise TruncatedStream(f"{what} extends past end of stream", self.pos)
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def line(self, what: str) -> bytes:
        nl = self.data.find(b"\n", self.pos)
        if nl < 0:
            raise TruncatedStream(f"{what} not newline-terminated", self.pos)
        chunk = self.data[self.pos : nl]
        self.pos = nl + 1
        return chunk


def _decode_unicode(raw: bytes) -> str:
    try:
        return raw.decode("utf-8", "surrogatepass")
    except UnicodeDecodeError:
        # hostile streams embed invalid UTF-8 on purpose; keep going
        return raw.decode("utf-8", "replace")


def _read_arg(reader: _Reader, kind: str, op_offset: int):
    if kind == "uint1":
        return reader.take(1, "uint1")[0]
    if kind == "uint2":
        return struct.unpack("<H", reader.take(2, "uint2"))[0]
    if kind == "int4":
        return struct.unpack("<i", reader.take(4, "int4"))[0]
    if kind == "uint4":
        return struct.unpack("<I", reader.take(4, "uint4"))[0]
    if kind == "uint8":
        return struct.unpack("<Q", reader.take(8, "uint8"))[0]
    if kind == "float8":
        return struct.unpack(">d", reader.take(8, "float8"))[0]
    if kind == "decimalnl_short":
        text = reader.line("decimal argument")
        if text == b"00":
            return False
        if text == b"01":
            return True
        try:
            return int(text)
        except ValueError:
            raise DisassemblyError(f"invalid decimal argument {text!r}", op_offset) from None
    if kind == "decimalnl_long":
        text = reader.line("long argument")
        if text.endswith(b"L"):
            text = text[:-1]
        try:
            return int(text) if text else 0
        except ValueError:
            raise DisassemblyError(f"invalid long argument {text!r}", op_offset) from None
    if kind == "floatnl":
        text = reader.line("float argument")
        try:
            return float(text)
        except ValueError:
            raise DisassemblyError(f"invalid float argument {text!r}", op_offset) from None
    if kind == "stringnl":
        raw = reader.line("string argument")
        if len(raw) >= 2 and raw[0] in (0x27, 0x22) and raw[-1] == raw[0]:
            raw = raw[1:-1]
        else:
            raise DisassemblyError(f"proto-0 string not quoted: {raw!r}", op_offset)
        decoded = _unescape(raw, op_offset)
        try:
            return decoded.decode("ascii")
        except UnicodeDecodeError:
            return decoded.decode("latin-1")
    if kind == "stringnl_noescape":
        raw = reader.line("string argument")
        return raw.decode("ascii", "replace")
    if kind == "stringnl_noescape_pair":
        first = reader.line("module name").decode("ascii", "replace")
        second = reader.line("qualified name").decode("ascii", "replace")
        return f"{first} {second}"
    if kind == "string1":
        n = reader.take(1, "length")[0]
        return reader.take(n, "string payload").decode("latin-1")
    if kind == "string4":
        n = struct.unpack("<i", reader.take(4, "length"))[0]
        if n < 0:
            raise DisassemblyError("negative string length", op_offset)
        return reader.take(n, "string payload").decode("latin-1")
    if kind == "bytes1":
        n = reader.take(1, "length")[0]
        return reader.take(n, "bytes payload")
    if kind == "bytes4":
        n = struct.unpack("<I", reader.take(4, "length"))[0]
        return reader.take(n, "bytes payload")
    if kind == "bytes8":
        n = struct.unpack("<Q", reader.take(8, "length"))[0]
        return reader.take(n, "bytes payload")
    if kind == "bytearray8":
        n = struct.unpack("<Q", reader.take(8, "length"))[0]
        return bytearray(reader.take(n, "bytearray payload"))
    if kind == "unicodestringnl":
        raw = reader.line("unicode argument")
        return raw.decode("raw-unicode-escape")
    if kind == "unicodestring1":
        n = reader.take(1, "length")[0]
        return _decode_unicode(reader.take(n, "unicode payload"))
    if kind == "unicodestring4":
        n = struct.unpack("<I", reader.take(4, "length"))[0]
        return _decode_unicode(reader.take(n, "unicode payload"))
    if kind == "unicodestring8":
        n = struct.unpack("<Q", reader.take(8, "length"))[0]
        return _decode_unicode(reader.take(n, "unicode payload"))
    if kind == "long1":
        n = reader.take(1, "length")[0]
        return int.from_bytes(reader.take(n, "long payload"), "little", signed=True)
    if kind == "long4":
        n = struct.unpack("<i", reader.take(4, "length"))[0]
        if n < 0:
            raise DisassemblyError("negative long length", op_offset)
        return int.from_bytes(reader.take(n, "long payload"), "little", signed=True)
    raise AssertionError(f"unhandled arg kind {kind}")


def disassemble_full(stream: bytes) -> Disassembly:
    """Decode opcodes and arguments until the first STOP.

    Trailing bytes after STOP are reported, not consumed.  Raises
    TruncatedStream, UnknownOpcode, or MissingStop on malformed input.
    """
    reader = _Reader(stream)
    instructions: List[PickleInstruction] = []
    while True:
        if reader.pos >= len(stream):
            raise MissingStop(reader.pos)
        offset = reader.pos
        byte = stream[offset]
        reader.pos += 1
        info = OPCODES.get(byte)
        if info is None:
            raise UnknownOpcode(byte, offset)
        arg = _read_arg(reader, info.arg, offset) if info.arg else None
        instructions.append(PickleInstruction(offset, info.name, arg))
        if info.name == "STOP":
            return Disassembly(instructions, stream[reader.pos :])


def disassemble(stream: bytes) -> List[PickleInstruction]:
    """Disassemble a pickle stream into its instruction list."""
    return disassemble_full(stream).instructions


def probe_prefix(head: bytes, min_ops: int = 3) -> bool:
    """Heuristic: does ``head`` plausibly start a protocol-0 pickle stream?

    Returns True when a STOP is reached or at least ``min_ops``
    instructions decode cleanly; a truncated final instruction (the head
    is only a prefix of the file) counts as plausible.
    """
    reader = _Reader(head)
    ops = 0
    while reader.pos < len(head):
        offset = reader.pos
        byte = head[offset]
        reader.pos += 1
        info = OPCODES.get(byte)
        if info is None:
            return False
        if info.arg:
            try:
                _read_arg(reader, info.arg, offset)
            except TruncatedStream:
                ops += 1
                break
            except DisassemblyError:
                return False
        if info.name == "STOP":
            return True
        ops += 1
    return ops >= min_ops


def format_instruction(ins: PickleInstruction) -> str:
    if ins.arg is None:
        return f"{ins.offset} {ins.opcode}"
    return f"{ins.offset} {ins.opcode} {ins.arg!r}"


def format_dump(instructions: List[PickleInstruction]) -> str:
    """Render the debug dump: one ``OFFSET OPCODE ARG`` line per instruction."""
    return "\n".join(format_instruction(ins) for ins in instructions) + "\n"


def dump_tokens(text: str) -> Tuple[str, ...]:
    """Whitespace-insensitive token view of a dump, for oracle comparison."""
    return tuple(text.split())
