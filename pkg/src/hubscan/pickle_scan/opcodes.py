"""The pickle opcode table, protocols 0 through 5.

Each opcode is a single byte, optionally followed by an argument whose
encoding is named by ``arg``.  The table mirrors the stack machine the
standard unpickler implements; it is the ground truth for both the
disassembler and the symbolic lifter.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, TYPE_CHECKING

if TYPE_CHECKING:
    from hubscan.pickle_scan.disasm import PickleInstruction


@dataclass(frozen=True)
class OpcodeInfo:
    code: int  # the opcode byte
    name: str
    proto: int  # protocol that introduced it
    arg: Optional[str]  # argument reader name, None if bare


_TABLE = [
    # code, name, proto, arg reader
    ("I", "INT", 0, "decimalnl_short"),
    ("J", "BININT", 1, "int4"),
    ("K", "BININT1", 1, "uint1"),
    ("M", "BININT2", 1, "uint2"),
    ("L", "LONG", 0, "decimalnl_long"),
    ("\x8a", "LONG1", 2, "long1"),
    ("\x8b", "LONG4", 2, "long4"),
    ("S", "STRING", 0, "stringnl"),
    ("T", "BINSTRING", 1, "string4"),
    ("U", "SHORT_BINSTRING", 1, "string1"),
    ("B", "BINBYTES", 3, "bytes4"),
    ("C", "SHORT_BINBYTES", 3, "bytes1"),
    ("\x8e", "BINBYTES8", 4, "bytes8"),
    ("\x96", "BYTEARRAY8", 5, "bytearray8"),
    ("\x97", "NEXT_BUFFER", 5, None),
    ("\x98", "READONLY_BUFFER", 5, None),
    ("N", "NONE", 0, None),
    ("\x88", "NEWTRUE", 2, None),
    ("\x89", "NEWFALSE", 2, None),
    ("V", "UNICODE", 0, "unicodestringnl"),
    ("\x8c", "SHORT_BINUNICODE", 4, "unicodestring1"),
    ("X", "BINUNICODE", 1, "unicodestring4"),
    ("\x8d", "BINUNICODE8", 4, "unicodestring8"),
    ("F", "FLOAT", 0, "floatnl"),
    ("G", "BINFLOAT", 1, "float8"),
    ("]", "EMPTY_LIST", 1, None),
    ("a", "APPEND", 0, None),
    ("e", "APPENDS", 1, None),
    ("l", "LIST", 0, None),
    (")", "EMPTY_TUPLE", 1, None),
    ("t", "TUPLE", 0, None),
    ("\x85", "TUPLE1", 2, None),
    ("\x86", "TUPLE2", 2, None),
    ("\x87", "TUPLE3", 2, None),
    ("}", "EMPTY_DICT", 1, None),
    ("d", "DICT", 0, None),
    ("s", "SETITEM", 0, None),
    ("u", "SETITEMS", 1, None),
    ("\x8f", "EMPTY_SET", 4, None),
    ("\x90", "ADDITEMS", 4, None),
    ("\x91", "FROZENSET", 4, None),
    ("0", "POP", 0, None),
    ("2", "DUP", 0, None),
    ("(", "MARK", 0, None),
    ("1", "POP_MARK", 1, None),
    ("g", "GET", 0, "decimalnl_short"),
    ("h", "BINGET", 1, "uint1"),
    ("j", "LONG_BINGET", 1, "uint4"),
    ("p", "PUT", 0, "decimalnl_short"),
    ("q", "BINPUT", 1, "uint1"),
    ("r", "LONG_BINPUT", 1, "uint4"),
    ("\x94", "MEMOIZE", 4, None),
    ("\x82", "EXT1", 2, "uint1"),
    ("\x83", "EXT2", 2, "uint2"),
    ("\x84", "EXT4", 2, "int4"),
    ("c", "GLOBAL", 0, "stringnl_noescape_pair"),
    ("\x93", "STACK_GLOBAL", 4, None),
    ("R", "REDUCE", 0, None),
    ("b", "BUILD", 0, None),
    ("i", "INST", 0, "stringnl_noescape_pair"),
    ("o", "OBJ", 1, None),
    ("\x81", "NEWOBJ", 2, None),
    ("\x92", "NEWOBJ_EX", 4, None),
    ("\x80", "PROTO", 2, "uint1"),
    (".", "STOP", 0, None),
    ("\x95", "FRAME", 4, "uint8"),
    ("P", "PERSID", 0, "stringnl_noescape"),
    ("Q", "BINPERSID", 1, None),
]

OPCODES: dict[int, OpcodeInfo] = {
    ord(code): OpcodeInfo(ord(code), name, proto, arg) for code, name, proto, arg in _TABLE
}

BY_NAME: dict[str, OpcodeInfo] = {info.name: info for info in OPCODES.values()}

PROTO0_CODES = frozenset(info.code for info in OPCODES.values() if info.proto == 0)

# Opcodes that can import code or invoke callables during unpickling.
# STACK_GLOBAL is the protocol-4 twin of GLOBAL; leaving it out would be
# a trivial bypass, so it is part of the normative set.
UNSAFE_OPCODES = frozenset(
    ["REDUCE", "GLOBAL", "OBJ", "INST", "NEWOBJ", "NEWOBJ_EX", "STACK_GLOBAL"]
)

UNSAFE_OPCODE_NOTES = {
    "REDUCE": "calls a callable with an argument tuple",
    "GLOBAL": "imports a module attribute onto the stack",
    "STACK_GLOBAL": "imports a module attribute named by stack strings",
    "OBJ": "instantiates a class taken from the stack",
    "INST": "instantiates a class named by module and attribute",
    "NEWOBJ": "instantiates via __new__ with an argument tuple",
    "NEWOBJ_EX": "instantiates via __new__ with args and kwargs",
}


def find_unsafe_opcodes(instructions) -> list[tuple["PickleInstruction", str]]:
    """Return (instruction, opcode-class) for every unsafe opcode, in stream order."""
    return [(ins, ins.opcode) for ins in instructions if ins.opcode in UNSAFE_OPCODES]
