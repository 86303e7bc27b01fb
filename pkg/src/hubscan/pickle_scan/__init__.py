"""Pickle stream analysis: disassembly, unsafe-opcode filtering, symbolic lifting."""

from hubscan.pickle_scan.disasm import (
    Disassembly,
    MissingStop,
    PickleInstruction,
    TruncatedStream,
    UnknownOpcode,
    disassemble,
    disassemble_full,
    format_dump,
)
from hubscan.pickle_scan.lift import (
    Lift,
    LiftError,
    StackUnderflow,
    SymbolicValue,
    UnbalancedMark,
    UnboundMemo,
    lift,
    lift_full,
)
from hubscan.pickle_scan.opcodes import UNSAFE_OPCODES, find_unsafe_opcodes
from hubscan.pickle_scan.snippets import SuspiciousSnippet, extract_snippets

__all__ = [
    "Disassembly",
    "MissingStop",
    "PickleInstruction",
    "TruncatedStream",
    "UnknownOpcode",
    "disassemble",
    "disassemble_full",
    "format_dump",
    "Lift",
    "LiftError",
    "StackUnderflow",
    "SymbolicValue",
    "UnbalancedMark",
    "UnboundMemo",
    "lift",
    "lift_full",
    "UNSAFE_OPCODES",
    "find_unsafe_opcodes",
    "SuspiciousSnippet",
    "extract_snippets",
]
