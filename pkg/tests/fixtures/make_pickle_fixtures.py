"""Regenerate pickle_fixtures.json.

Each fixture is a small pickle stream (either produced by the stdlib
pickler or hand-assembled bytes) together with a reference token dump
derived from pickletools.genops.  The dump is frozen into the JSON file
so the test suite never needs pickletools at run time; rerun this script
only when adding fixtures.

All payload-bearing fixtures are inert: the command strings are echo
markers and nothing in this repository ever unpickles them.
"""

from __future__ import annotations

import json
import pickle
import pickletools
from pathlib import Path

HERE = Path(__file__).parent


class Point:
    def __init__(self, x=0, y=0):
        self.x = x
        self.y = y

    def __reduce__(self):  # stable shape across protocols
        return (Point, (self.x, self.y))


def reference_tokens(data: bytes):
    tokens = []
    for info, arg, pos in pickletools.genops(data):
        tokens.append([pos, info.name, repr(arg)])
    return tokens


def build_fixtures():
    fixtures = []

    def add(name: str, data: bytes, note: str = ""):
        fixtures.append({"name": name, "hex": data.hex(), "note": note})

    # stdlib-produced streams across the four protocols under test
    samples = {
        "none": None,
        "bool_pair": (True, False),
        "int_small": 42,
        "int_negative": -7,
        "long_big": 2**70,
        "float_pi": 3.14159,
        "str_plain": "hello world",
        "str_escapes": "line1\nline2\t'quoted' \\slash",
        "unicode_mixed": "héllo ☃ snow",
        "list_flat": [1, 2, 3],
        "tuple_three": (1, "two", 3.0),
        "dict_nested": {"a": [1, (2, 3)], "b": None},
        "bytes_small": b"\x00\x01binary\xff",
    }
    for proto in (0, 2, 4, 5):
        for key, value in samples.items():
            add(f"{key}_p{proto}", pickle.dumps(value, protocol=proto))

    shared = [1, 2]
    add("memo_shared_p0", pickle.dumps((shared, shared), protocol=0), "same list twice")
    add("memo_shared_p2", pickle.dumps((shared, shared), protocol=2))
    recursive = []
    recursive.append(recursive)
    add("recursive_list_p0", pickle.dumps(recursive, protocol=0), "self-referential list")
    add("recursive_list_p4", pickle.dumps(recursive, protocol=4))
    add("set_p4", pickle.dumps({1, 2, 3}, protocol=4))
    add("frozenset_p4", pickle.dumps(frozenset([4, 5]), protocol=4))
    add("bytearray_p5", pickle.dumps(bytearray(b"mutable"), protocol=5))
    add("instance_p0", pickle.dumps(Point(1, 2), protocol=0), "GLOBAL + REDUCE")
    add("instance_p2", pickle.dumps(Point(3, 4), protocol=2))
    add("instance_p4", pickle.dumps(Point(5, 6), protocol=4), "STACK_GLOBAL + REDUCE")
    add("tuple1_p2", pickle.dumps((9,), protocol=2))
    add("tuple2_p2", pickle.dumps((9, 8), protocol=2))

    # hand-assembled streams: attack shapes with inert arguments, plus
    # opcodes the stdlib pickler rarely or never emits
    add(
        "global_reduce_p0",
        b"cos\nsystem\n(S'echo FIXTURE-ONLY'\ntR.",
        "os.system via GLOBAL/REDUCE",
    )
    add(
        "global_reduce_memo_p0",
        b"cos\nsystem\np0\n(S'echo FIXTURE-ONLY'\np1\ntp2\nRp3\n.",
        "same with PUT chatter",
    )
    add("inst_p0", b"(S'echo FIXTURE-ONLY'\nios\nsystem\n.", "INST instantiation")
    add("obj_p0", b"(cos\nsystem\nS'echo FIXTURE-ONLY'\no.", "OBJ instantiation")
    def su(text: str) -> bytes:  # SHORT_BINUNICODE with computed length
        raw = text.encode("utf-8")
        return b"\x8c" + bytes([len(raw)]) + raw

    add(
        "stack_global_exec_p4",
        b"\x80\x04" + su("builtins") + su("exec") + b"\x93" + su("print('FIXTURE-ONLY')") + b"\x85R.",
        "builtins.exec via STACK_GLOBAL",
    )
    add(
        "runpy_payload_p4",
        b"\x80\x04" + su("runpy") + su("_run_code") + b"\x93" + su("print('FIXTURE-ONLY')\n") + b"\x85R.",
        "runpy._run_code carrier",
    )
    add(
        "newobj_p2",
        b"\x80\x02cbuiltins\nobject\n)\x81.",
        "NEWOBJ on builtins.object",
    )
    add(
        "newobj_ex_p4",
        b"\x80\x04\x8c\x08builtins\x8c\x06object\x93)}\x92.",
        "NEWOBJ_EX with empty kwargs",
    )
    add("persid_p0", b"Pexternal-weights\n.", "persistent id by name")
    add(
        "binpersid_p2",
        b"\x80\x02X\x03\x00\x00\x00keyQ.",
        "persistent id from stack",
    )
    add("ext1_p2", b"\x80\x02\x82\x01.", "extension registry code 1")
    add("dup_pop_p0", b"I5\n20.", "DUP then POP")
    add(
        "build_state_p2",
        b"\x80\x02cbuiltins\nobject\n)\x81}X\x01\x00\x00\x00xK\x01sb.",
        "BUILD with a state dict",
    )
    add(
        "proto0_string_quirks",
        b'S"double \'n single"\n.',
        "double-quoted STRING with inner quote",
    )
    add("long_trailer_p0", b"L123456789012345678901234567890L\n.", "LONG with L suffix")
    add("unicode_escape_p0", b"Vsnow \\u2603 man\n.", "UNICODE raw-unicode-escape arg")
    return fixtures


def main():
    fixtures = build_fixtures()
    import sys

    sys.path.insert(0, str(HERE.parent.parent / "src"))
    from hubscan.pickle_scan import disassemble_full

    out = []
    for fx in fixtures:
        data = bytes.fromhex(fx["hex"])
        ref = reference_tokens(data)
        dis = disassemble_full(data)
        mine = [[ins.offset, ins.opcode, repr(ins.arg)] for ins in dis.instructions]
        if mine != ref:
            for a, b in zip(mine, ref):
                marker = "  " if a == b else "->"
                print(f"{marker} {a!r}  vs  {b!r}")
            raise SystemExit(f"disassembler disagrees with pickletools on {fx['name']}")
        out.append({**fx, "tokens": ref})
    target = HERE / "pickle_fixtures.json"
    target.write_text(json.dumps(out, indent=1) + "\n")
    print(f"wrote {len(out)} fixtures to {target}")


if __name__ == "__main__":
    main()
