"""Symbolic lift: the flag/lift equivalence and unsafe-opcode coverage.

The central invariant: find_unsafe_opcodes returns nothing for a stream
if and only if its lift contains no class-reference, call, or instance
nodes anywhere (root, memo table, or discarded values).
"""

import pickle

import pytest

from hubscan.pickle_scan import (
    LiftError,
    StackUnderflow,
    UnbalancedMark,
    UnboundMemo,
    disassemble,
    find_unsafe_opcodes,
    lift_full,
)
from hubscan.pickle_scan.lift import Call, Literal, MemoRef, SymbolRef, iter_nodes

from tests.support import benign_pickles, count_symbolic

UNSAFE_CLASS_FIXTURES = {
    "global_reduce_p0": {"GLOBAL", "REDUCE"},
    "inst_p0": {"INST"},
    "obj_p0": {"OBJ"},
    "newobj_p2": {"NEWOBJ"},
    "newobj_ex_p4": {"NEWOBJ_EX"},
    "stack_global_exec_p4": {"STACK_GLOBAL"},
}

LITERAL_FIXTURES = [
    "none_p2",
    "int_small_p0",
    "str_plain_p4",
    "list_flat_p2",
    "dict_nested_p4",
    "tuple1_p2",
    "memo_shared_p2",
    "set_p4",
    "bytearray_p5",
]


def flags_for(data: bytes):
    return find_unsafe_opcodes(disassemble(data))


def test_each_unsafe_opcode_class_triggers(pickle_fixtures):
    for name, expected_ops in UNSAFE_CLASS_FIXTURES.items():
        data = bytes.fromhex(pickle_fixtures[name]["hex"])
        hit_ops = {instr.opcode for instr, _why in flags_for(data)}
        assert expected_ops <= hit_ops, name


def test_literal_fixtures_trigger_nothing(pickle_fixtures):
    for name in LITERAL_FIXTURES:
        data = bytes.fromhex(pickle_fixtures[name]["hex"])
        assert flags_for(data) == [], name
        assert count_symbolic(lift_full(disassemble(data))) == 0, name


def test_flag_lift_equivalence_random_benign():
    for data, _protocol in benign_pickles(seed=7, count=300):
        instrs = disassemble(data)
        flagged = bool(find_unsafe_opcodes(instrs))
        symbolic = count_symbolic(lift_full(instrs)) > 0
        assert flagged == symbolic, data.hex()


def test_flag_lift_equivalence_on_malicious_fixtures(pickle_fixtures):
    for name in UNSAFE_CLASS_FIXTURES:
        instrs = disassemble(bytes.fromhex(pickle_fixtures[name]["hex"]))
        assert find_unsafe_opcodes(instrs)
        assert count_symbolic(lift_full(instrs)) > 0, name


def test_proto0_bytes_quirk():
    # protocol-0 bytes round-trip through _codecs.encode: flagged, and the
    # lift shows the call, so the equivalence holds with both sides true
    instrs = disassemble(pickle.dumps(b"payload", protocol=0))
    flagged = {i.opcode for i, _ in find_unsafe_opcodes(instrs)}
    assert flagged == {"GLOBAL", "REDUCE"}
    lifted = lift_full(instrs)
    calls = [n for n in iter_nodes(lifted.root) if isinstance(n, Call)]
    assert calls and isinstance(calls[0].callee, SymbolRef)
    assert (calls[0].callee.module, calls[0].callee.name) == ("_codecs", "encode")


def test_reduce_call_shape(pickle_fixtures):
    data = bytes.fromhex(pickle_fixtures["global_reduce_p0"]["hex"])
    lifted = lift_full(disassemble(data))
    assert isinstance(lifted.root, Call)
    callee = lifted.root.callee
    assert (callee.module, callee.name) == ("os", "system")
    (arg,) = lifted.root.args[0].items if hasattr(lifted.root.args[0], "items") else lifted.root.args
    assert "echo" in repr(arg)


def test_memo_sharing_lifts_to_memoref(pickle_fixtures):
    data = bytes.fromhex(pickle_fixtures["memo_shared_p2"]["hex"])
    lifted = lift_full(disassemble(data))
    refs = [n for n in iter_nodes(lifted.root) if isinstance(n, MemoRef)]
    assert refs, "shared substructure should appear as MemoRef"
    for ref in refs:
        assert ref.index in lifted.memo


def test_recursive_pickle_stays_acyclic(pickle_fixtures):
    data = bytes.fromhex(pickle_fixtures["recursive_list_p0"]["hex"])
    lifted = lift_full(disassemble(data))
    # full walk terminates because MemoRef is a leaf
    assert sum(1 for _ in iter_nodes(lifted.root)) < 100


def test_discarded_values_are_retained(pickle_fixtures):
    data = bytes.fromhex(pickle_fixtures["dup_pop_p0"]["hex"])
    lifted = lift_full(disassemble(data))
    assert lifted.discarded


def test_stack_underflow():
    with pytest.raises(StackUnderflow):
        lift_full(disassemble(b"."))


def test_unbalanced_mark():
    with pytest.raises(LiftError):
        lift_full(disassemble(b"(."))


def test_unbound_memo_get():
    with pytest.raises(UnboundMemo):
        lift_full(disassemble(b"h\x00."))


def test_benign_lift_roundtrip_values():
    # lifted literals mirror the original value for simple cases
    for value in (None, True, 42, "text", [1, 2], {"k": (1, 2)}):
        lifted = lift_full(disassemble(pickle.dumps(value, protocol=4)))
        assert count_symbolic(lifted) == 0
        if isinstance(value, (type(None), bool, int, str)):
            assert isinstance(lifted.root, Literal)
            assert lifted.root.value == value
