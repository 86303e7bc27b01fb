"""Symbolic execution of the pickle stack machine.

Runs the instruction stream against a shadow stack, producing a tree of
SymbolicValue nodes instead of real objects.  Nothing is ever imported,
instantiated, or called: GLOBAL becomes a SymbolRef node, REDUCE becomes
a Call node wrapping its callee and arguments, and so on.

Memo-induced sharing is materialized through MemoRef leaves that index
into the lift's memo table, so the ownership tree stays acyclic even for
self-referential pickles.  Values removed from the stack (POP, BINPERSID
and friends) are retained on a discard list: a scanner must not lose
sight of a payload just because the stream popped it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

from hubscan.pickle_scan.disasm import PickleInstruction


class LiftError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class StackUnderflow(LiftError):
    def __init__(self, offset: int):
        super().__init__("stack underflow", offset)


class UnbalancedMark(LiftError):
    def __init__(self, offset: int):
        super().__init__("no MARK on stack for mark-consuming opcode", offset)


class UnboundMemo(LiftError):
    def __init__(self, index: object, offset: int):
        super().__init__(f"GET of memo slot {index!r} before PUT", offset)
        self.index = index


@dataclass(frozen=True)
class Literal:
    value: object
    offset: int = -1


@dataclass(frozen=True)
class SymbolRef:
    module: str
    name: str
    offset: int = -1


@dataclass(frozen=True)
class Call:
    callee: "SymbolicValue"
    args: Tuple["SymbolicValue", ...]
    offset: int = -1


@dataclass
class Container:
    kind: str  # list | tuple | dict | set
    items: List["SymbolicValue"] = field(default_factory=list)
    offset: int = -1


@dataclass
class Instance:
    cls: "SymbolicValue"
    args: Tuple["SymbolicValue", ...] = ()
    state: Optional["SymbolicValue"] = None
    offset: int = -1


@dataclass(frozen=True)
class Opaque:
    reason: str
    offset: int = -1


@dataclass(frozen=True)
class MemoRef:
    index: object
    offset: int = -1


SymbolicValue = Union[Literal, SymbolRef, Call, Container, Instance, Opaque, MemoRef]

# Tree nodes whose presence implies an unsafe opcode appeared in the stream.
UNSAFE_NODE_TYPES = (SymbolRef, Call, Instance)


@dataclass
class Lift:
    root: SymbolicValue
    memo: Dict[object, SymbolicValue]
    discarded: List[SymbolicValue]
    warnings: List[str]


def iter_nodes(value: SymbolicValue) -> Iterator[SymbolicValue]:
    """Depth-first walk of one value tree.  MemoRef is a leaf."""
    stack = [value]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, Call):
            stack.append(node.callee)
            stack.extend(node.args)
        elif isinstance(node, Container):
            stack.extend(node.items)
        elif isinstance(node, Instance):
            stack.append(node.cls)
            stack.extend(node.args)
            if node.state is not None:
                stack.append(node.state)


def iter_all(result: Lift) -> Iterator[SymbolicValue]:
    """Walk everything the lift saw: root, memo table, discarded values."""
    yield from iter_nodes(result.root)
    for value in result.memo.values():
        yield from iter_nodes(value)
    for value in result.discarded:
        yield from iter_nodes(value)


def has_unsafe_nodes(result: Lift) -> bool:
    return any(isinstance(n, UNSAFE_NODE_TYPES) for n in iter_all(result))


class _Mark:
    __slots__ = ()

    def __repr__(self):
        return "<mark>"


_MARK = _Mark()


def _is_mutable(value: SymbolicValue) -> bool:
    return isinstance(value, (Container, Instance))


def _subtree_has_unsafe(*values: SymbolicValue) -> bool:
    return any(
        isinstance(node, UNSAFE_NODE_TYPES)
        for value in values
        for node in iter_nodes(value)
    )


class _Machine:
    def __init__(self) -> None:
        self.stack: List[object] = []
        self.memo: Dict[object, SymbolicValue] = {}
        self.discarded: List[SymbolicValue] = []
        self.warnings: List[str] = []

    # ---- stack primitives -------------------------------------------------

    def push(self, value: object) -> None:
        self.stack.append(value)

    def pop(self, offset: int) -> SymbolicValue:
        if not self.stack:
            raise StackUnderflow(offset)
        top = self.stack.pop()
        if top is _MARK:
            raise UnbalancedMark(offset)
        return top  # type: ignore[return-value]

    def peek(self, offset: int) -> SymbolicValue:
        if not self.stack:
            raise StackUnderflow(offset)
        top = self.stack[-1]
        if top is _MARK:
            raise UnbalancedMark(offset)
        return top  # type: ignore[return-value]

    def pop_to_mark(self, offset: int) -> List[SymbolicValue]:
        try:
            mark_at = len(self.stack) - 1 - self.stack[::-1].index(_MARK)
        except ValueError:
            raise UnbalancedMark(offset) from None
        items = self.stack[mark_at + 1 :]
        del self.stack[mark_at:]
        return items  # type: ignore[return-value]

    # ---- memo handling ----------------------------------------------------

    def resolve(self, value: SymbolicValue) -> SymbolicValue:
        if isinstance(value, MemoRef):
            return self.memo[value.index]
        return value

    def memo_put(self, index: object, offset: int) -> None:
        top = self.peek(offset)
        if isinstance(top, MemoRef):
            # re-memoizing a shared value: alias the slot
            self.memo[index] = self.memo[top.index]
            return
        self.memo[index] = top
        if _is_mutable(top):
            # single owner is the memo table; the stack holds a reference
            self.stack[-1] = MemoRef(index, offset)

    def memo_get(self, index: object, offset: int) -> None:
        if index not in self.memo:
            raise UnboundMemo(index, offset)
        value = self.memo[index]
        self.push(MemoRef(index, offset) if _is_mutable(value) else value)

    # ---- container mutation ----------------------------------------------

    def mutate_target(self, offset: int, kinds: Tuple[str, ...]) -> Optional[Container]:
        """Resolve the stack top to a Container of an expected kind.

        Returns None (and degrades the target to Opaque) when the stream
        applies a container op to something we cannot model.
        """
        top = self.peek(offset)
        target = self.resolve(top)
        if isinstance(target, Container) and target.kind in kinds:
            return target
        self.stack[-1] = Opaque("container-op-on-non-container", offset)
        self.discarded.append(top)
        return None


def _as_tuple_args(machine: _Machine, value: SymbolicValue) -> Tuple[SymbolicValue, ...]:
    resolved = machine.resolve(value)
    if isinstance(resolved, Container) and resolved.kind == "tuple":
        return tuple(resolved.items)
    return (value,)


def _ref_from_pair(arg: object, offset: int) -> SymbolRef:
    module, _, name = str(arg).partition(" ")
    return SymbolRef(module, name, offset)


def _as_name(machine: _Machine, value: SymbolicValue) -> str:
    resolved = machine.resolve(value)
    if isinstance(resolved, Literal) and isinstance(resolved.value, str):
        return resolved.value
    return "<dynamic>"


def lift_full(instrs: Sequence[PickleInstruction]) -> Lift:
    m = _Machine()
    root: Optional[SymbolicValue] = None

    for ins in instrs:
        op = ins.opcode
        at = ins.offset

        if op in ("PROTO", "FRAME"):
            continue

        if op == "STOP":
            root = m.pop(at)
            break

        # literals
        if op in ("NONE",):
            m.push(Literal(None, at))
        elif op == "NEWTRUE":
            m.push(Literal(True, at))
        elif op == "NEWFALSE":
            m.push(Literal(False, at))
        elif op in (
            "INT", "BININT", "BININT1", "BININT2", "LONG", "LONG1", "LONG4",
            "FLOAT", "BINFLOAT",
            "STRING", "BINSTRING", "SHORT_BINSTRING",
            "UNICODE", "BINUNICODE", "SHORT_BINUNICODE", "BINUNICODE8",
            "BINBYTES", "SHORT_BINBYTES", "BINBYTES8", "BYTEARRAY8",
        ):
            m.push(Literal(ins.arg, at))

        # globals and calls
        elif op == "GLOBAL":
            m.push(_ref_from_pair(ins.arg, at))
        elif op == "STACK_GLOBAL":
            name = _as_name(m, m.pop(at))
            module = _as_name(m, m.pop(at))
            m.push(SymbolRef(module, name, at))
        elif op == "REDUCE":
            argtuple = m.pop(at)
            callee = m.pop(at)
            m.push(Call(callee, _as_tuple_args(m, argtuple), at))
        elif op == "NEWOBJ":
            argtuple = m.pop(at)
            cls = m.pop(at)
            m.push(Instance(cls, _as_tuple_args(m, argtuple), None, at))
        elif op == "NEWOBJ_EX":
            kwargs = m.pop(at)
            argtuple = m.pop(at)
            cls = m.pop(at)
            args = _as_tuple_args(m, argtuple) + (kwargs,)
            m.push(Instance(cls, args, None, at))
        elif op == "OBJ":
            items = m.pop_to_mark(at)
            if not items:
                raise StackUnderflow(at)
            m.push(Instance(items[0], tuple(items[1:]), None, at))
        elif op == "INST":
            items = m.pop_to_mark(at)
            m.push(Instance(_ref_from_pair(ins.arg, at), tuple(items), None, at))
        elif op == "BUILD":
            state = m.pop(at)
            obj = m.pop(at)
            target = m.resolve(obj)
            if isinstance(target, Instance):
                if target.state is None:
                    target.state = state
                else:
                    target.state = Container("tuple", [target.state, state], at)
                m.push(obj)
            elif _subtree_has_unsafe(target, state):
                # setstate on a call result or other unsafe-derived value:
                # keep both subtrees reachable
                m.push(Instance(obj, (), state, at))
            else:
                m.discarded.extend((obj, state))
                m.push(Opaque("build-on-literal", at))

        # containers
        elif op == "EMPTY_LIST":
            m.push(Container("list", [], at))
        elif op == "EMPTY_TUPLE":
            m.push(Container("tuple", [], at))
        elif op == "EMPTY_DICT":
            m.push(Container("dict", [], at))
        elif op == "EMPTY_SET":
            m.push(Container("set", [], at))
        elif op == "LIST":
            m.push(Container("list", m.pop_to_mark(at), at))
        elif op == "TUPLE":
            m.push(Container("tuple", m.pop_to_mark(at), at))
        elif op in ("TUPLE1", "TUPLE2", "TUPLE3"):
            n = int(op[-1])
            items = [m.pop(at) for _ in range(n)]
            m.push(Container("tuple", items[::-1], at))
        elif op == "DICT":
            m.push(Container("dict", m.pop_to_mark(at), at))
        elif op == "FROZENSET":
            m.push(Container("set", m.pop_to_mark(at), at))
        elif op == "APPEND":
            value = m.pop(at)
            target = m.mutate_target(at, ("list",))
            if target is not None:
                target.items.append(value)
            else:
                m.discarded.append(value)
        elif op == "APPENDS":
            items = m.pop_to_mark(at)
            target = m.mutate_target(at, ("list",))
            if target is not None:
                target.items.extend(items)
            else:
                m.discarded.extend(items)
        elif op == "SETITEM":
            value = m.pop(at)
            key = m.pop(at)
            target = m.mutate_target(at, ("dict",))
            if target is not None:
                target.items.extend((key, value))
            else:
                m.discarded.extend((key, value))
        elif op == "SETITEMS":
            items = m.pop_to_mark(at)
            target = m.mutate_target(at, ("dict",))
            if target is not None:
                target.items.extend(items)
            else:
                m.discarded.extend(items)
        elif op == "ADDITEMS":
            items = m.pop_to_mark(at)
            target = m.mutate_target(at, ("set",))
            if target is not None:
                target.items.extend(items)
            else:
                m.discarded.extend(items)

        # stack plumbing
        elif op == "MARK":
            m.push(_MARK)
        elif op == "POP":
            if m.stack and m.stack[-1] is _MARK:
                m.stack.pop()
            else:
                m.discarded.append(m.pop(at))
        elif op == "POP_MARK":
            m.discarded.extend(m.pop_to_mark(at))
        elif op == "DUP":
            m.push(m.peek(at))

        # memo
        elif op in ("PUT", "BINPUT", "LONG_BINPUT"):
            m.memo_put(ins.arg, at)
        elif op == "MEMOIZE":
            m.memo_put(len(m.memo), at)
        elif op in ("GET", "BINGET", "LONG_BINGET"):
            m.memo_get(ins.arg, at)

        # constructs we acknowledge but do not model
        elif op == "PERSID":
            m.push(Opaque("persistent-id", at))
        elif op == "BINPERSID":
            m.discarded.append(m.pop(at))
            m.push(Opaque("persistent-id", at))
        elif op in ("EXT1", "EXT2", "EXT4"):
            m.push(Opaque("extension-registry", at))
        elif op == "NEXT_BUFFER":
            m.push(Opaque("out-of-band-buffer", at))
        elif op == "READONLY_BUFFER":
            m.peek(at)  # top stays as-is
        else:
            m.push(Opaque(f"unmodeled-opcode-{op}", at))

    if root is None:
        # pre is "instrs ends with STOP", but degrade gracefully
        m.warnings.append("no STOP instruction; lifted value is opaque")
        root = Opaque("missing-stop", instrs[-1].offset if instrs else 0)

    leftovers = [v for v in m.stack if v is not _MARK]
    if leftovers:
        m.warnings.append(f"{len(leftovers)} value(s) left on stack after STOP")
        m.discarded.extend(leftovers)  # type: ignore[arg-type]
    if any(v is _MARK for v in m.stack):
        m.warnings.append("unconsumed MARK left on stack after STOP")

    return Lift(root=root, memo=m.memo, discarded=m.discarded, warnings=m.warnings)


def lift(instrs: Sequence[PickleInstruction]) -> SymbolicValue:
    """Lift an instruction list to the value left on top of the stack."""
    return lift_full(instrs).root
