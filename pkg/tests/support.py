"""Shared helpers for the test suite (not collected by pytest)."""

import pickle
import random
from typing import List, Tuple

from hubscan.pickle_scan import Lift
from hubscan.pickle_scan.lift import UNSAFE_NODE_TYPES, iter_nodes

PROTOCOLS = (0, 1, 2, 3, 4, 5)


def random_benign_value(rng: random.Random, protocol: int, depth: int = 0):
    """A value whose pickle at `protocol` uses no class/callable opcodes.

    bytes below protocol 2 round-trip through _codecs.encode, sets below 4
    and bytearray below 5 through their constructors, so those kinds only
    appear where the native opcodes exist.
    """
    kinds = ["none", "bool", "int", "float", "str"]
    if protocol >= 2:
        kinds.append("bytes")
    if protocol >= 4:
        kinds += ["set", "frozenset"]
    if protocol >= 5:
        kinds.append("bytearray")
    if depth < 3:
        kinds += ["list", "tuple", "dict"]

    kind = rng.choice(kinds)
    if kind == "none":
        return None
    if kind == "bool":
        return rng.random() < 0.5
    if kind == "int":
        return rng.choice(
            [rng.randint(-255, 255), rng.randint(-(2**40), 2**40), rng.randint(-(2**80), 2**80)]
        )
    if kind == "float":
        return rng.uniform(-1e6, 1e6)
    if kind == "str":
        return "".join(rng.choice("abc ☃\U0001f600'\"\n") for _ in range(rng.randint(0, 12)))
    if kind == "bytes":
        return bytes(rng.randrange(256) for _ in range(rng.randint(0, 12)))
    if kind == "bytearray":
        return bytearray(rng.randrange(256) for _ in range(rng.randint(0, 12)))
    if kind == "set":
        return {rng.randint(0, 99) for _ in range(rng.randint(0, 4))}
    if kind == "frozenset":
        return frozenset(rng.randint(0, 99) for _ in range(rng.randint(0, 4)))
    if kind == "list":
        return [random_benign_value(rng, protocol, depth + 1) for _ in range(rng.randint(0, 4))]
    if kind == "tuple":
        return tuple(
            random_benign_value(rng, protocol, depth + 1) for _ in range(rng.randint(0, 4))
        )
    key_pool = ["k%d" % i for i in range(8)] + list(range(8))
    return {
        rng.choice(key_pool): random_benign_value(rng, protocol, depth + 1)
        for _ in range(rng.randint(0, 4))
    }


def benign_pickles(seed: int, count: int) -> List[Tuple[bytes, int]]:
    """`count` (stream, protocol) pairs of randomly generated benign values."""
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        protocol = rng.choice(PROTOCOLS)
        value = random_benign_value(rng, protocol)
        out.append((pickle.dumps(value, protocol=protocol), protocol))
    return out


def count_symbolic(lifted: Lift) -> int:
    """Symbolic (class/call/instance) nodes across root, memo and discards."""
    total = 0
    roots = [lifted.root] + list(lifted.memo.values()) + list(lifted.discarded)
    for root in roots:
        for node in iter_nodes(root):
            if isinstance(node, UNSAFE_NODE_TYPES):
                total += 1
    return total
