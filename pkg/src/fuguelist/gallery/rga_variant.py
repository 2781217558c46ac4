"""A non-interleaving RGA variant whose sibling order is not a total order.

Each insertion is a tuple (a, t, r, e): the character, its timestamp, the
reference element's timestamp and the timestamps of the siblings (same
reference element) visible when it was generated.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass


@dataclass(frozen=True)
class RgaVariantOp:
    char: str
    timestamp: int
    reference: int
    siblings: frozenset[int]


def precedes(op1: RgaVariantOp, op2: RgaVariantOp) -> bool:
    """Whether ``op1`` sorts before ``op2`` among siblings."""
    if op1.timestamp in op2.siblings:
        return True
    if op2.timestamp in op1.siblings:
        return False
    m1 = min({op1.timestamp} | (op1.siblings - op2.siblings))
    m2 = min({op2.timestamp} | (op2.siblings - op1.siblings))
    return m1 < m2


@dataclass(frozen=True)
class CycleReport:
    relation: frozenset[tuple[str, str]]
    cycle: tuple[str, ...]


def fig9_ops(te: int = 1, tc: int = 2, td: int = 3, tb: int = 4) -> dict[str, RgaVariantOp]:
    if not te < tc < td < tb:
        raise ValueError("the divergence needs t_e < t_c < t_d < t_b")
    ta = 0
    return {
        "e": RgaVariantOp("e", te, ta, frozenset()),
        "c": RgaVariantOp("c", tc, ta, frozenset()),
        "d": RgaVariantOp("d", td, ta, frozenset({te})),
        "b": RgaVariantOp("b", tb, ta, frozenset({tc, te})),
    }


def rga_variant_cycle_check() -> CycleReport:
    """Evaluate the sibling order on the four divergent inserts; return every
    ordered pair and one three-cycle."""
    ops = fig9_ops()
    rel = frozenset((x, y) for x, y in itertools.permutations(ops, 2) if precedes(ops[x], ops[y]))
    cycle: tuple[str, ...] = ()
    for x, y, z in itertools.permutations(sorted(ops), 3):
        if (x, y) in rel and (y, z) in rel and (z, x) in rel:
            cycle = (x, y, z)
            break
    if cycle:
        # start from the earliest timestamp
        k = min(range(3), key=lambda i: ops[cycle[i]].timestamp)
        cycle = cycle[k:] + cycle[:k]
    return CycleReport(rel, cycle)
