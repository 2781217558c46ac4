"""Dense identifiers: every element gets a rational number, the list is the
elements sorted by it, and the generating site breaks ties."""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Iterable

from ..errors import ProtocolError
from ..ids import TOMBSTONE, ElementId, replica_id

Allocator = Callable[[Fraction, Fraction], Fraction]


def midpoint(lo: Fraction, hi: Fraction) -> Fraction:
    return (lo + hi) / 2


class PinnedAllocator:
    """Hands out a fixed sequence of ids, checking each fits its gap."""

    def __init__(self, ids: Iterable[Fraction | str]) -> None:
        self._ids = [Fraction(i) for i in ids]
        self._next = 0

    def __call__(self, lo: Fraction, hi: Fraction) -> Fraction:
        if self._next >= len(self._ids):
            raise ValueError("pinned ids exhausted")
        v = self._ids[self._next]
        if not lo < v < hi:
            raise ValueError(f"pinned id {v} does not fit between {lo} and {hi}")
        self._next += 1
        return v


@dataclass(frozen=True)
class DenseId:
    number: Fraction
    site: bytes

    def key(self) -> tuple:
        return (self.number, self.site)


@dataclass(frozen=True)
class DenseInsert:
    id: ElementId
    pos: DenseId
    value: Any


@dataclass(frozen=True)
class DenseDelete:
    target: ElementId


class DenseIdReplica:
    def __init__(self, name: bytes | str, allocate: Allocator = midpoint) -> None:
        self.replica_id = replica_id(name)
        self.allocate = allocate
        self.counter = 0
        self.keys: list[tuple] = []
        self.items: list[tuple[ElementId, DenseId]] = []
        self.values: dict[ElementId, Any] = {}

    def insert(self, i: int, value: Any) -> DenseInsert:
        vis = [k for k, (e, _) in enumerate(self.items) if self.values[e] is not TOMBSTONE]
        lk = vis[i - 1] if i > 0 else -1
        lo = self.items[lk][1].number if lk >= 0 else Fraction(0)
        hi = self.items[lk + 1][1].number if lk + 1 < len(self.items) else Fraction(1)
        pos = DenseId(self.allocate(lo, hi), self.replica_id)
        msg = DenseInsert(ElementId(self.replica_id, self.counter), pos, value)
        self.counter += 1
        self._place(msg)
        return msg

    def delete(self, i: int) -> DenseDelete:
        vis = [e for e, _ in self.items if self.values[e] is not TOMBSTONE]
        self.values[vis[i]] = TOMBSTONE
        return DenseDelete(vis[i])

    def _place(self, msg: DenseInsert) -> None:
        k = msg.pos.key()
        at = bisect.bisect_left(self.keys, k)
        self.keys.insert(at, k)
        self.items.insert(at, (msg.id, msg.pos))
        self.values[msg.id] = msg.value

    def apply(self, msg: DenseInsert | DenseDelete) -> None:
        if isinstance(msg, DenseDelete):
            if msg.target not in self.values:
                raise ProtocolError(f"delete target {msg.target!r} unknown")
            self.values[msg.target] = TOMBSTONE
        else:
            self._place(msg)

    def entries(self) -> list[tuple[ElementId, Any]]:
        return [(e, self.values[e]) for e, _ in self.items]

    def text(self) -> str:
        return "".join(str(v) for _, v in self.entries() if v is not TOMBSTONE)


# ids shown in the rational-number interleaving figure, per replica
FIG1_IDS = {
    b"O": ["0.21", "0.32", "0.46", "0.66", "0.91"],
    b"A": ["0.70", "0.74", "0.79", "0.83", "0.86"],
    b"B": ["0.72", "0.75", "0.77", "0.80", "0.84", "0.88"],
}
