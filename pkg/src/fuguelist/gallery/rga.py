"""RGA with s4vector ids.

A new element goes right after its left cobject, skipping any successors
whose s4vector is greater. The s4vector compares session, then the sum of
the generating vector clock, then site.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from ..errors import ProtocolError
from ..ids import TOMBSTONE, ElementId, replica_id


@dataclass(frozen=True, order=False)
class S4Vector:
    session: int
    site: bytes
    sum: int
    seq: int
    # pinned site priority; replaces the site name in comparisons
    rank: int = 0

    def key(self) -> tuple:
        return (self.session, self.sum, self.rank, self.site)

    def __lt__(self, other: "S4Vector") -> bool:
        return self.key() < other.key()

    def __gt__(self, other: "S4Vector") -> bool:
        return self.key() > other.key()

    def __repr__(self) -> str:
        return f"<{self.session},{self.site.decode(errors='replace')},{self.seq},{self.sum}>"


@dataclass(frozen=True)
class RgaInsert:
    id: ElementId
    s4v: S4Vector
    left: ElementId | None
    value: Any
    clock: tuple[tuple[bytes, int], ...]


@dataclass(frozen=True)
class RgaDelete:
    target: ElementId


class RgaReplica:
    def __init__(self, name: bytes | str, session: int = 0,
                 site_rank: dict[bytes, int] | None = None) -> None:
        self.replica_id = replica_id(name)
        self.session = session
        self.ranks = site_rank or {}
        self.clock: dict[bytes, int] = {}
        self.counter = 0
        self.order: list[ElementId] = []
        self.s4v: dict[ElementId, S4Vector] = {}
        self.values: dict[ElementId, Any] = {}

    def insert(self, i: int, value: Any) -> RgaInsert:
        vis = [e for e in self.order if self.values[e] is not TOMBSTONE]
        left = vis[i - 1] if i > 0 else None
        self.clock[self.replica_id] = self.clock.get(self.replica_id, 0) + 1
        seq = self.clock[self.replica_id]
        s4v = S4Vector(self.session, self.replica_id, sum(self.clock.values()), seq,
                       self.ranks.get(self.replica_id, 0))
        msg = RgaInsert(ElementId(self.replica_id, self.counter), s4v, left, value,
                        tuple(sorted(self.clock.items())))
        self.counter += 1
        self._place(msg)
        return msg

    def delete(self, i: int) -> RgaDelete:
        vis = [e for e in self.order if self.values[e] is not TOMBSTONE]
        self.values[vis[i]] = TOMBSTONE
        self.clock[self.replica_id] = self.clock.get(self.replica_id, 0) + 1
        return RgaDelete(vis[i])

    def _place(self, msg: RgaInsert) -> None:
        if msg.left is None:
            k = 0
        else:
            if msg.left not in self.values:
                raise ProtocolError(f"left cobject {msg.left!r} of {msg.id!r} unknown")
            k = self.order.index(msg.left) + 1
        while k < len(self.order) and self.s4v[self.order[k]] > msg.s4v:
            k += 1
        self.order.insert(k, msg.id)
        self.s4v[msg.id] = msg.s4v
        self.values[msg.id] = msg.value

    def apply(self, msg: RgaInsert | RgaDelete) -> None:
        if isinstance(msg, RgaDelete):
            if msg.target not in self.values:
                raise ProtocolError(f"delete target {msg.target!r} unknown")
            self.values[msg.target] = TOMBSTONE
            return
        self._place(msg)
        for site, n in msg.clock:
            self.clock[site] = max(self.clock.get(site, 0), n)

    def entries(self) -> list[tuple[ElementId, Any]]:
        return [(e, self.values[e]) for e in self.order]

    def text(self) -> str:
        return "".join(str(v) for _, v in self.entries() if v is not TOMBSTONE)
