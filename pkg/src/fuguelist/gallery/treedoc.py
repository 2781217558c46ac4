"""Treedoc: positions are paths in a binary tree, read in infix order.

A path is a run of bare child bits ending in one step that lands in a
mini-node ``(bit:disambiguator)``. Mini-nodes sharing a major node sort by
disambiguator, between that node's left and right subtrees. Only the
allocations the interleaving scripts need are supported: a new position is
a child of the major node of a neighbour, never a child of a mini-node.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import Any, Sequence

from ..errors import FugueError, ProtocolError
from ..ids import TOMBSTONE, ElementId, replica_id

Step = tuple[int, Any]  # (bit, disambiguator or None for a bare step)


@dataclass(frozen=True)
class TreedocPos:
    steps: tuple[Step, ...]

    def __post_init__(self) -> None:
        if not self.steps or self.steps[-1][1] is None or any(d is not None for _, d in self.steps[:-1]):
            raise ValueError(f"malformed path {self.steps!r}")

    @property
    def major(self) -> tuple[int, ...]:
        return tuple(b for b, _ in self.steps)

    def key(self) -> tuple:
        out = [(0,) if b == 0 else (2,) for b, _ in self.steps]
        out.append((1, self.steps[-1][1]))
        return tuple(out)

    def __lt__(self, other: "TreedocPos") -> bool:
        return self.key() < other.key()

    def __repr__(self) -> str:
        *bare, (b, d) = self.steps
        return "[" + "".join(str(x) for x, _ in bare) + f"({b}:{d})]"


def path(major: Sequence[int], d: Any) -> TreedocPos:
    return TreedocPos(tuple((b, None) for b in major[:-1]) + ((major[-1], d),))


@dataclass(frozen=True)
class TreedocInsert:
    id: ElementId
    pos: TreedocPos
    value: Any


@dataclass(frozen=True)
class TreedocDelete:
    target: ElementId


class TreedocReplica:
    """``root_bit`` picks the first position in an empty document; ``site_rank``
    orders replicas inside disambiguators (default: by name)."""

    def __init__(self, name: bytes | str, root_bit: int = 1,
                 site_rank: dict[bytes, int] | None = None) -> None:
        self.replica_id = replica_id(name)
        self.root_bit = root_bit
        self.rank = (site_rank or {}).get(self.replica_id, 0)
        self.counter = 0
        self.keys: list[tuple] = []
        self.items: list[tuple[ElementId, TreedocPos]] = []
        self.values: dict[ElementId, Any] = {}

    def disambiguator(self) -> tuple:
        return (self.counter, self.rank, self.replica_id)

    def _allocate(self, i: int) -> TreedocPos:
        d = self.disambiguator()
        vis = [k for k, (e, _) in enumerate(self.items) if self.values[e] is not TOMBSTONE]
        left = self.items[vis[i - 1]][1] if i > 0 else None
        lk = vis[i - 1] if i > 0 else -1
        right = self.items[lk + 1][1] if lk + 1 < len(self.items) else None
        if left is None and right is None:
            return path((self.root_bit,), d)
        if left is None:
            return path(right.major + (0,), d)
        if right is None:
            return path(left.major + (1,), d)
        cand = path(left.major + (1,), d)
        if cand < right:
            return cand
        if right.major[:len(left.major) + 1] == left.major + (1,):
            return path(left.major + (1,) + (0,) * (len(right.major) - len(left.major)), d)
        cand = path(right.major + (0,), d)
        if left < cand:
            return cand
        raise FugueError("no free position between sibling mini-nodes in this minimal Treedoc")

    def _place(self, e: ElementId, pos: TreedocPos, value: Any) -> None:
        k = pos.key()
        at = bisect.bisect_left(self.keys, k)
        if at < len(self.keys) and self.keys[at] == k:
            raise ProtocolError(f"position {pos!r} already taken")
        self.keys.insert(at, k)
        self.items.insert(at, (e, pos))
        self.values[e] = value

    def insert(self, i: int, value: Any) -> TreedocInsert:
        pos = self._allocate(i)
        msg = TreedocInsert(ElementId(self.replica_id, self.counter), pos, value)
        self.counter += 1
        self._place(msg.id, pos, value)
        return msg

    def delete(self, i: int) -> TreedocDelete:
        vis = [e for e, _ in self.items if self.values[e] is not TOMBSTONE]
        self.values[vis[i]] = TOMBSTONE
        return TreedocDelete(vis[i])

    def apply(self, msg: TreedocInsert | TreedocDelete) -> None:
        if isinstance(msg, TreedocDelete):
            if msg.target not in self.values:
                raise ProtocolError(f"delete target {msg.target!r} unknown")
            self.values[msg.target] = TOMBSTONE
        else:
            self._place(msg.id, msg.pos, msg.value)

    def entries(self) -> list[tuple[ElementId, Any]]:
        return [(e, self.values[e]) for e, _ in self.items]

    def positions(self) -> list[TreedocPos]:
        return [p for _, p in self.items]

    def text(self) -> str:
        return "".join(str(v) for _, v in self.entries() if v is not TOMBSTONE)
