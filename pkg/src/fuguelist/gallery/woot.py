"""WOOT: each character remembers the characters it was inserted between.

Remote insertions are placed by the recursive IntegrateIns narrowing. Ids
compare by (clock, site), which realizes the ordering the interleaving
example assumes (a <id x <id b when A's a and B's x share clock 1).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from ..errors import ProtocolError
from ..ids import TOMBSTONE, ElementId, replica_id

BEGIN = "c_b"
FINISH = "c_e"


@dataclass(frozen=True)
class WootChar:
    id: ElementId
    value: Any
    prev: ElementId | str
    next: ElementId | str


@dataclass(frozen=True)
class WootDelete:
    target: ElementId


def id_key(i: ElementId) -> tuple[int, bytes]:
    return (i.counter, i.replica)


class WootReplica:
    def __init__(self, name: bytes | str) -> None:
        self.replica_id = replica_id(name)
        self.counter = 0
        # sequence including both sentinels
        self.seq: list[ElementId | str] = [BEGIN, FINISH]
        self.chars: dict[ElementId, WootChar] = {}
        self.visible: dict[ElementId, bool] = {}

    def _pos(self, i: ElementId | str) -> int:
        return self.seq.index(i)

    def _visible_at(self, i: int) -> int:
        seen = -1
        for k, e in enumerate(self.seq):
            if e not in (BEGIN, FINISH) and self.visible[e]:
                seen += 1
                if seen == i:
                    return k
        raise IndexError(f"index {i} out of range")

    def insert(self, i: int, value: Any) -> WootChar:
        prev = self.seq[self._visible_at(i - 1)] if i > 0 else BEGIN
        after = self._pos(prev) + 1
        # the next visible character, or the end
        nxt: ElementId | str = FINISH
        for e in self.seq[after:]:
            if e == FINISH or self.visible[e]:
                nxt = e
                break
        char = WootChar(ElementId(self.replica_id, self.counter), value, prev, nxt)
        self.counter += 1
        self.integrate(char)
        return char

    def delete(self, i: int) -> WootDelete:
        target = self.seq[self._visible_at(i)]
        self.visible[target] = False
        return WootDelete(target)

    def apply(self, msg: WootChar | WootDelete) -> None:
        if isinstance(msg, WootDelete):
            if msg.target not in self.visible:
                raise ProtocolError(f"delete target {msg.target!r} unknown")
            self.visible[msg.target] = False
            return
        for ref in (msg.prev, msg.next):
            if ref not in (BEGIN, FINISH) and ref not in self.chars:
                raise ProtocolError(f"{msg.id!r} depends on undelivered {ref!r}")
        self.integrate(msg)

    def integrate(self, char: WootChar) -> None:
        self.chars[char.id] = char
        self.visible[char.id] = True
        self._integrate(char, char.prev, char.next)

    def _integrate(self, char: WootChar, prev, nxt) -> None:
        lo, hi = self._pos(prev), self._pos(nxt)
        between = self.seq[lo + 1:hi]
        if not between:
            self.seq.insert(hi, char.id)
            return
        narrowed = [prev] + [d for d in between
                             if self._pos(self.chars[d].prev) <= lo and self._pos(self.chars[d].next) >= hi] + [nxt]
        k = 1
        key = id_key(char.id)
        while k < len(narrowed) - 1 and id_key(narrowed[k]) < key:
            k += 1
        self._integrate(char, narrowed[k - 1], narrowed[k])

    def entries(self) -> list[tuple[ElementId, Any]]:
        return [(e, self.chars[e].value if self.visible[e] else TOMBSTONE)
                for e in self.seq[1:-1]]

    def text(self) -> str:
        return "".join(str(v) for _, v in self.entries() if v is not TOMBSTONE)


def woot_integrate(char: WootChar, prev, nxt, state: WootReplica) -> WootReplica:
    """Place ``char`` between ``prev`` and ``nxt`` in ``state`` (in place)."""
    state.chars[char.id] = char
    state.visible[char.id] = True
    state._integrate(char, prev, nxt)
    return state
