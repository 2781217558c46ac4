"""Fugue and FugueMax replicas: local generators and remote effectors.

Both variants share the tree shape. They differ only in how a new right child
is ordered among existing right siblings: Fugue sorts every sibling list by
id, while FugueMax tags each right child with its right origin and sorts right
siblings by reverse list order of those right origins (ties broken by id).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Any, Sequence, Union

from . import core
from .errors import ProtocolError
from .ids import END, ROOT, TOMBSTONE, ElementId, NodeRef, Side, replica_id
from .tree import Tree


class Variant(str, enum.Enum):
    FUGUE = "fugue"
    FUGUEMAX = "fuguemax"


@dataclass(frozen=True, slots=True)
class InsertOp:
    id: ElementId
    value: Any
    parent: NodeRef
    side: Side
    # FugueMax right children only
    right_origin: NodeRef | None = None


@dataclass(frozen=True, slots=True)
class DeleteOp:
    target: ElementId


OpMessage = Union[InsertOp, DeleteOp]


class Replica:
    """One replica's CRDT state.

    ``insert`` and ``delete`` apply the operation locally and return the
    message to broadcast; ``apply`` delivers a message from elsewhere.
    """

    def __init__(self, name: bytes | str, variant: Variant | str = Variant.FUGUE,
                 kernel: str | None = None) -> None:
        self.replica_id = replica_id(name)
        self.variant = Variant(variant)
        self.tree = Tree(kernel)
        self.counter = 0
        self._rep = self.tree.replica_index(self.replica_id)

    def __repr__(self) -> str:
        return f"Replica({self.replica_id!r}, {self.variant.value}, {self.tree.visible_count} visible)"

    # -- generators -----------------------------------------------------------

    def insert(self, i: int, value: Any) -> InsertOp:
        if value is TOMBSTONE:
            raise ValueError("cannot insert the tombstone marker")
        tree = self.tree
        kc = tree.core
        # The placement rule always yields an only child on its side (a right
        # child of a node with none, or a left child of the first node of a
        # right subtree), so the sibling order never comes into play here.
        h = kc.insert_at(i, self.variant is Variant.FUGUEMAX)
        new_id = ElementId(self.replica_id, self.counter)
        tree._register(h, self._rep, self.counter, value)
        self.counter += 1
        side = Side(kc.side(h))
        ro = kc.right_origin(h)
        return InsertOp(new_id, value, tree.ref(kc.parent(h)), side,
                        None if ro == core.NONE else tree.ref(ro))

    def delete(self, i: int) -> DeleteOp:
        h = self.tree.core.delete_at(i)
        self.tree._values[h] = TOMBSTONE
        return DeleteOp(self.tree.ref(h))

    # -- effectors ------------------------------------------------------------

    def apply(self, msg: OpMessage) -> None:
        if isinstance(msg, InsertOp):
            self._apply_insert(msg)
        elif isinstance(msg, DeleteOp):
            self._apply_delete(msg)
        else:
            raise TypeError(f"not an operation message: {msg!r}")

    def _apply_insert(self, msg: InsertOp) -> None:
        tree = self.tree
        if not isinstance(msg.id, ElementId) or msg.id.counter < 0:
            raise ProtocolError(f"invalid element id {msg.id!r}")
        if msg.value is TOMBSTONE:
            raise ProtocolError(f"insert of {msg.id!r} carries no value")
        if msg.id in tree:
            raise ProtocolError(f"duplicate delivery of insert {msg.id!r}")
        side = Side(msg.side)
        parent = tree.lookup(msg.parent) if msg.parent is ROOT or isinstance(msg.parent, ElementId) else -1
        if parent < 0:
            raise ProtocolError(f"parent {msg.parent!r} of {msg.id!r} has not been delivered")
        ro = core.NONE
        if self.variant is Variant.FUGUEMAX and side is Side.R:
            if msg.right_origin is None:
                raise ProtocolError(f"FugueMax right child {msg.id!r} lacks a right origin")
            ro = _origin_handle(tree, msg.right_origin)
            if ro == core.NONE:
                raise ProtocolError(f"right origin {msg.right_origin!r} of {msg.id!r} has not been delivered")
        elif msg.right_origin is not None:
            raise ProtocolError(f"unexpected right origin on {msg.id!r} for {self.variant.value}")
        siblings = tree.core.children(parent, int(side))
        rank = _rank(tree, self.variant, side, siblings, msg.id, ro)
        before = siblings[rank] if rank < len(siblings) else core.NONE
        h = tree.core.add_child(parent, int(side), before, ro)
        tree._register(h, tree.replica_index(msg.id.replica), msg.id.counter, msg.value)

    def _apply_delete(self, msg: DeleteOp) -> None:
        h = self.tree.lookup(msg.target) if isinstance(msg.target, ElementId) else -1
        if h <= 0:
            raise ProtocolError(f"delete target {msg.target!r} has not been delivered")
        self.tree.core.hide(h)
        self.tree._values[h] = TOMBSTONE

    # -- queries --------------------------------------------------------------

    def values(self) -> list[Any]:
        return self.tree.values()

    def entries(self) -> list[tuple[ElementId, Any]]:
        return self.tree.entries()

    def text(self) -> str:
        return self.tree.text()

    def copy(self) -> "Replica":
        other = Replica.__new__(Replica)
        other.replica_id = self.replica_id
        other.variant = self.variant
        other.tree = self.tree.copy()
        other.counter = self.counter
        other._rep = self._rep
        return other


def _origin_handle(tree: Tree, ref: NodeRef) -> int:
    if ref is END:
        return core.END
    if not isinstance(ref, ElementId):
        return core.NONE
    h = tree.lookup(ref)
    return core.NONE if h <= 0 else h


def _rank(tree: Tree, variant: Variant, side: Side, siblings: Sequence[int],
          new_id: ElementId, new_ro: int) -> int:
    ref = tree.ref
    if variant is Variant.FUGUE or side is Side.L:
        for k, s in enumerate(siblings):
            if new_id < ref(s):
                return k
        return len(siblings)
    kc = tree.core
    end = len(tree)

    def where(h: int) -> int:
        return end if h == core.END else kc.position(h)

    new_pos = where(new_ro)
    for k, s in enumerate(siblings):
        pos = where(kc.right_origin(s))
        if new_pos > pos or (new_pos == pos and new_id < ref(s)):
            return k
    return len(siblings)


def sibling_rank(tree: Tree, variant: Variant | str, side: Side,
                 siblings: Sequence[ElementId], new_id: ElementId,
                 new_right_origin: NodeRef | None = None) -> int:
    """Index at which a new node goes among ``siblings`` (same parent and side).

    For FugueMax right children the right origins of ``new_right_origin`` and
    of every sibling must already be in ``tree``.
    """
    variant = Variant(variant)
    handles = [tree.handle(s) for s in siblings]
    ro = core.NONE
    if variant is Variant.FUGUEMAX and side is Side.R:
        if new_right_origin is None:
            raise ValueError("FugueMax right children need a right origin")
        ro = core.END if new_right_origin is END else tree.handle(new_right_origin)
    return _rank(tree, variant, Side(side), handles, new_id, ro)


def local_insert(replica: Replica, i: int, value: Any) -> InsertOp:
    return replica.insert(i, value)


def local_delete(replica: Replica, i: int) -> DeleteOp:
    return replica.delete(i)


def remote_apply(replica: Replica, msg: OpMessage) -> None:
    replica.apply(msg)
