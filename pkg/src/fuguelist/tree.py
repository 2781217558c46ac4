"""The shared tree state and the traversal that turns it into a list.

A :class:`Tree` pairs a storage kernel (integer handles, child lists and an
order index) with the id and value tables needed to talk about elements by
:class:`~fuguelist.ids.ElementId`. Per-node metadata lives in flat arrays so a
tree with tens of millions of nodes stays within a few gigabytes.
"""

from __future__ import annotations

from array import array
from dataclasses import dataclass
from typing import Any, Iterator

from . import core
from .errors import UnknownElementError
from .ids import END, ROOT, TOMBSTONE, ElementId, NodeRef, Side

# a counter this far beyond a replica's dense range goes to the sparse table
_SPARSE_GAP = 1 << 16


@dataclass(frozen=True, slots=True)
class TreeNode:
    id: NodeRef
    value: Any
    parent: NodeRef | None
    side: Side | None
    right_origin: NodeRef | None = None

    @property
    def deleted(self) -> bool:
        return self.value is TOMBSTONE


class Tree:
    """Fugue tree of one replica. Only the root exists initially."""

    def __init__(self, kernel: str | None = None) -> None:
        self.core = core.KERNELS[kernel]() if kernel else core.TreeCore()
        self._names: list[bytes] = []
        self._name_index: dict[bytes, int] = {}
        self._rep = array("i", [-1])
        self._ctr = array("q", [-1])
        self._values: list[Any] = [TOMBSTONE]
        self._dense: list[array] = []
        self._sparse: dict[ElementId, int] = {}

    # -- id <-> handle ------------------------------------------------------

    def replica_index(self, name: bytes) -> int:
        idx = self._name_index.get(name)
        if idx is None:
            idx = len(self._names)
            self._names.append(name)
            self._name_index[name] = idx
            self._dense.append(array("i"))
        return idx

    def _register(self, h: int, rep: int, counter: int, value: Any) -> None:
        if h != len(self._values):
            raise AssertionError("kernel and id tables out of step")
        self._rep.append(rep)
        self._ctr.append(counter)
        self._values.append(value)
        slots = self._dense[rep]
        if counter < len(slots):
            slots[counter] = h
        elif counter - len(slots) < _SPARSE_GAP:
            if counter > len(slots):
                slots.extend(array("i", [-1]) * (counter - len(slots)))
            slots.append(h)
        else:
            self._sparse[ElementId(self._names[rep], counter)] = h

    def lookup(self, ref: NodeRef) -> int:
        """Handle for ``ref``, or -1 when the tree does not contain it."""
        if ref is ROOT:
            return 0
        rep = self._name_index.get(ref.replica)
        if rep is None:
            return -1
        slots = self._dense[rep]
        if 0 <= ref.counter < len(slots):
            return slots[ref.counter]
        return self._sparse.get(ref, -1) if self._sparse else -1

    def handle(self, ref: NodeRef) -> int:
        h = self.lookup(ref)
        if h < 0:
            raise UnknownElementError(ref)
        return h

    def ref(self, h: int) -> NodeRef:
        if h == 0:
            return ROOT
        if h == core.END:
            return END
        return ElementId(self._names[self._rep[h]], self._ctr[h])

    def __contains__(self, ref: NodeRef) -> bool:
        return self.lookup(ref) >= 0

    # -- node view ----------------------------------------------------------

    def node(self, ref: NodeRef) -> TreeNode:
        h = self.handle(ref)
        if h == 0:
            return TreeNode(ROOT, TOMBSTONE, None, None)
        ro = self.core.right_origin(h)
        return TreeNode(
            self.ref(h),
            self._values[h],
            self.ref(self.core.parent(h)),
            Side(self.core.side(h)),
            None if ro == core.NONE else self.ref(ro),
        )

    def value(self, ref: NodeRef) -> Any:
        return self._values[self.handle(ref)]

    def children(self, ref: NodeRef, side: Side) -> list[ElementId]:
        return [self.ref(c) for c in self.core.children(self.handle(ref), int(side))]

    def nodes(self) -> Iterator[TreeNode]:
        """Every non-root node, in arrival order (parents before children)."""
        for h in range(1, len(self._values)):
            yield self.node(self.ref(h))

    # -- list view ----------------------------------------------------------

    def __len__(self) -> int:
        """Number of elements, tombstones included."""
        return len(self._values) - 1

    @property
    def visible_count(self) -> int:
        return self.core.visible_count

    def values(self) -> list[Any]:
        vals = self._values
        return [vals[h] for h in self.core.order(True)]

    def text(self) -> str:
        return "".join(map(str, self.values()))

    def ids(self, include_tombstones: bool = True) -> list[ElementId]:
        return [self.ref(h) for h in self.core.order(not include_tombstones)]

    def entries(self, include_tombstones: bool = True) -> list[tuple[ElementId, Any]]:
        vals = self._values
        return [(self.ref(h), vals[h]) for h in self.core.order(not include_tombstones)]

    def position(self, ref: NodeRef) -> int:
        """Index in the tombstone-inclusive list; ROOT is -1 and END is len."""
        if ref is END:
            return len(self)
        return self.core.position(self.handle(ref))

    def copy(self) -> "Tree":
        other = Tree.__new__(Tree)
        other.core = self.core.copy()
        other._names = list(self._names)
        other._name_index = dict(self._name_index)
        other._rep = self._rep[:]
        other._ctr = self._ctr[:]
        other._values = list(self._values)
        other._dense = [a[:] for a in self._dense]
        other._sparse = dict(self._sparse)
        return other

    def structure(self) -> list[tuple]:
        """Canonical nested form for equality checks across replicas."""
        out = []
        for node in sorted(self.nodes(), key=lambda n: n.id):
            out.append((
                node.id, node.value, node.parent, node.side, node.right_origin,
                tuple(self.children(node.id, Side.L)), tuple(self.children(node.id, Side.R)),
            ))
        out.append((ROOT, tuple(self.children(ROOT, Side.L)), tuple(self.children(ROOT, Side.R))))
        return out

    def memory_bytes(self) -> int:
        ids = self._rep.itemsize * len(self._rep) + self._ctr.itemsize * len(self._ctr)
        ids += sum(a.itemsize * len(a) for a in self._dense)
        return self.core.memory_bytes() + ids + 8 * len(self._values)


def traverse(tree: Tree, include_tombstones: bool = False) -> list[tuple[ElementId, Any]]:
    """In-order walk over the child lists: left children, the node, right children.

    This reads the sibling lists directly rather than the order index, so it
    serves as a cross-check on the index.
    """
    kc = tree.core
    vals = tree._values
    out: list[tuple[ElementId, Any]] = []
    stack: list[tuple[int, bool]] = [(0, False)]
    while stack:
        h, expanded = stack.pop()
        if expanded:
            if h and (include_tombstones or vals[h] is not TOMBSTONE):
                out.append((tree.ref(h), vals[h]))
            continue
        stack.extend((c, False) for c in reversed(kc.children(h, 1)))
        stack.append((h, True))
        stack.extend((c, False) for c in reversed(kc.children(h, 0)))
    return out


def values(tree: Tree) -> list[Any]:
    return tree.values()


def node_at_visible_index(tree: Tree, i: int) -> TreeNode:
    if not 0 <= i < tree.visible_count:
        raise IndexError(f"index {i} out of range for {tree.visible_count} visible elements")
    return tree.node(tree.ref(tree.core.visible_at(i)))


def next_in_full_traversal(tree: Tree, ref: NodeRef) -> NodeRef:
    """Successor of ``ref`` counting tombstones; END after the last element."""
    nxt = tree.core.next(tree.handle(ref))
    return END if nxt == core.NONE else tree.ref(nxt)
