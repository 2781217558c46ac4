"""Independent checkers for execution logs.

Nothing here consults a replica's tree to decide what the right answer is.
Each checker derives its expectation from the log alone: origins come from
the generating replica's recorded state before each insert, and the global
order used by the strong-list check comes from replaying every message on a
fresh replica (the union of all trees). Every recorded list state is checked
with tombstones included, so deletions never hide a violation.
"""

from __future__ import annotations

import enum
import functools
import itertools
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

from .engine import DeleteOp, InsertOp, Replica, Variant
from .errors import FugueError
from .ids import END, ROOT, TOMBSTONE, ElementId, NodeRef, Side
from .sim import (MAX_ENUMERATION_OPS, ExecutionLog, OpRecord, State, causally_closed_subsets,
                  happened_before, replay)

#: The left-origin tree's root. The Fugue root plays the same role.
START = ROOT

_MAX_VIOLATIONS = 25


class LogIntegrityError(FugueError):
    """The log lacks information an oracle needs (e.g. a pre-insert state)."""


# -- verdicts ---------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    condition: str
    elements: tuple
    replica: bytes | None
    state: State
    detail: str = ""

    def as_dict(self) -> dict[str, Any]:
        return {
            "condition": self.condition,
            "elements": [repr(e) for e in self.elements],
            "replica": None if self.replica is None else self.replica.decode("utf-8", "replace"),
            "state": [repr(i) for i, _ in self.state],
            "detail": self.detail,
        }


@dataclass
class Verdict:
    check: str
    violations: list[Violation] = field(default_factory=list)
    states_checked: int = 0
    # per-state disagreements between redundant implementations
    disagreements: int = 0

    @property
    def passed(self) -> bool:
        return not self.violations and not self.disagreements

    def __bool__(self) -> bool:
        return self.passed

    def add(self, violation: Violation) -> None:
        if len(self.violations) < _MAX_VIOLATIONS:
            self.violations.append(violation)

    def report(self) -> list[dict[str, Any]]:
        out = [v.as_dict() for v in self.violations]
        if self.disagreements:
            out.append({"condition": "redundant-implementations-disagree",
                        "detail": f"{self.disagreements} states"})
        return out

    def summary(self) -> str:
        if self.passed:
            return f"{self.check}: pass ({self.states_checked} states)"
        first = self.violations[0] if self.violations else None
        what = f"{first.condition} {list(first.elements)}" if first else "disagreement"
        return f"{self.check}: FAIL ({len(self.violations)} violations; first {what})"


# -- per-op effects and origins ---------------------------------------------

@dataclass(frozen=True)
class Effect:
    kind: str  # "insert" or "delete"
    element: ElementId
    value: Any = None


def op_effect(rec: OpRecord) -> Effect:
    """What an op did, from its message or, for foreign algorithms, its states."""
    msg = rec.msg
    if isinstance(msg, InsertOp):
        return Effect("insert", msg.id, msg.value)
    if isinstance(msg, DeleteOp):
        return Effect("delete", msg.target)
    before = dict(rec.before)
    if len(rec.after) == len(rec.before) + 1:
        for i, v in rec.after:
            if i not in before:
                return Effect("insert", i, v)
    for i, v in rec.after:
        if v is TOMBSTONE and before.get(i, TOMBSTONE) is not TOMBSTONE:
            return Effect("delete", i)
    raise LogIntegrityError(f"cannot tell what op {rec.stamp.key} did from its recorded states")


class Orientation(enum.Enum):
    LEFT = "left"
    RIGHT = "right"


@dataclass
class OriginTree:
    orientation: Orientation
    parent: dict[ElementId, NodeRef]

    @property
    def root(self) -> NodeRef:
        return START if self.orientation is Orientation.LEFT else END

    def children(self) -> dict[NodeRef, list[ElementId]]:
        """Children per node, in the order the elements were generated."""
        out: dict[NodeRef, list[ElementId]] = {self.root: []}
        for e, p in self.parent.items():
            out.setdefault(p, []).append(e)
            out.setdefault(e, [])
        return out

    def ancestors(self, e: NodeRef) -> list[NodeRef]:
        out = []
        while e != self.root:
            e = self.parent[e]
            out.append(e)
        return out

    def is_descendant(self, e: NodeRef, anc: NodeRef) -> bool:
        """Proper descendant test."""
        while e != self.root:
            e = self.parent[e]
            if e == anc:
                return True
        return False


def extract_origins(log: ExecutionLog) -> tuple[OriginTree, OriginTree]:
    left: dict[ElementId, NodeRef] = {}
    right: dict[ElementId, NodeRef] = {}
    for rec in log.ops:
        eff = op_effect(rec)
        if eff.kind != "insert":
            continue
        lo, ro = _origins_at(rec.before, rec.index, rec)
        left[eff.element] = lo
        right[eff.element] = ro
    return OriginTree(Orientation.LEFT, left), OriginTree(Orientation.RIGHT, right)


def _origins_at(before: State, index: int, rec: OpRecord) -> tuple[NodeRef, NodeRef]:
    if before is None:
        raise LogIntegrityError(f"op {rec.stamp.key} has no pre-insert state")
    if index == 0:
        return START, before[0][0] if before else END
    seen = 0
    for k, (i, v) in enumerate(before):
        if v is TOMBSTONE:
            continue
        seen += 1
        if seen == index:
            return i, before[k + 1][0] if k + 1 < len(before) else END
    raise LogIntegrityError(f"op {rec.stamp.key} inserted at {index} but its pre-insert state is shorter")


# -- helpers -----------------------------------------------------------------

def _factory_for(log: ExecutionLog, factory: Callable[[bytes], Any] | None):
    if factory is not None:
        return factory
    if log.variant is None:
        raise ValueError(f"replaying a {log.algorithm or 'foreign'} log needs a replica factory")
    return lambda name: Replica(name, log.variant)


def union_order(log: ExecutionLog, factory: Callable[[bytes], Any] | None = None) -> list[ElementId]:
    """All elements in the order a replica holding every message lists them."""
    make = _factory_for(log, factory)
    rep = make(b"\x00union")
    for rec in log.ops:
        rep.apply(rec.msg)
    return [i for i, _ in rep.entries()]


def recorded_states(log: ExecutionLog) -> list[tuple[bytes | None, State]]:
    """Distinct recorded states (by id sequence), each with one replica that held it."""
    seen: set = set()
    out = []
    for name in log.replicas:
        for snap in log.snapshots[name]:
            key = tuple(i for i, _ in snap)
            if key not in seen:
                seen.add(key)
                out.append((name, snap))
    for rec in log.ops:
        for snap in (rec.before, rec.after):
            key = tuple(i for i, _ in snap)
            if key not in seen:
                seen.add(key)
                out.append((rec.replica, snap))
    return out


def reachable_states(log: ExecutionLog, factory: Callable[[bytes], Any] | None = None) -> list[State]:
    """The state after every causally closed subset of ops (small logs only)."""
    make = _factory_for(log, factory)
    out = []
    for subset in causally_closed_subsets(log):
        rep = make(b"\x00subset")
        for rec in subset:
            rep.apply(rec.msg)
        out.append(tuple(rep.entries()))
    return out


def _states_for(log: ExecutionLog, exhaustive: bool | None, factory) -> list[tuple[bytes | None, State]]:
    states = recorded_states(log)
    if exhaustive is None:
        # foreign logs can only be replayed when the caller supplies a factory
        exhaustive = len(log.ops) <= MAX_ENUMERATION_OPS and (factory is not None or log.variant is not None)
    if exhaustive:
        seen = {tuple(i for i, _ in s) for _, s in states}
        for s in reachable_states(log, factory):
            key = tuple(i for i, _ in s)
            if key not in seen:
                seen.add(key)
                states.append((None, s))
    return states


class _LeftIndex:
    """Pre-order intervals of the left-origin tree for O(1) descendant tests."""

    def __init__(self, left: OriginTree) -> None:
        kids = left.children()
        self.enter: dict[NodeRef, int] = {}
        self.leave: dict[NodeRef, int] = {}
        clock = 0
        stack: list[tuple[NodeRef, bool]] = [(START, False)]
        while stack:
            node, done = stack.pop()
            if done:
                self.leave[node] = clock
                continue
            self.enter[node] = clock
            clock += 1
            stack.append((node, True))
            stack.extend((c, False) for c in reversed(kids.get(node, ())))

    def is_descendant(self, e: NodeRef, anc: NodeRef) -> bool:
        return e != anc and self.enter[anc] < self.enter[e] < self.leave[anc]


# -- strong list specification ----------------------------------------------

def check_strong_list_spec(log: ExecutionLog, order: Sequence[ElementId] | None = None,
                           factory: Callable[[bytes], Any] | None = None) -> Verdict:
    """(a) every snapshot lists exactly the delivered, undeleted elements in the
    global order; (b) every local insert landed between its neighbours."""
    verdict = Verdict("strong-list-spec")
    if order is None:
        order = union_order(log, factory)
    rank = {e: k for k, e in enumerate(order)}
    effects = {rec.stamp.key: op_effect(rec) for rec in log.ops}
    for name in log.replicas:
        inserted: dict[ElementId, Any] = {}
        deleted: set[ElementId] = set()
        for key, snap in zip(log.deliveries[name], log.snapshots[name]):
            eff = effects[key]
            if eff.kind == "insert":
                inserted[eff.element] = eff.value
            else:
                deleted.add(eff.element)
            verdict.states_checked += 1
            try:
                ids = sorted(inserted, key=rank.__getitem__)
            except KeyError as exc:
                verdict.add(Violation("spec-(a)", (exc.args[0],), name, snap,
                                      "element missing from the global order"))
                continue
            expected = tuple((i, TOMBSTONE if i in deleted else inserted[i]) for i in ids)
            if tuple(snap) != expected:
                diff = next((k for k, (x, y) in enumerate(zip(snap, expected)) if x != y),
                            min(len(snap), len(expected)))
                witness = tuple(e for e, _ in (snap[diff:diff + 1] + expected[diff:diff + 1]))
                verdict.add(Violation("spec-(a)", witness, name, snap,
                                      f"snapshot differs from the global order at position {diff}"))
    for rec in log.ops:
        eff = effects[rec.stamp.key]
        if eff.kind != "insert":
            continue
        vis = [i for i, v in rec.before if v is not TOMBSTONE]
        left = vis[rec.index - 1] if rec.index > 0 else None
        right = vis[rec.index] if rec.index < len(vis) else None
        r = rank.get(eff.element)
        ok = r is not None and (left is None or rank[left] < r) and (right is None or r < rank[right])
        verdict.states_checked += 1
        if not ok:
            verdict.add(Violation("spec-(b)", tuple(x for x in (left, eff.element, right) if x is not None),
                                  rec.replica, rec.after, "insert not between its neighbours"))
    return verdict


# -- forward non-interleaving -----------------------------------------------

def _preorder_violation(ids: Sequence[ElementId], left: OriginTree) -> tuple | None:
    """Stack walk: each element's left origin must be on the current root path."""
    stack: list[NodeRef] = [START]
    parent = left.parent
    for e in ids:
        p = parent[e]
        while stack and stack[-1] != p:
            stack.pop()
        if not stack:
            return (p, e)
        stack.append(e)
    return None


def _def1_violation(ids: Sequence[ElementId], pos: dict, left: OriginTree) -> tuple | None:
    """The earliest child of each node must directly follow it."""
    earliest: dict[NodeRef, ElementId] = {}
    parent = left.parent
    for e in ids:
        earliest.setdefault(parent[e], e)
    for a, b in earliest.items():
        if pos[b] != pos[a] + 1:
            return (a, b)
    return None


def check_forward_noninterleaving(log: ExecutionLog, final_order: Sequence[ElementId] | None = None,
                                  exhaustive: bool | None = None,
                                  factory: Callable[[bytes], Any] | None = None,
                                  origins: tuple[OriginTree, OriginTree] | None = None) -> Verdict:
    """Every state must be a pre-order of the left-origin tree; the direct
    consecutiveness condition is checked alongside as a second implementation."""
    verdict = Verdict("forward-noninterleaving")
    left, _ = origins or extract_origins(log)
    states = _states_for(log, exhaustive, factory)
    if final_order is not None:
        states.append((None, tuple((e, None) for e in final_order)))
    for name, state in states:
        ids = [i for i, _ in state]
        pos = {e: k for k, e in enumerate(ids)}
        pos[START] = -1
        verdict.states_checked += 1
        pre = _preorder_violation(ids, left)
        d1 = _def1_violation(ids, pos, left)
        if (pre is None) != (d1 is None):
            verdict.disagreements += 1
        if pre is not None:
            verdict.add(Violation("lemma3", pre, name, state, "not a pre-order of the left-origin tree"))
        if d1 is not None:
            verdict.add(Violation("def1", d1, name, state, "earliest child not consecutive with its left origin"))
    return verdict


# -- maximal non-interleaving -----------------------------------------------

def check_maximal_noninterleaving(log: ExecutionLog, final_order: Sequence[ElementId] | None = None,
                                  exhaustive: bool | None = None,
                                  factory: Callable[[bytes], Any] | None = None,
                                  origins: tuple[OriginTree, OriginTree] | None = None,
                                  end_as_origin: bool = True) -> Verdict:
    """Conditions (1)-(3), with the right-origin condition's exception found
    constructively. ``end_as_origin`` also applies condition (2) to elements
    whose right origin is the end of the list, treating the end as an element
    after the last position."""
    verdict = Verdict("maximal-noninterleaving")
    left, right = origins or extract_origins(log)
    lidx = _LeftIndex(left)
    states = _states_for(log, exhaustive, factory)
    if final_order is not None:
        states.append((None, tuple((e, None) for e in final_order)))
    lo, ro = left.parent, right.parent
    for name, state in states:
        ids = [i for i, _ in state]
        n = len(ids)
        pos: dict[NodeRef, int] = {e: k for k, e in enumerate(ids)}
        pos[START] = -1
        pos[END] = n
        verdict.states_checked += 1

        d1 = _def1_violation(ids, pos, left)
        if d1 is not None:
            verdict.add(Violation("def2-1", d1, name, state, "earliest child not consecutive with its left origin"))

        latest: dict[NodeRef, ElementId] = {}
        for e in ids:
            latest[ro[e]] = e
        for b, a in latest.items():
            if b is END and not end_as_origin:
                continue
            if pos[a] + 1 == pos[b]:
                continue
            a_lo = lo[a]
            different = b is END or lo[b] != a_lo
            cs = []
            if different:
                cs = [c for c in ids[pos[a_lo] + 1:pos[b]]
                      if not lidx.is_descendant(c, a_lo)]
            if not cs:
                verdict.add(Violation("def2-2", (a, b), name, state,
                                      "latest element with this right origin is not consecutive with it"))
                continue
            bad = next((c for c in cs if not pos[a] < pos[c]), None)
            if bad is not None:
                verdict.add(Violation("def2-2", (a, bad, b), name, state,
                                      "exception applies but the element is not before the witness"))

        groups: dict[tuple, list[ElementId]] = {}
        for e in ids:
            groups.setdefault((lo[e], ro[e]), []).append(e)
        for members in groups.values():
            for x, y in zip(members, members[1:]):
                if not x < y:
                    verdict.add(Violation("def2-3", (x, y), name, state,
                                          "same origins but the higher id comes first"))
    return verdict


# -- characterization -------------------------------------------------------

def characterization_order(log: ExecutionLog, variant: Variant | str | None = None,
                           origins: tuple[OriginTree, OriginTree] | None = None) -> list[ElementId]:
    """Global order computed from origins alone.

    Pre-order over the left-origin tree. The children of a node P are ordered
    as a post-order walk of their right-origin forest (elements whose right
    origin is also a child of P hang below it). Forest roots come in reverse
    list order of their right origins, or by id for Fugue; everything else
    ties by id.
    """
    variant = Variant(variant or log.variant or Variant.FUGUEMAX)
    left, right = origins or extract_origins(log)
    lo, ro = left.parent, right.parent
    kids = left.children()
    depth: dict[NodeRef, int] = {START: 0}

    def get_depth(e: NodeRef) -> int:
        chain = []
        while e not in depth:
            chain.append(e)
            e = lo[e]
        d = depth[e]
        for x in reversed(chain):
            d += 1
            depth[x] = d
        return depth[chain[0]] if chain else d

    sib_cache: dict[NodeRef, dict[ElementId, int]] = {}

    def sibling_rank(p: NodeRef) -> dict[ElementId, int]:
        got = sib_cache.get(p)
        if got is not None:
            return got
        members = kids.get(p, [])
        inside = set(members)
        below: dict[NodeRef, list[ElementId]] = {}
        roots = []
        for e in members:
            r = ro[e]
            if r is not END and r in inside:
                below.setdefault(r, []).append(e)
            else:
                roots.append(e)
        if variant is Variant.FUGUEMAX:
            def root_cmp(x: ElementId, y: ElementId) -> int:
                rx, ry = ro[x], ro[y]
                if rx == ry:
                    return -1 if x < y else 1
                # later right origin first
                return 1 if precedes(rx, ry) else -1
            roots.sort(key=functools.cmp_to_key(root_cmp))
        else:
            roots.sort()
        seq: list[ElementId] = []
        stack: list[tuple[ElementId, bool]] = [(r, False) for r in reversed(roots)]
        while stack:
            e, done = stack.pop()
            if done:
                seq.append(e)
                continue
            stack.append((e, True))
            stack.extend((c, False) for c in sorted(below.get(e, ()), reverse=True))
        got = {e: k for k, e in enumerate(seq)}
        sib_cache[p] = got
        return got

    def precedes(x: NodeRef, y: NodeRef) -> bool:
        if x == y:
            return False
        if x is END:
            return False
        if y is END:
            return True
        dx, dy = get_depth(x), get_depth(y)
        ax, ay = x, y
        while dx > dy:
            if lo[ax] == y:
                return False  # y is an ancestor of x
            ax = lo[ax]
            dx -= 1
        while dy > dx:
            if lo[ay] == x:
                return True
            ay = lo[ay]
            dy -= 1
        while lo[ax] != lo[ay]:
            ax, ay = lo[ax], lo[ay]
        ranks = sibling_rank(lo[ax])
        return ranks[ax] < ranks[ay]

    out: list[ElementId] = []
    stack: list[NodeRef] = [START]
    while stack:
        p = stack.pop()
        if p is not START:
            out.append(p)
        ranks = sibling_rank(p)
        stack.extend(sorted(kids.get(p, ()), key=ranks.__getitem__, reverse=True))
    return out


# -- tree-shape facts -------------------------------------------------------

def check_left_origin_walk(log: ExecutionLog, tree, origins=None) -> Verdict:
    """Walking up from each node to the first right-child edge finds its left origin."""
    verdict = Verdict("left-origin-walk")
    left, _ = origins or extract_origins(log)
    for e, expected in left.parent.items():
        node = tree.node(e)
        while node.side is Side.L:
            node = tree.node(node.parent)
        found = node.parent
        verdict.states_checked += 1
        if found != expected:
            verdict.add(Violation("lemma4a", (e, found, expected), None, (),
                                  "walk found a different left origin"))
    return verdict


def check_forest_roots(log: ExecutionLog, tree, origins=None) -> Verdict:
    """Roots of each right-origin forest are exactly that node's right children."""
    verdict = Verdict("forest-roots")
    left, right = origins or extract_origins(log)
    for p, members in left.children().items():
        inside = set(members)
        roots = {e for e in members if right.parent[e] is END or right.parent[e] not in inside}
        children = set(tree.children(p, Side.R))
        verdict.states_checked += 1
        if roots != children:
            verdict.add(Violation("forest-roots", (p,) + tuple(sorted(roots ^ children)), None, (),
                                  "forest roots differ from right children"))
    return verdict


# -- unsatisfiable earlier definition ---------------------------------------

@dataclass
class UnsatisfiabilityDemo:
    replicas: int
    order: list[Any]
    witnesses: list[tuple[frozenset, frozenset]]
    # the alternating split of the final order, when it is a witness
    alternating: tuple[frozenset, frozenset] | None

    @property
    def definition_violated(self) -> bool:
        return bool(self.witnesses)


def _concurrent(a, b, names) -> bool:
    return not happened_before(a, b, names) and not happened_before(b, a, names)


def check_unsatisfiability_example(replica_count: int = 4,
                                   variant: Variant | str = Variant.FUGUEMAX) -> UnsatisfiabilityDemo:
    """Each of ``replica_count`` replicas inserts one element concurrently.

    Searches every pair of disjoint nonempty element sets X, Y for which the
    earlier definition's hypotheses hold (all of X concurrent with all of Y;
    X and Y contiguous once their inserts and causal predecessors are
    applied) yet X and Y interleave in the final list.
    """
    from .sim import GenerateInsert, Script, SyncAll, run_script

    names = tuple(f"p{k}" for k in range(replica_count))
    letters = "abcdefghijklmnopqrstuvwxyz"
    steps = tuple(GenerateInsert(n, 0, letters[k]) for k, n in enumerate(names)) + (SyncAll(),)
    log = run_script(Script(names, steps, "concurrent"), variant)
    final = [i for i, _ in log.final_state(log.replicas[0])]
    pos = {e: k for k, e in enumerate(final)}
    recs = {op_effect(r).element: r for r in log.ops}
    elems = list(final)
    witnesses = []

    def closure(ids: Iterable[ElementId]) -> list[OpRecord]:
        chosen = {recs[i].stamp.key for i in ids}
        return [r for r in log.ops if r.stamp.key in chosen or any(
            happened_before(r.stamp, recs[i].stamp, log.replicas) for i in ids)]

    for size in range(2, len(elems) + 1):
        for union in itertools.combinations(elems, size):
            rep = replay((r.msg for r in closure(union)), log.variant)
            vis = [i for i, v in rep.entries() if v is not TOMBSTONE]
            where = sorted(vis.index(e) for e in union)
            if where[-1] - where[0] != len(union) - 1:
                continue
            for k in range(1, len(union)):
                for xs in itertools.combinations(union, k):
                    if union[0] not in xs:
                        continue  # count each unordered split once
                    ys = tuple(e for e in union if e not in xs)
                    if not all(_concurrent(recs[x].stamp, recs[y].stamp, log.replicas)
                               for x in xs for y in ys):
                        continue
                    before = all(pos[x] < pos[y] for x in xs for y in ys)
                    after = all(pos[y] < pos[x] for x in xs for y in ys)
                    if not (before or after):
                        witnesses.append((frozenset(xs), frozenset(ys)))
    alternating = None
    if len(final) >= 4:
        xs, ys = frozenset(final[0::2]), frozenset(final[1::2])
        if (xs, ys) in witnesses or (ys, xs) in witnesses:
            alternating = (xs, ys)
    values = [v for _, v in log.final_state(log.replicas[0])]
    return UnsatisfiabilityDemo(replica_count, values, witnesses, alternating)
