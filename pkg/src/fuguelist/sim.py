"""Deterministic causal-broadcast simulator and execution logs.

Every operation gets a vector-clock stamp when generated. A replica may
deliver a message only once it has delivered everything the sender had seen,
plus all earlier messages from the same sender. The simulator records each
generated operation with the generator's list state around it, and each
replica's list state after every delivery; the oracles work from that record.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Iterator, Sequence, Union

from .engine import DeleteOp, InsertOp, OpMessage, Replica, Variant
from .errors import EnumerationTooLarge, ScriptError
from .ids import TOMBSTONE, ElementId, replica_id

State = tuple  # tuple of (ElementId, value-or-TOMBSTONE), tombstones included

MAX_ENUMERATION_OPS = 8


@dataclass(frozen=True, slots=True)
class CausalStamp:
    origin: bytes
    seq: int
    # per-replica delivered counts at generation, aligned with the sorted replica names
    deps: tuple[int, ...]

    @property
    def key(self) -> tuple[bytes, int]:
        return (self.origin, self.seq)


@dataclass(frozen=True, slots=True)
class OpRecord:
    stamp: CausalStamp
    msg: OpMessage
    replica: bytes
    index: int
    before: State
    after: State


@dataclass
class ExecutionLog:
    # None when the replicas ran some other list algorithm (see ``algorithm``)
    variant: Variant | None
    replicas: tuple[bytes, ...]
    ops: list[OpRecord] = field(default_factory=list)
    deliveries: dict[bytes, list[tuple[bytes, int]]] = field(default_factory=dict)
    snapshots: dict[bytes, list[State]] = field(default_factory=dict)
    commutativity_failures: list[tuple] = field(default_factory=list)
    algorithm: str = ""

    def __post_init__(self) -> None:
        if not self.algorithm and self.variant is not None:
            self.algorithm = self.variant.value

    def final_state(self, name: bytes) -> State:
        snaps = self.snapshots[name]
        return snaps[-1] if snaps else ()

    def final_states(self) -> dict[bytes, State]:
        return {n: self.final_state(n) for n in self.replicas}

    def converged(self) -> bool:
        finals = list(self.final_states().values())
        return all(f == finals[0] for f in finals)

    def op(self, key: tuple[bytes, int]) -> OpRecord:
        return self._by_key()[key]

    def _by_key(self) -> dict[tuple[bytes, int], OpRecord]:
        cache = self.__dict__.get("_key_cache")
        if cache is None or len(cache) != len(self.ops):
            cache = {r.stamp.key: r for r in self.ops}
            self.__dict__["_key_cache"] = cache
        return cache

    def inserts(self) -> list[OpRecord]:
        return [r for r in self.ops if isinstance(r.msg, InsertOp)]

    def states(self) -> Iterator[State]:
        """Every recorded list state (op before/after and delivery snapshots)."""
        for r in self.ops:
            yield r.before
            yield r.after
        for snaps in self.snapshots.values():
            yield from snaps


def visible(state: State) -> list:
    return [v for _, v in state if v is not TOMBSTONE]


def state_text(state: State) -> str:
    return "".join(str(v) for v in visible(state))


# -- scripts ----------------------------------------------------------------

@dataclass(frozen=True)
class GenerateInsert:
    replica: str
    index: int
    value: Any


@dataclass(frozen=True)
class GenerateDelete:
    replica: str
    index: int


@dataclass(frozen=True)
class Deliver:
    replica: str
    origin: str
    seq: int


@dataclass(frozen=True)
class Sync:
    a: str
    b: str


@dataclass(frozen=True)
class SyncAll:
    pass


Step = Union[GenerateInsert, GenerateDelete, Deliver, Sync, SyncAll]


@dataclass(frozen=True)
class Script:
    replicas: tuple[str, ...]
    steps: tuple[Step, ...]
    name: str = ""


# -- simulator --------------------------------------------------------------

ReplicaFactory = Callable[[bytes], Any]


class Simulator:
    """Causal broadcast between named replicas.

    ``factory`` swaps in another list algorithm: it is called with each
    replica name and must return an object with ``insert(i, value)``,
    ``delete(i)`` (both returning a message), ``apply(msg)`` and ``entries()``
    (the tombstone-inclusive ``(ElementId, value)`` list).
    """

    def __init__(self, replicas: Iterable[bytes | str], variant: Variant | str | None = Variant.FUGUE,
                 kernel: str | None = None, factory: ReplicaFactory | None = None,
                 algorithm: str = "") -> None:
        names = sorted({replica_id(n) for n in replicas})
        if not names:
            raise ValueError("at least one replica is required")
        self.variant = None if factory is not None else Variant(variant)
        self.names = tuple(names)
        self._slot = {n: k for k, n in enumerate(names)}
        if factory is None:
            self.replicas = {n: Replica(n, self.variant, kernel) for n in names}
        else:
            self.replicas = {n: factory(n) for n in names}
        self.delivered = {n: [0] * len(names) for n in names}
        self.messages: dict[tuple[bytes, int], tuple[CausalStamp, OpMessage]] = {}
        self.log = ExecutionLog(self.variant, self.names,
                                deliveries={n: [] for n in names},
                                snapshots={n: [] for n in names},
                                algorithm=algorithm)

    def replica(self, name: bytes | str) -> Replica:
        name = replica_id(name)
        if name not in self.replicas:
            raise KeyError(f"unknown replica {name!r}")
        return self.replicas[name]

    def _stamp(self, name: bytes) -> CausalStamp:
        vec = self.delivered[name]
        return CausalStamp(name, vec[self._slot[name]] + 1, tuple(vec))

    def _record_local(self, name: bytes, stamp: CausalStamp, msg: OpMessage,
                      index: int, before: State) -> None:
        after = tuple(self.replicas[name].entries())
        self.messages[stamp.key] = (stamp, msg)
        self.delivered[name][self._slot[name]] += 1
        self.log.ops.append(OpRecord(stamp, msg, name, index, before, after))
        self.log.deliveries[name].append(stamp.key)
        self.log.snapshots[name].append(after)

    def insert(self, name: bytes | str, index: int, value: Any) -> CausalStamp:
        rep = self.replica(name)
        before = tuple(rep.entries())
        stamp = self._stamp(rep.replica_id)
        msg = rep.insert(index, value)
        self._record_local(rep.replica_id, stamp, msg, index, before)
        return stamp

    def delete(self, name: bytes | str, index: int) -> CausalStamp:
        rep = self.replica(name)
        before = tuple(rep.entries())
        stamp = self._stamp(rep.replica_id)
        msg = rep.delete(index)
        self._record_local(rep.replica_id, stamp, msg, index, before)
        return stamp

    def is_ready(self, name: bytes, key: tuple[bytes, int]) -> bool:
        entry = self.messages.get(key)
        if entry is None:
            return False
        stamp = entry[0]
        vec = self.delivered[name]
        if vec[self._slot[stamp.origin]] != stamp.seq - 1:
            return False
        return all(d <= have for d, have in zip(stamp.deps, vec))

    def ready(self, name: bytes | str) -> list[CausalStamp]:
        name = replica_id(name)
        vec = self.delivered[name]
        out = []
        for origin in self.names:
            key = (origin, vec[self._slot[origin]] + 1)
            if self.is_ready(name, key):
                out.append(self.messages[key][0])
        return out

    def pending(self, name: bytes) -> int:
        vec = self.delivered[name]
        return len(self.messages) - sum(vec)

    def deliver(self, name: bytes | str, key: tuple[bytes | str, int]) -> None:
        name = replica_id(name)
        key = (replica_id(key[0]), key[1])
        if key not in self.messages:
            raise ValueError(f"no message {key[0]!r}:{key[1]} has been generated")
        if self.delivered[name][self._slot[key[0]]] >= key[1]:
            raise ValueError(f"{name!r} already delivered {key[0]!r}:{key[1]}")
        if not self.is_ready(name, key):
            raise ValueError(f"{key[0]!r}:{key[1]} is not causally ready at {name!r}")
        stamp, msg = self.messages[key]
        rep = self.replicas[name]
        rep.apply(msg)
        self.delivered[name][self._slot[key[0]]] += 1
        self.log.deliveries[name].append(key)
        self.log.snapshots[name].append(tuple(rep.entries()))

    def sync(self, a: bytes | str, b: bytes | str) -> None:
        """Bring ``a`` and ``b`` up to date with each other.

        Each side replays the other's delivery order, which is causally valid
        because it was one already.
        """
        a, b = replica_id(a), replica_id(b)
        for src, dst in ((a, b), (b, a)):
            vec = self.delivered[dst]
            for key in list(self.log.deliveries[src]):
                if vec[self._slot[key[0]]] < key[1]:
                    self.deliver(dst, key)

    def sync_all(self) -> None:
        first = self.names[0]
        for n in self.names[1:]:
            self.sync(first, n)
        for n in self.names[1:]:
            self.sync(first, n)


def run_script(script: Script, variant: Variant | str | None = Variant.FUGUE,
               kernel: str | None = None, factory: ReplicaFactory | None = None,
               algorithm: str = "") -> ExecutionLog:
    sim = Simulator(script.replicas, variant, kernel, factory, algorithm)
    for k, step in enumerate(script.steps, 1):
        try:
            if isinstance(step, GenerateInsert):
                sim.insert(step.replica, step.index, step.value)
            elif isinstance(step, GenerateDelete):
                sim.delete(step.replica, step.index)
            elif isinstance(step, Deliver):
                sim.deliver(step.replica, (step.origin, step.seq))
            elif isinstance(step, Sync):
                sim.sync(step.a, step.b)
            elif isinstance(step, SyncAll):
                sim.sync_all()
            else:
                raise ValueError(f"unknown step {step!r}")
        except (ValueError, KeyError, IndexError) as exc:
            raise ScriptError(str(exc), k) from exc
    return sim.log


# -- fuzzing ----------------------------------------------------------------

_ALPHABET = "abcdefghijklmnopqrstuvwxyz"


def fuzz_execution(seed: int | str, replica_count: int, op_count: int,
                   variant: Variant | str = Variant.FUGUE, kernel: str | None = None,
                   check_commutativity: bool = True) -> ExecutionLog:
    """Random ops and random causal delivery orders, ending fully synced.

    Generation is biased toward runs of forward and backward typing so
    concurrent runs at the same position (the interleaving-prone case) are
    common, and replicas sometimes delete the element another replica just
    deleted to provoke concurrent deletes.
    """
    if replica_count < 1:
        raise ValueError("replica_count must be at least 1")
    if op_count < 0:
        raise ValueError("op_count must be non-negative")
    rng = random.Random(f"fuzz:{seed}:{replica_count}:{op_count}")
    names = [f"r{k}" for k in range(replica_count)]
    sim = Simulator(names, variant, kernel)
    byte_names = sim.names
    cursor: dict[bytes, tuple[int, int]] = {}  # replica -> (index, direction)
    last_deleted: ElementId | None = None
    generated = 0
    while generated < op_count:
        if rng.random() < 0.45:
            candidates = [n for n in byte_names if sim.ready(n)]
            if candidates:
                n = rng.choice(candidates)
                stamp = rng.choice(sim.ready(n))
                _maybe_check_commutes(sim, n, stamp, rng, check_commutativity)
                sim.deliver(n, stamp.key)
                cursor.pop(n, None)
                continue
        n = rng.choice(byte_names)
        rep = sim.replicas[n]
        size = rep.tree.visible_count
        r = rng.random()
        if size and r < 0.08 and last_deleted is not None:
            h = rep.tree.lookup(last_deleted)
            if h > 0 and rep.tree.core.is_visible(h):
                sim.delete(n, rep.tree.core.visible_rank(h))
                generated += 1
                cursor.pop(n, None)
                continue
        if size and r < 0.25:
            i = rng.randrange(size)
            sim.delete(n, i)
            last_deleted = sim.log.ops[-1].msg.target
            cursor.pop(n, None)
        else:
            cur = cursor.get(n)
            if cur is not None and cur[0] <= size and rng.random() < 0.8:
                i, direction = cur
            else:
                i, direction = rng.randint(0, size), rng.choice((1, 0))
            sim.insert(n, i, rng.choice(_ALPHABET))
            cursor[n] = (i + direction, direction)
        generated += 1
    # final synchronization in random causal order
    while True:
        candidates = [n for n in byte_names if sim.pending(n)]
        if not candidates:
            break
        n = rng.choice(candidates)
        stamp = rng.choice(sim.ready(n))
        _maybe_check_commutes(sim, n, stamp, rng, check_commutativity)
        sim.deliver(n, stamp.key)
    return sim.log


def _maybe_check_commutes(sim: Simulator, name: bytes, stamp: CausalStamp,
                          rng: random.Random, enabled: bool) -> None:
    if not enabled or rng.random() > 0.1:
        return
    others = [s for s in sim.ready(name) if s.key != stamp.key]
    if not others:
        return
    other = rng.choice(others)
    m1, m2 = sim.messages[stamp.key][1], sim.messages[other.key][1]
    rep = sim.replicas[name]
    if not effectors_commute(rep, m1, m2):
        sim.log.commutativity_failures.append((name, stamp.key, other.key))


def effectors_commute(replica: Replica, m1: OpMessage, m2: OpMessage) -> bool:
    """Apply two messages in both orders to copies of ``replica`` and compare trees."""
    x, y = replica.copy(), replica.copy()
    x.apply(m1)
    x.apply(m2)
    y.apply(m2)
    y.apply(m1)
    return x.tree.structure() == y.tree.structure()


# -- delivery-order enumeration --------------------------------------------

def happened_before(a: CausalStamp, b: CausalStamp, names: Sequence[bytes]) -> bool:
    """Whether ``a`` was delivered at ``b``'s origin before ``b`` was generated."""
    return b.deps[names.index(a.origin)] >= a.seq


def linear_extensions(stamps: Sequence[CausalStamp], names: Sequence[bytes]) -> list[tuple[CausalStamp, ...]]:
    if len(stamps) > MAX_ENUMERATION_OPS:
        raise EnumerationTooLarge(
            f"{len(stamps)} ops exceeds the enumeration limit of {MAX_ENUMERATION_OPS}")
    preds = {s.key: {t.key for t in stamps if t.key != s.key and happened_before(t, s, names)}
             for s in stamps}
    out: list[tuple[CausalStamp, ...]] = []
    prefix: list[CausalStamp] = []
    done: set = set()

    def extend() -> None:
        if len(prefix) == len(stamps):
            out.append(tuple(prefix))
            return
        for s in stamps:
            if s.key not in done and preds[s.key] <= done:
                done.add(s.key)
                prefix.append(s)
                extend()
                prefix.pop()
                done.remove(s.key)

    extend()
    return out


@dataclass(frozen=True)
class DeliveryRun:
    order: tuple[tuple[bytes, int], ...]
    state: State


def replay(msgs: Iterable[OpMessage], variant: Variant | str, kernel: str | None = None) -> Replica:
    rep = Replica(b"\x00observer", variant, kernel)
    for m in msgs:
        rep.apply(m)
    return rep


def enumerate_delivery_orders(log: ExecutionLog, kernel: str | None = None) -> list[DeliveryRun]:
    """Replay every linear extension of the log's causal order on a fresh replica."""
    stamps = [r.stamp for r in log.ops]
    msgs = {r.stamp.key: r.msg for r in log.ops}
    runs = []
    for order in linear_extensions(stamps, log.replicas):
        rep = replay((msgs[s.key] for s in order), log.variant, kernel)
        runs.append(DeliveryRun(tuple(s.key for s in order), tuple(rep.entries())))
    return runs


def causally_closed_subsets(log: ExecutionLog) -> list[tuple[OpRecord, ...]]:
    """Every downward-closed set of ops, each listed in a causal order."""
    ops = log.ops
    if len(ops) > MAX_ENUMERATION_OPS:
        raise EnumerationTooLarge(
            f"{len(ops)} ops exceeds the enumeration limit of {MAX_ENUMERATION_OPS}")
    preds = [{j for j, q in enumerate(ops) if j != k and happened_before(q.stamp, p.stamp, log.replicas)}
             for k, p in enumerate(ops)]
    # ops are recorded in generation order, which is a linear extension
    out = []
    for mask in itertools.product((False, True), repeat=len(ops)):
        chosen = {k for k, m in enumerate(mask) if m}
        if all(preds[k] <= chosen for k in chosen):
            out.append(tuple(ops[k] for k in sorted(chosen)))
    return out
