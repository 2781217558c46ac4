"""Operational transformation: adOPTed/TTF, Jupiter and GOT.

Only insertions are modelled, which is all the interleaving scripts need.
Positions are 1-based as in the OT literature.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Sequence


@dataclass(frozen=True)
class TransformOp:
    kind: str  # "ins" (deletions are out of scope here)
    position: int
    char: str
    site: str = ""

    def __post_init__(self) -> None:
        if self.kind != "ins":
            raise ValueError(f"only insertions are modelled, got {self.kind!r}")
        if self.position < 1:
            raise ValueError("positions are 1-based")

    def __repr__(self) -> str:
        site = f",{self.site}" if self.site else ""
        return f"ins({self.position},{self.char}{site})"


def ins(position: int, char: str, site: str = "") -> TransformOp:
    return TransformOp("ins", position, char, site)


def apply_op(doc: str, op: TransformOp) -> str:
    k = op.position - 1
    if k > len(doc):
        raise ValueError(f"{op!r} is out of range for a document of length {len(doc)}")
    return doc[:k] + op.char + doc[k:]


# -- adOPTed / TTF ----------------------------------------------------------

def ttf_transform(op1: TransformOp, op2: TransformOp) -> TransformOp:
    """Include ``op2`` in ``op1``: shift past it unless ``op1`` is strictly left,
    or at the same spot with the smaller site."""
    if op1.position < op2.position or (op1.position == op2.position and op1.site < op2.site):
        return op1
    return replace(op1, position=op1.position + 1)


tff_transform = ttf_transform


@dataclass(frozen=True)
class Generated:
    """An operation as generated, with the keys of the ops its site had seen."""

    key: str
    op: TransformOp
    deps: frozenset[str] = frozenset()


def ttf_observe(arrivals: Iterable[Generated]) -> tuple[str, list[TransformOp]]:
    """Replay arrivals at one site, transforming each incoming op against the
    already-executed ops it is concurrent with, taken in their generated form.

    This is the derivation the interleaving examples walk through. It is not a
    context-correct adOPTed replay: that would first transform the concurrent
    op into the incoming op's context.
    """
    doc = ""
    executed: list[Generated] = []
    applied = []
    for g in arrivals:
        op = g.op
        for e in executed:
            if e.key not in g.deps:
                op = ttf_transform(op, e.op)
        doc = apply_op(doc, op)
        applied.append(op)
        executed.append(g)
    return doc, applied


def _forward_ops() -> dict[str, Generated]:
    return {
        "a": Generated("a", ins(1, "a", "A")),
        "b": Generated("b", ins(2, "b", "A"), frozenset({"a"})),
        "x": Generated("x", ins(1, "x", "B")),
    }


def run_adopted_forward_anomaly() -> str:
    """A types "ab", B types "x"; the result at B."""
    ops = _forward_ops()
    return ttf_observe([ops["x"], ops["a"], ops["b"]])[0]


def run_adopted_backward_anomaly() -> str:
    """C types b, A receives it and prepends a, B types x; the result at B."""
    b = Generated("b", ins(1, "b", "C"))
    a = Generated("a", ins(1, "a", "A"), frozenset({"b"}))
    x = Generated("x", ins(1, "x", "B"))
    return ttf_observe([x, b, a])[0]


def run_adopted_backward_single() -> str:
    """A types b then prepends a, B types x; the result at B."""
    b = Generated("b", ins(1, "b", "A"))
    a = Generated("a", ins(1, "a", "A"), frozenset({"b"}))
    x = Generated("x", ins(1, "x", "B"))
    return ttf_observe([x, b, a])[0]


def run_adopted_control() -> str:
    ops = _forward_ops()
    return ttf_observe([ops["a"], ops["b"]])[0]


# -- Jupiter ----------------------------------------------------------------

def jupiter_xform(client: TransformOp, server: TransformOp,
                  server_first: bool = True) -> tuple[TransformOp, TransformOp]:
    """Transform a client and a server op against each other.

    At the same position the server's text goes first, or the client's when
    ``server_first`` is false.
    """
    if client.position < server.position or (client.position == server.position and not server_first):
        return client, replace(server, position=server.position + 1)
    return replace(client, position=client.position + 1), server


@dataclass(frozen=True)
class ClientOp:
    client: str
    op: TransformOp
    # server messages the client had received when it generated the op
    seen: int = 0


def jupiter_server(arrivals: Iterable[ClientOp], server_first: bool = True) -> str:
    """Server-side replay. Every applied op is forwarded to the other clients;
    ops still in flight to a client are transformed against its later ops."""
    arrivals = list(arrivals)
    clients = {c.client for c in arrivals}
    doc = ""
    # per client: (message number, op as it now stands) for server messages
    in_flight: dict[str, list[tuple[int, TransformOp]]] = {c: [] for c in clients}
    sent = dict.fromkeys(clients, 0)
    for c in arrivals:
        op = c.op
        updated = []
        for n, o in in_flight[c.client]:
            if n < c.seen:
                continue
            op, o = jupiter_xform(op, o, server_first)
            updated.append((n, o))
        in_flight[c.client] = updated
        doc = apply_op(doc, op)
        for other in clients - {c.client}:
            in_flight[other].append((sent[other], op))
            sent[other] += 1
    return doc


def run_jupiter_anomaly(server_first: bool = True) -> str:
    """Forward script with the server's text first, or with the rule flipped,
    the backward script. Both come out as "axb"."""
    if server_first:
        arrivals = [ClientOp("A", ins(1, "a")), ClientOp("B", ins(1, "x")), ClientOp("A", ins(2, "b"))]
    else:
        arrivals = [ClientOp("A", ins(1, "b")), ClientOp("B", ins(1, "x")), ClientOp("A", ins(1, "a"))]
    return jupiter_server(arrivals, server_first)


def run_jupiter_single_client(text: str = "ab") -> str:
    return jupiter_server(ClientOp("A", ins(k + 1, ch)) for k, ch in enumerate(text))


# -- GOT --------------------------------------------------------------------

@dataclass(frozen=True)
class Insert:
    """GOT's Insert[char, position]."""

    char: str
    position: int

    def __repr__(self) -> str:
        return f"Insert[{self.char},{self.position}]"


def it_ii(oa: Insert, ob: Insert) -> Insert:
    return oa if oa.position < ob.position else Insert(oa.char, oa.position + 1)


def et_ii(oa: Insert, ob: Insert) -> Insert:
    return oa if oa.position <= ob.position else Insert(oa.char, oa.position - 1)


def lit(op: Insert, ops: Sequence[Insert]) -> Insert:
    for o in ops:
        op = it_ii(op, o)
    return op


def let(op: Insert, ops_reversed: Sequence[Insert]) -> Insert:
    """Exclude ``ops_reversed`` in the given (already reversed) order."""
    for o in ops_reversed:
        op = et_ii(op, o)
    return op


@dataclass(frozen=True)
class GotOp:
    key: str
    op: Insert
    deps: frozenset[str] = frozenset()


@dataclass
class GotState:
    history: list[tuple[str, Insert]]
    document: str

    @property
    def hb(self) -> list[Insert]:
        return [o for _, o in self.history]


def run_got(ops_in_total_order: Iterable[GotOp]) -> GotState:
    """Execute ops arriving in ascending total order, so undo/do/redo never
    triggers. Each op is transformed by the GOT control algorithm with the
    insert/insert transformation functions."""
    state = GotState([], "")
    for g in ops_in_total_order:
        hb = state.history
        k = next((i for i, (key, _) in enumerate(hb) if key not in g.deps), None)
        if k is None:
            new = g.op
        else:
            eol = [i for i in range(k + 1, len(hb)) if hb[i][0] in g.deps]
            if not eol:
                new = lit(g.op, [o for _, o in hb[k:]])
            else:
                eol_prime: list[Insert] = []
                for i in eol:
                    excluded = let(hb[i][1], [o for _, o in reversed(hb[k:i])])
                    eol_prime.append(lit(excluded, eol_prime))
                original = let(g.op, list(reversed(eol_prime)))
                new = lit(original, [o for _, o in hb[k:]])
        k0 = new.position - 1
        state.document = state.document[:k0] + new.char + state.document[k0:]
        hb.append((g.key, new))
    return state


def got_forward() -> GotState:
    return run_got([GotOp("a", Insert("a", 1)), GotOp("x", Insert("x", 1)),
                    GotOp("b", Insert("b", 2), frozenset({"a"}))])


def got_backward() -> GotState:
    return run_got([GotOp("x", Insert("x", 1)), GotOp("b", Insert("b", 1)),
                    GotOp("a", Insert("a", 1), frozenset({"b"}))])


def got_control() -> GotState:
    return run_got([GotOp("a", Insert("a", 1)), GotOp("b", Insert("b", 2), frozenset({"a"}))])


def got_reversibility_counterexample() -> tuple[Insert, Insert]:
    """IT(ET(Oa, Ob), Ob) next to Oa; reversibility would make them equal."""
    oa, ob = Insert("a", 1), Insert("b", 1)
    return it_ii(et_ii(oa, ob), ob), oa
