import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fuguelist import savefile
from fuguelist.codec import decode_op, encode_op, read_varint, write_varint
from fuguelist.engine import DeleteOp, InsertOp, Replica, Variant
from fuguelist.errors import DecodeError, UnsupportedVersionError
from fuguelist.ids import END, ROOT, ElementId, Side
from fuguelist.sim import Simulator, fuzz_execution

names = st.binary(min_size=1, max_size=12)
element_ids = st.builds(ElementId, names, st.integers(0, 2**63))
values = st.one_of(st.text(max_size=8), st.integers(-2**70, 2**70), st.binary(max_size=8))


@st.composite
def insert_ops(draw):
    side = draw(st.sampled_from(list(Side)))
    ro = draw(st.one_of(st.none(), st.just(END), element_ids)) if side is Side.R else None
    return InsertOp(draw(element_ids), draw(values), draw(st.one_of(st.just(ROOT), element_ids)), side, ro)


messages = st.one_of(insert_ops(), st.builds(DeleteOp, element_ids))


@given(messages)
def test_round_trip(msg):
    assert decode_op(encode_op(msg)) == msg


@given(messages)
def test_reencoding_is_stable(msg):
    data = encode_op(msg)
    assert encode_op(decode_op(data)) == data


@given(messages)
def test_every_truncation_is_rejected(msg):
    data = encode_op(msg)
    for k in range(len(data)):
        with pytest.raises(DecodeError):
            decode_op(data[:k])


@given(messages, st.binary(min_size=1, max_size=3))
def test_trailing_bytes_rejected(msg, junk):
    with pytest.raises(DecodeError):
        decode_op(encode_op(msg) + junk)


@given(st.integers(0, 2**64))
def test_varint_round_trip(n):
    out = bytearray()
    write_varint(out, n)
    assert read_varint(bytes(out), 0) == (n, len(out))


def test_non_minimal_varint_rejected():
    with pytest.raises(DecodeError):
        read_varint(b"\x80\x00", 0)


def test_equal_messages_equal_bytes():
    # one message from a replica, one built by hand
    generated = Replica("site", Variant.FUGUEMAX).insert(0, "q")
    by_hand = InsertOp(ElementId(b"site", 0), "q", ROOT, Side.R, END)
    assert generated == by_hand
    assert encode_op(generated) == encode_op(by_hand)


@pytest.mark.parametrize("data", [b"", b"\x07", b"\x01\x00", b"\x02\x00"])
def test_garbage_rejected(data):
    with pytest.raises(DecodeError):
        decode_op(data)


def test_unknown_flags_rejected():
    data = bytearray(encode_op(InsertOp(ElementId(b"a", 0), "x", ROOT, Side.R)))
    flags_at = 1 + 1 + 1 + 1  # kind, name length, name, counter
    data[flags_at] |= 0x80
    with pytest.raises(DecodeError):
        decode_op(bytes(data))


def test_unencodable_values():
    with pytest.raises(TypeError):
        encode_op(InsertOp(ElementId(b"a", 0), 1.5, ROOT, Side.R))
    with pytest.raises(TypeError):
        encode_op(InsertOp(ElementId(b"a", 0), True, ROOT, Side.R))


def test_fuzz_messages_round_trip(variant):
    for seed in range(30):
        for rec in fuzz_execution(seed, 3, 30, variant).ops:
            assert decode_op(encode_op(rec.msg)) == rec.msg


# -- saved documents -----------------------------------------------------------

def replica_after(log, name, variant, kernel=None, upto=None):
    msgs = {r.stamp.key: r.msg for r in log.ops}
    rep = Replica(name, variant, kernel)
    keys = log.deliveries[name][:upto]
    for key in keys:
        rep.apply(msgs[key])
    rep.counter = sum(1 for k in keys if k[0] == name)
    return rep


class TestSaveFile:
    def test_empty_document(self):
        data = savefile.save(Replica("a"))
        assert data == b"FUG1\x01\x00\x01a\x00\x01\x01a\x00"
        assert savefile.load(data).values() == []

    def test_round_trip_fuzz(self, kernel, variant):
        for seed in range(15):
            log = fuzz_execution(seed, 3, 40, variant)
            for name in log.replicas:
                rep = replica_after(log, name, variant, kernel)
                data = savefile.save(rep)
                back = savefile.load(data, kernel)
                assert back.entries() == rep.entries()
                assert back.tree.structure() == rep.tree.structure()
                assert back.counter == rep.counter and back.variant is variant
                assert savefile.save(back) == data

    def test_non_text_values(self):
        rep = Replica("a")
        for k, v in enumerate([1, b"\x00", "long string", -5]):
            rep.insert(k, v)
        assert savefile.load(savefile.save(rep)).values() == [1, b"\x00", "long string", -5]

    def test_loaded_replica_keeps_generating_fresh_ids(self, variant):
        rep = Replica("a", variant)
        for k, ch in enumerate("abc"):
            rep.insert(k, ch)
        back = savefile.load(savefile.save(rep))
        assert back.insert(3, "d").id == ElementId(b"a", 3)

    def test_bad_magic(self):
        with pytest.raises(DecodeError):
            savefile.load(b"NOPE\x01")

    def test_unsupported_version(self):
        data = bytearray(savefile.save(Replica("a")))
        data[4] = 9
        with pytest.raises(UnsupportedVersionError):
            savefile.load(bytes(data))

    def test_every_truncation_rejected(self, variant):
        rep = replica_after(fuzz_execution(2, 2, 20, variant), b"r0", variant)
        data = savefile.save(rep)
        for k in range(len(data)):
            with pytest.raises(DecodeError):
                savefile.load(data[:k])

    def test_trailing_bytes(self):
        with pytest.raises(DecodeError):
            savefile.load(savefile.save(Replica("a")) + b"\x00")


def drive(seed, variant, swap_at=None, steps=120):
    """Random ops and causal deliveries; optionally replace a replica by a
    save/load copy of itself partway through."""
    rng = random.Random(seed)
    sim = Simulator(["p", "q", "r"], variant)
    for step in range(steps):
        if step == swap_at:
            name = sim.names[step % len(sim.names)]  # leave the rng stream untouched
            sim.replicas[name] = savefile.load(savefile.save(sim.replicas[name]))
        name = rng.choice(sim.names)
        ready = sim.ready(name)
        if ready and rng.random() < 0.4:
            sim.deliver(name, rng.choice(ready).key)
            continue
        n = sim.replicas[name].tree.visible_count
        if n and rng.random() < 0.25:
            sim.delete(name, rng.randrange(n))
        else:
            sim.insert(name, rng.randint(0, n), rng.choice("abc"))
    sim.sync_all()
    return sim.log


@given(seed=st.integers(0, 10**6), swap_at=st.integers(0, 119), variant=st.sampled_from(list(Variant)))
def test_mid_run_save_load_does_not_change_outcome(seed, swap_at, variant):
    plain = drive(seed, variant)
    reloaded = drive(seed, variant, swap_at)
    assert reloaded.converged()
    assert reloaded.final_states() == plain.final_states()
