"""Acceptance criteria 1-10, one test each.

Every test records a one-line verdict; ``conftest.py`` prints them after the
run. Run alone with ``pytest tests/test_acceptance.py -v``.
"""

import random
import time
from dataclasses import dataclass, field

import pytest

from fuguelist import oracles
from fuguelist.codec import decode_op, encode_op
from fuguelist.engine import DeleteOp, InsertOp, Variant
from fuguelist.gallery import ot
from fuguelist.gallery.anomalies import (run_denseid_fig1, run_rga_backward_anomaly,
                                         run_treedoc_anomalies, run_woot_anomaly)
from fuguelist.gallery.rga_variant import rga_variant_cycle_check
from fuguelist.gallery.scorecard import INTERLEAVES, build_scorecard, classify
from fuguelist.ids import END, ROOT, ElementId, Side
from fuguelist.scriptfmt import fixture_names, load_script
from fuguelist.sim import enumerate_delivery_orders, fuzz_execution, run_script, state_text
from fuguelist.trace import bench_replay, ingest_trace, replay, splice_replay

from test_codec import drive
from test_oracles import swap_in_snapshot

SEEDS = 1000
REPLICAS, OPS = 4, 50
SMALL_SEEDS = 60
TIME_LIMIT = 120.0


def verdict(record_property, number, ok, detail):
    record_property("criterion", f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")


@dataclass
class VariantStats:
    logs: int = 0
    diverged: list = field(default_factory=list)
    commutativity: list = field(default_factory=list)
    strong_failed: list = field(default_factory=list)
    mutations: int = 0
    mutations_caught: int = 0
    forward_failed: list = field(default_factory=list)
    disagreements: int = 0
    maximal_failed: list = field(default_factory=list)
    characterization_failed: list = field(default_factory=list)
    small_logs: int = 0
    orders: int = 0
    small_diverged: list = field(default_factory=list)
    seconds_convergence: float = 0.0
    seconds_oracles: float = 0.0


def _check_log(log, variant, stats, tag, rng):
    t = time.perf_counter()
    origins = oracles.extract_origins(log)
    order = oracles.union_order(log)
    if not oracles.check_strong_list_spec(log, order):
        stats.strong_failed.append(tag)
    mutated = swap_in_snapshot(log, rng)
    if mutated is not None:
        stats.mutations += 1
        caught = oracles.check_strong_list_spec(mutated[0], order)
        stats.mutations_caught += not caught.passed
    fwd = oracles.check_forward_noninterleaving(log, order, origins=origins)
    stats.disagreements += fwd.disagreements
    if fwd.violations:
        stats.forward_failed.append(tag)
    if variant is Variant.FUGUEMAX and not oracles.check_maximal_noninterleaving(log, order, origins=origins):
        stats.maximal_failed.append(tag)
    engine = [i for i, _ in log.final_state(log.replicas[0])]
    if oracles.characterization_order(log, variant, origins) != engine:
        stats.characterization_failed.append(tag)
    stats.seconds_oracles += time.perf_counter() - t


@pytest.fixture(scope="session")
def fuzz_results():
    """Criterion 1's logs, generated once; every oracle runs on each and only
    the tallies are kept."""
    results = {}
    rng = random.Random(20231016)
    for variant in Variant:
        stats = VariantStats()
        for seed in range(SEEDS):
            t = time.perf_counter()
            log = fuzz_execution(seed, REPLICAS, OPS, variant)
            stats.logs += 1
            if not log.converged():
                stats.diverged.append(seed)
            if log.commutativity_failures:
                stats.commutativity.append(seed)
            stats.seconds_convergence += time.perf_counter() - t
            _check_log(log, variant, stats, seed, rng)
        small = [(f"fuzz{seed}x{n}", fuzz_execution(seed, 2 + seed % 3, n, variant))
                 for seed in range(SMALL_SEEDS) for n in range(1, 7)]
        small += [(name, run_script(load_script(name), variant)) for name in fixture_names()]
        for tag, log in small:
            if len(log.ops) > 6:
                continue
            t = time.perf_counter()
            stats.small_logs += 1
            runs = enumerate_delivery_orders(log)
            stats.orders += len(runs)
            finals = {r.state for r in runs}
            if len(finals) != 1 or (log.converged() and finals != {log.final_state(log.replicas[0])}):
                stats.small_diverged.append(tag)
            stats.seconds_convergence += time.perf_counter() - t
            if log.converged():
                _check_log(log, variant, stats, tag, rng)
        results[variant] = stats
    return results


def test_criterion_1_convergence(fuzz_results, record_property):
    total = sum(s.seconds_convergence for s in fuzz_results.values())
    problems = {v.value: (s.diverged, s.commutativity, s.small_diverged) for v, s in fuzz_results.items()}
    ok = all(not any(p) for p in problems.values()) and total < TIME_LIMIT
    orders = sum(s.orders for s in fuzz_results.values())
    small = sum(s.small_logs for s in fuzz_results.values())
    verdict(record_property, 1, ok,
            f"{SEEDS} seeds x {REPLICAS} replicas x {OPS} ops per variant converged; "
            f"{small} executions of <= 6 ops, {orders} delivery orders; {total:.1f} s")
    assert ok, (problems, total)


def test_criterion_2_strong_list_spec(fuzz_results, record_property):
    failed = {v.value: s.strong_failed for v, s in fuzz_results.items() if s.strong_failed}
    mutations = sum(s.mutations for s in fuzz_results.values())
    caught = sum(s.mutations_caught for s in fuzz_results.values())
    ok = not failed and mutations > 0 and caught == mutations
    verdict(record_property, 2, ok, f"strong list spec on all logs; swapped snapshots caught {caught}/{mutations}")
    assert ok, failed


def test_criterion_3_forward(fuzz_results, record_property):
    failed = {v.value: s.forward_failed for v, s in fuzz_results.items() if s.forward_failed}
    disagreements = sum(s.disagreements for s in fuzz_results.values())
    ok = not failed and disagreements == 0
    verdict(record_property, 3, ok, f"forward non-interleaving on all logs; {disagreements} disagreements")
    assert ok, failed


def test_criterion_4_maximal(fuzz_results, record_property):
    stats = fuzz_results[Variant.FUGUEMAX]
    ok = not stats.maximal_failed
    verdict(record_property, 4, ok, f"maximal non-interleaving on all {stats.logs + stats.small_logs} FugueMax logs")
    assert ok, stats.maximal_failed[:10]


def test_criterion_5_characterization(fuzz_results, record_property):
    failed = {v.value: s.characterization_failed for v, s in fuzz_results.items() if s.characterization_failed}
    ok = not failed
    verdict(record_property, 5, ok, "characterization order equals the engine order for both variants")
    assert ok, failed


def _text(log, replica="r1"):
    return state_text(log.final_state(replica.encode()))


def test_criterion_6_figures(record_property):
    checks = {}
    checks["fig5 AXBC"] = all(_text(run_script(load_script("fig5"), v)) == "AXBC" for v in Variant)
    fig7 = run_script(load_script("fig7"), Variant.FUGUEMAX)
    checks["fig7 AXYBC"] = {state_text(s) for s in fig7.final_states().values()} == {"AXYBC"}

    ids = {op.msg.value: op.msg.id for op in fig7.inserts()}
    left, right = oracles.extract_origins(fig7)
    checks["fig8 origin trees"] = (
        left.parent == {ids["A"]: ROOT, ids["B"]: ROOT, ids["C"]: ROOT, ids["X"]: ids["A"], ids["Y"]: ids["A"]}
        and right.parent == {ids["A"]: END, ids["B"]: END, ids["C"]: END, ids["X"]: ids["C"], ids["Y"]: ids["B"]})

    low_fugue = run_script(load_script("fig7_low_y"), Variant.FUGUE)
    low_max = run_script(load_script("fig7_low_y"), Variant.FUGUEMAX)
    checks["low-Y Fugue AYXBC"] = _text(low_fugue) == "AYXBC"
    checks["low-Y Fugue fails maximal"] = not oracles.check_maximal_noninterleaving(low_fugue).passed
    checks["low-Y FugueMax AXYBC"] = _text(low_max) == "AXYBC"

    shop = run_script(load_script("shopping"), Variant.FUGUE)
    text = _text(shop, "a")
    blocks = ("\nFruit:\n* apples\n* bananas", "\nBakery:\n* bread\n* cake")
    checks["shopping blocks contiguous"] = shop.converged() and all(b in text for b in blocks)

    ok = all(checks.values())
    verdict(record_property, 6, ok, "; ".join(f"{k} {'ok' if v else 'FAILED'}" for k, v in checks.items()))
    assert ok, checks


def test_criterion_7_gallery(record_property):
    got_a, got_b = ot.got_reversibility_counterexample()
    checks = {
        "adOPTed/TTF forward": ot.run_adopted_forward_anomaly() == "axb",
        "adOPTed/TTF backward": ot.run_adopted_backward_anomaly() == "axb",
        "Jupiter server-first": ot.run_jupiter_anomaly(True) == "axb",
        "Jupiter flipped": ot.run_jupiter_anomaly(False) == "axb",
        "GOT forward": ot.got_forward().document == "axb",
        "GOT backward": ot.got_backward().document == "xba",
        "GOT reversibility": (repr(got_a), repr(got_b)) == ("Insert[a,2]", "Insert[a,1]"),
        "WOOT": run_woot_anomaly() == "axb",
        "Treedoc": (lambda r: r["forward"] == r["backward"] == "axb")(run_treedoc_anomalies()),
        "RGA backward": run_rga_backward_anomaly() == "axb",
        "dense-ID fig1": run_denseid_fig1() == "ebrgegasd",
        "RGA variant cycle": rga_variant_cycle_check().cycle == ("c", "b", "d"),
    }
    contiguous = True
    for script in ("forward", "backward", "backward_multi", "fig1"):
        for variant in Variant:
            log = run_script(load_script(script), variant)
            final = state_text(log.final_state(log.replicas[0]))
            if script == "fig1":
                contiguous &= "\neggs" in final and "\nbread" in final
            else:
                contiguous &= classify(final, ("ab", "x")) != INTERLEAVES
            contiguous &= oracles.check_forward_noninterleaving(log).passed
    checks["Fugue/FugueMax contiguous"] = contiguous
    checks["scorecard"] = build_scorecard().ok
    ok = all(checks.values())
    bad = [k for k, v in checks.items() if not v]
    verdict(record_property, 7, ok, f"{len(checks) - len(bad)}/{len(checks)} gallery outputs reproduced"
            + (f"; failed {bad}" if bad else ""))
    assert ok, bad


@pytest.fixture(scope="module")
def trace():
    return ingest_trace()


def test_criterion_8_trace(trace, record_property):
    start = time.perf_counter()
    report = bench_replay(trace, Variant.FUGUE)
    oracle_text = splice_replay(trace)
    rep = replay(trace, Variant.FUGUE)
    identical = rep.text() == oracle_text
    full_run = time.perf_counter() - start
    del rep

    t = time.perf_counter()
    big = replay(trace, Variant.FUGUE, repeat=100)
    repeat_length = big.tree.visible_count
    repeat_seconds = time.perf_counter() - t
    del big

    checks = {
        "length 104,852": report.final_length == len(oracle_text) == 104_852,
        "identical to splice": identical,
        "repeat=100 length": repeat_length == 10_485_200,
        ">= 10k ops/s": report.ops_per_sec >= 10_000,
        "save/load identity": report.round_trip_identical,
        "< 60 s": full_run < 60,
    }
    ok = all(checks.values())
    verdict(record_property, 8, ok,
            f"{report.ops:,} ops at {report.ops_per_sec:,.0f} ops/s; full run {full_run:.1f} s; "
            f"repeat=100 -> {repeat_length:,} chars in {repeat_seconds:.0f} s; "
            f"save {report.save_bytes:,} B for {report.text_bytes:,} B of text"
            + ("" if ok else f"; failed {[k for k, v in checks.items() if not v]}"))
    assert ok, checks


def _random_message(rng):
    name = bytes(rng.randrange(256) for _ in range(rng.randint(1, 6)))
    ident = ElementId(name, rng.choice([0, rng.randrange(1 << 20), rng.randrange(1 << 62)]))
    if rng.random() < 0.3:
        return DeleteOp(ident)
    value = rng.choice([chr(rng.randrange(32, 0x2FFF)), rng.randrange(-10**12, 10**12), bytes([rng.randrange(256)])])
    parent = ROOT if rng.random() < 0.2 else ElementId(b"p" + name, rng.randrange(1000))
    side = rng.choice(list(Side))
    ro = rng.choice([None, END, ElementId(b"q", rng.randrange(1000))]) if side is Side.R else None
    return InsertOp(ident, value, parent, side, ro)


def test_criterion_9_serialization(record_property):
    rng = random.Random(9)
    msgs = []
    seed = 0
    while len(msgs) < 5_000:
        msgs += [r.msg for r in fuzz_execution(f"codec{seed}", 3, 40, Variant(["fugue", "fuguemax"][seed % 2])).ops]
        seed += 1
    msgs = msgs[:5_000] + [_random_message(rng) for _ in range(5_000)]
    bad = [m for m in msgs if decode_op(encode_op(m)) != m]

    changed = []
    runs = 0
    for s in range(40):
        for variant in Variant:
            plain = drive(s, variant)
            for swap_at in (5, 40, 90):
                runs += 1
                again = drive(s, variant, swap_at)
                if not again.converged() or again.final_states() != plain.final_states():
                    changed.append((s, variant.value, swap_at))
    ok = not bad and not changed
    verdict(record_property, 9, ok, f"{len(msgs):,} messages round-tripped ({len(bad)} failed); "
            f"{runs} mid-run save/load cycles, {len(changed)} changed the result")
    assert ok, (bad[:3], changed[:3])


def test_criterion_10_unsatisfiability(record_property):
    demos = [oracles.check_unsatisfiability_example(4, v) for v in Variant for _ in range(3)]
    ok = all(d.definition_violated and d.alternating is not None for d in demos)
    first = demos[0]
    verdict(record_property, 10, ok, f"4 concurrent inserts -> {''.join(first.order)}; "
            f"{len(first.witnesses)} interleaved (X, Y) pairs, alternating split {'found' if first.alternating else 'missing'}")
    assert ok


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-v"]))
