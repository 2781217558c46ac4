import dataclasses
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fuguelist import oracles
from fuguelist.engine import Replica, Variant
from fuguelist.gallery.anomalies import denseid_log, rga_log, treedoc_log, woot_log
from fuguelist.ids import END, TOMBSTONE, ElementId
from fuguelist.oracles import (START, LogIntegrityError, characterization_order, check_forest_roots,
                               check_forward_noninterleaving, check_left_origin_walk,
                               check_maximal_noninterleaving, check_strong_list_spec,
                               check_unsatisfiability_example, extract_origins, union_order)
from fuguelist.scriptfmt import load_script, parse_script
from fuguelist.sim import fuzz_execution, run_script, state_text


def by_value(log):
    return {op.msg.value: op.msg.id for op in log.inserts()}


def values_in(log, order):
    names = {v: k for k, v in by_value(log).items()}
    return "".join(names[e] for e in order)


def swap_in_snapshot(log, rng):
    """Copy of ``log`` with two entries of one delivery snapshot swapped, or
    None when no snapshot has two visible elements."""
    candidates = [(name, k) for name in log.replicas
                  for k, snap in enumerate(log.snapshots[name])
                  if sum(v is not TOMBSTONE for _, v in snap) >= 2]
    if not candidates:
        return None
    name, k = rng.choice(candidates)
    snap = list(log.snapshots[name][k])
    live = [j for j, (_, v) in enumerate(snap) if v is not TOMBSTONE]
    i, j = rng.sample(live, 2)
    snap[i], snap[j] = snap[j], snap[i]
    snapshots = dict(log.snapshots)
    snapshots[name] = list(snapshots[name])
    snapshots[name][k] = tuple(snap)
    return dataclasses.replace(log, snapshots=snapshots), name, tuple(snap)


class TestOrigins:
    def test_fig7_trees(self):
        log = run_script(load_script("fig7"), Variant.FUGUEMAX)
        ids = by_value(log)
        left, right = extract_origins(log)
        assert left.parent == {ids["A"]: START, ids["B"]: START, ids["C"]: START,
                               ids["X"]: ids["A"], ids["Y"]: ids["A"]}
        assert right.parent == {ids["A"]: END, ids["B"]: END, ids["C"]: END,
                                ids["X"]: ids["C"], ids["Y"]: ids["B"]}
        assert sorted(left.children()[ids["A"]]) == sorted([ids["X"], ids["Y"]])

    def test_sequential_typing_is_a_chain(self):
        log = run_script(parse_script('replicas a\ntype a 0 "abc"'))
        left, right = extract_origins(log)
        a, b, c = (ElementId(b"a", k) for k in range(3))
        assert left.parent == {a: START, b: a, c: b}
        assert left.ancestors(c) == [b, a, START]
        assert left.is_descendant(c, a) and not left.is_descendant(a, c)
        assert set(right.parent.values()) == {END}

    def test_origins_count_tombstones(self):
        log = run_script(parse_script("replicas a\ninsert a 0 x\ninsert a 1 y\ndelete a 1\ninsert a 1 z\n"))
        _, right = extract_origins(log)
        assert right.parent[ElementId(b"a", 2)] == ElementId(b"a", 1)

    def test_missing_pre_insert_state(self):
        log = run_script(parse_script("replicas a\ninsert a 0 x\ninsert a 1 y\n"))
        log.ops[1] = dataclasses.replace(log.ops[1], before=())
        with pytest.raises(LogIntegrityError):
            extract_origins(log)


class TestStrongListSpec:
    def test_single_replica(self):
        assert check_strong_list_spec(run_script(parse_script('replicas a\ntype a 0 "hello"\ndelete a 1')))

    def test_fuzz_logs(self, variant):
        for seed in range(25):
            verdict = check_strong_list_spec(fuzz_execution(seed, 4, 30, variant))
            assert verdict.passed, verdict.report()

    def test_swapped_snapshot_is_caught(self, variant):
        rng = random.Random(1)
        for seed in range(40):
            log = fuzz_execution(seed, 3, 20, variant)
            mutated = swap_in_snapshot(log, rng)
            if mutated is None:
                continue
            bad, name, snap = mutated
            verdict = check_strong_list_spec(bad)
            assert not verdict.passed
            hit = verdict.violations[0]
            assert hit.condition == "spec-(a)"
            assert (hit.replica, hit.state) == (name, snap)

    def test_misplaced_insert_fails_b(self):
        log = run_script(parse_script('replicas a\ntype a 0 "ab"'))
        rec = log.ops[1]
        log.ops[1] = dataclasses.replace(rec, index=0, before=rec.before)
        verdict = check_strong_list_spec(log)
        assert [v.condition for v in verdict.violations] == ["spec-(b)"]


class TestForward:
    def test_fig5(self, variant):
        log = run_script(load_script("fig5"), variant)
        order = union_order(log)
        assert values_in(log, order) == "AXBC"
        assert check_forward_noninterleaving(log, order)

    def test_single_replica(self):
        assert check_forward_noninterleaving(run_script(parse_script('replicas a\ntype a 0 "xyz"')))

    def test_dense_id_fig1_fails(self):
        verdict = check_forward_noninterleaving(denseid_log())
        assert not verdict.passed
        assert verdict.disagreements == 0

    @pytest.mark.parametrize("make", [lambda: woot_log("forward"), lambda: treedoc_log("forward")])
    def test_forward_anomalies_fail(self, make):
        assert not check_forward_noninterleaving(make())

    def test_rga_is_forward_noninterleaving(self):
        # RGA interleaves only backward
        assert check_forward_noninterleaving(rga_log("backward"))

    def test_both_implementations_flag_the_same_states(self):
        verdict = check_forward_noninterleaving(woot_log("forward"))
        conditions = {v.condition for v in verdict.violations}
        assert conditions == {"lemma3", "def1"}
        assert verdict.disagreements == 0


class TestMaximal:
    def test_fig7_fuguemax(self):
        log = run_script(load_script("fig7"), Variant.FUGUEMAX)
        order = union_order(log)
        assert values_in(log, order) == "AXYBC"
        assert check_maximal_noninterleaving(log, order)

    def test_fig7_low_y(self):
        fugue = run_script(load_script("fig7_low_y"), Variant.FUGUE)
        assert state_text(fugue.final_state(b"r1")) == "AYXBC"
        verdict = check_maximal_noninterleaving(fugue)
        assert not verdict.passed
        assert "def2-2" in {v.condition for v in verdict.violations}
        fmax = run_script(load_script("fig7_low_y"), Variant.FUGUEMAX)
        assert state_text(fmax.final_state(b"r1")) == "AXYBC"
        assert check_maximal_noninterleaving(fmax)

    def test_equal_origins_need_id_order(self, variant):
        log = run_script(parse_script("replicas a b\ninsert a 0 p\ninsert b 0 q\nsyncall\n"), variant)
        ids = by_value(log)
        assert check_maximal_noninterleaving(log, [ids["p"], ids["q"]])
        verdict = check_maximal_noninterleaving(log, [ids["q"], ids["p"]], exhaustive=False)
        assert [v.condition for v in verdict.violations] == ["def2-3"]

    def test_rga_backward_fails(self):
        assert not check_maximal_noninterleaving(rga_log("backward"))

    def test_end_as_origin_is_a_strengthening(self):
        # passing with the end treated as an origin implies passing without
        for seed in range(20):
            log = fuzz_execution(seed, 3, 25, Variant.FUGUE)
            if check_maximal_noninterleaving(log):
                assert check_maximal_noninterleaving(log, end_as_origin=False)

    def test_fugue_can_fail(self):
        failures = sum(not check_maximal_noninterleaving(fuzz_execution(s, 4, 30, Variant.FUGUE))
                       for s in range(60))
        assert failures > 0


class TestCharacterization:
    def test_fig7(self):
        log = run_script(load_script("fig7"), Variant.FUGUEMAX)
        assert values_in(log, characterization_order(log, Variant.FUGUEMAX)) == "AXYBC"

    def test_sequential(self):
        log = run_script(parse_script('replicas a\ntype a 0 "abc"\ntype a 1 "xy"'))
        assert values_in(log, characterization_order(log)) == "axybc"

    def test_fig7_low_y_per_variant(self):
        for variant, expected in ((Variant.FUGUE, "AYXBC"), (Variant.FUGUEMAX, "AXYBC")):
            log = run_script(load_script("fig7_low_y"), variant)
            assert values_in(log, characterization_order(log, variant)) == expected


@given(seed=st.integers(0, 10**6), replicas=st.integers(1, 4), ops=st.integers(1, 35),
       variant=st.sampled_from(list(Variant)))
def test_engine_satisfies_oracles(seed, replicas, ops, variant):
    log = fuzz_execution(seed, replicas, ops, variant)
    origins = extract_origins(log)
    order = union_order(log)
    assert check_strong_list_spec(log, order)
    forward = check_forward_noninterleaving(log, order, origins=origins)
    assert forward.passed and forward.disagreements == 0
    if variant is Variant.FUGUEMAX:
        assert check_maximal_noninterleaving(log, order, origins=origins)
    assert characterization_order(log, variant, origins) == order


@given(seed=st.integers(0, 10**6), ops=st.integers(1, 30), variant=st.sampled_from(list(Variant)))
def test_tree_shape_facts(seed, ops, variant):
    log = fuzz_execution(seed, 3, ops, variant)
    rep = Replica(b"\x00check", variant)
    for rec in log.ops:
        rep.apply(rec.msg)
    origins = extract_origins(log)
    assert check_left_origin_walk(log, rep.tree, origins)
    assert check_forest_roots(log, rep.tree, origins)


class TestUnsatisfiability:
    def test_four_replicas_interleave(self):
        demo = check_unsatisfiability_example(4)
        assert demo.definition_violated
        xs, ys = demo.alternating
        assert len(xs) == len(ys) == 2

    def test_single_replica_control(self):
        assert not check_unsatisfiability_example(1).definition_violated

    def test_three_replicas(self):
        demo = check_unsatisfiability_example(3)
        assert demo.definition_violated
        assert demo.alternating is None

    def test_fugue_variant_too(self):
        assert check_unsatisfiability_example(4, Variant.FUGUE).definition_violated


def test_verdict_report_shape():
    verdict = check_forward_noninterleaving(woot_log("forward"))
    row = verdict.report()[0]
    assert set(row) == {"condition", "elements", "replica", "state", "detail"}
    assert "FAIL" in verdict.summary()
    assert not bool(verdict)


def test_foreign_log_union_needs_factory():
    with pytest.raises(ValueError):
        union_order(woot_log("forward"))
