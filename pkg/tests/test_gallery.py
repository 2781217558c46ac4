import itertools

import pytest

from fuguelist import oracles
from fuguelist.engine import Variant
from fuguelist.gallery import ot
from fuguelist.gallery.anomalies import (denseid_log, final_text, rga_log, run_denseid_fig1,
                                         run_rga_backward_anomaly, run_treedoc_anomalies,
                                         run_woot_anomaly, treedoc_log, woot_log)
from fuguelist.gallery.denseid import DenseIdReplica, PinnedAllocator, midpoint
from fuguelist.gallery.rga_variant import fig9_ops, precedes, rga_variant_cycle_check
from fuguelist.gallery.scorecard import INTERLEAVES, NOT_FOUND, PROVEN, REORDERS, build_scorecard, classify
from fuguelist.gallery.treedoc import TreedocReplica
from fuguelist.gallery.woot import BEGIN, FINISH, WootReplica
from fuguelist.scriptfmt import load_script
from fuguelist.sim import run_script, state_text


class TestTtf:
    def test_same_position_lower_site_stays(self):
        assert ot.ttf_transform(ot.ins(1, "a", "A"), ot.ins(1, "x", "B")) == ot.ins(1, "a", "A")

    def test_later_position_shifts(self):
        assert ot.ttf_transform(ot.ins(2, "b", "A"), ot.ins(1, "x", "B")) == ot.ins(3, "b", "A")

    def test_far_right_op_has_no_effect(self):
        assert ot.ttf_transform(ot.ins(1, "a", "A"), ot.ins(50, "x", "B")) == ot.ins(1, "a", "A")

    def test_anomalies(self):
        assert ot.run_adopted_forward_anomaly() == "axb"
        assert ot.run_adopted_backward_anomaly() == "axb"

    def test_backward_single_replica_does_not_interleave(self):
        assert classify(ot.run_adopted_backward_single(), ("ab", "x")) != INTERLEAVES

    def test_control(self):
        assert ot.run_adopted_control() == "ab"

    def test_ops_are_one_based_inserts(self):
        with pytest.raises(ValueError):
            ot.ins(0, "a")
        with pytest.raises(ValueError):
            ot.TransformOp("del", 1, "a")
        assert repr(ot.ins(2, "b", "A")) == "ins(2,b,A)"


class TestJupiter:
    @pytest.mark.parametrize("server_first", [True, False])
    def test_anomaly(self, server_first):
        assert ot.run_jupiter_anomaly(server_first) == "axb"

    def test_single_client(self):
        assert ot.run_jupiter_single_client("hello") == "hello"


class TestGot:
    def test_forward(self):
        state = ot.got_forward()
        assert state.document == "axb"
        assert state.hb == [ot.Insert("a", 1), ot.Insert("x", 2), ot.Insert("b", 3)]

    def test_backward_reorders(self):
        assert ot.got_backward().document == "xba"

    def test_control(self):
        assert ot.got_control().document == "ab"

    def test_reversibility_fails(self):
        got, original = ot.got_reversibility_counterexample()
        assert (repr(got), repr(original)) == ("Insert[a,2]", "Insert[a,1]")
        assert got != original

    def test_it_et_pairs(self):
        assert ot.it_ii(ot.Insert("a", 1), ot.Insert("b", 1)) == ot.Insert("a", 2)
        assert ot.et_ii(ot.Insert("a", 2), ot.Insert("b", 1)) == ot.Insert("a", 1)
        assert ot.et_ii(ot.Insert("a", 1), ot.Insert("b", 1)) == ot.Insert("a", 1)


class TestWoot:
    def test_anomaly(self):
        assert run_woot_anomaly() == "axb"

    def test_empty_document_insert(self):
        rep = WootReplica("a")
        char = rep.insert(0, "x")
        assert (char.prev, char.next) == (BEGIN, FINISH)
        assert rep.text() == "x"

    def test_concurrent_root_inserts_converge(self):
        a, b = WootReplica("a"), WootReplica("b")
        ops = [a.insert(0, "p"), b.insert(0, "q")]
        results = set()
        for order in itertools.permutations(ops):
            rep = WootReplica("obs")
            for op in order:
                rep.apply(op)
            results.add(rep.text())
        assert results == {"pq"}

    def test_deletes(self):
        rep = WootReplica("a")
        rep.insert(0, "x")
        rep.insert(1, "y")
        rep.delete(0)
        assert rep.text() == "y"


class TestTreedoc:
    def test_anomalies(self):
        assert run_treedoc_anomalies() == {"forward": "axb", "backward": "axb", "backward_multi": "axb"}

    def test_control(self):
        assert final_text(treedoc_log("control")) == "ab"

    def test_positions_sorted(self):
        rep = TreedocReplica("a")
        for k, ch in enumerate("hello"):
            rep.insert(k, ch)
        rep.insert(0, "!")
        rep.insert(3, "?")
        assert rep.text() == "!he?llo"
        assert rep.positions() == sorted(rep.positions())


class TestRga:
    def test_backward(self):
        assert run_rga_backward_anomaly() == "axb"

    def test_forward_does_not_interleave(self):
        assert final_text(rga_log("forward")) == "xab"


class TestDenseId:
    def test_fig1_figure_ids(self):
        assert run_denseid_fig1() == "ebrgegasd"

    def test_fig1_midpoint(self):
        # halving every gap gives a different, still interleaved, merge
        out = run_denseid_fig1("midpoint")
        assert sorted(out) == sorted("ebrgegasd") and out != "ebrgegasd"
        assert not oracles.check_forward_noninterleaving(denseid_log("fig1", "midpoint"))

    def test_pinned_allocator_runs_out(self):
        rep = DenseIdReplica("a", PinnedAllocator([0.5]))
        rep.insert(0, "x")
        with pytest.raises(ValueError):
            rep.insert(1, "y")

    def test_midpoint(self):
        from fractions import Fraction
        assert midpoint(Fraction(0), Fraction(1)) == Fraction(1, 2)

    def test_unknown_allocation(self):
        with pytest.raises(ValueError):
            denseid_log("fig1", "random")


class TestRgaVariant:
    def test_sibling_rule(self):
        ops = fig9_ops()
        assert precedes(ops["e"], ops["d"])

    def test_concurrent_rule(self):
        ops = fig9_ops()
        assert precedes(ops["b"], ops["d"])
        assert precedes(ops["d"], ops["c"])

    def test_cycle(self):
        report = rga_variant_cycle_check()
        assert report.cycle == ("c", "b", "d")
        assert {("c", "b"), ("b", "d"), ("d", "c")} <= report.relation

    def test_timestamp_order_enforced(self):
        with pytest.raises(ValueError):
            fig9_ops(te=3, tc=2)


@pytest.mark.parametrize("script", ["forward", "backward", "backward_multi", "fig1", "shopping"])
def test_fugue_keeps_sessions_contiguous(script, variant):
    log = run_script(load_script(script), variant)
    assert log.converged()
    assert oracles.check_forward_noninterleaving(log)
    if variant is Variant.FUGUEMAX:
        assert oracles.check_maximal_noninterleaving(log)


def test_fugue_outputs_on_gallery_scripts(variant):
    texts = {s: state_text(run_script(load_script(s), variant).final_state(b"A"))
             for s in ("forward", "backward", "backward_multi")}
    assert texts["forward"] in ("abx", "xab")
    assert texts["backward"] in ("abx", "xab")
    assert texts["backward_multi"] in ("abx", "xab")


def test_classify():
    assert classify("axb", ("ab", "x")) == INTERLEAVES
    assert classify("abx", ("ab", "x")) != INTERLEAVES


def test_scorecard_reproduces_table():
    card = build_scorecard()
    assert card.ok, card.render()
    rows = {row.algorithm: row for row in card.rows}
    assert {"Fugue", "FugueMax"} <= set(rows)
    for name in ("Fugue", "FugueMax"):
        assert all(c.expected == PROVEN and c.exercised and c.ok for c in rows[name].cells)
    assert all(c.exercised for row in card.rows for c in row.cells if c.expected != NOT_FOUND)
    assert all(e.ok for e in card.extras)
    symbols = {c.expected for row in card.rows for c in row.cells}
    assert {INTERLEAVES, NOT_FOUND, PROVEN, REORDERS} <= symbols
    rendered = card.render()
    assert "FugueMax" in rendered and INTERLEAVES in rendered
