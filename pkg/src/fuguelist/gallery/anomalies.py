"""Replays of the interleaving scripts on the gallery CRDTs.

The CRDTs plug into the simulator as replica factories, so each run yields a
regular execution log that the oracles can inspect.
"""

from __future__ import annotations

from typing import Any, Callable

from ..errors import FugueError
from ..ids import TOMBSTONE
from ..scriptfmt import load_script
from ..sim import ExecutionLog, run_script, state_text
from .denseid import FIG1_IDS, DenseIdReplica, PinnedAllocator, midpoint
from .rga import RgaReplica
from .treedoc import TreedocReplica
from .woot import WootReplica


def run_fixture(name: str, factory: Callable[[bytes], Any], algorithm: str) -> ExecutionLog:
    log = run_script(load_script(name), factory=factory, algorithm=algorithm)
    if not log.converged():
        raise FugueError(f"{algorithm} replicas diverged on {name}")
    return log


def final_text(log: ExecutionLog) -> str:
    return state_text(log.final_state(log.replicas[0]))


def woot_log(script: str) -> ExecutionLog:
    return run_fixture(script, WootReplica, "woot")


def run_woot_anomaly() -> str:
    return final_text(woot_log("forward"))


# Treedoc pins: the first position's child bit and, through site ranks, the
# disambiguator order the examples assume (d_a < d_x forward, d_x < d_b backward).
TREEDOC_PINS = {
    "forward": dict(root_bit=1, site_rank={}),
    "backward": dict(root_bit=0, site_rank={b"A": 1, b"B": 0}),
    "backward_multi": dict(root_bit=0, site_rank={b"A": 1, b"B": 0, b"C": 1}),
    "control": dict(root_bit=1, site_rank={}),
}


def treedoc_log(script: str) -> ExecutionLog:
    pins = TREEDOC_PINS.get(script, TREEDOC_PINS["control"])
    return run_fixture(script, lambda n: TreedocReplica(n, **pins), "treedoc")


def run_treedoc_anomalies() -> dict[str, str]:
    return {s: final_text(treedoc_log(s)) for s in ("forward", "backward", "backward_multi")}


# RGA pins: site priorities with A < B, and C below B for the three-replica run.
RGA_PINS = {
    "backward_multi": {b"C": 0, b"A": 1, b"B": 2},
}


def rga_log(script: str) -> ExecutionLog:
    ranks = RGA_PINS.get(script, {b"A": 0, b"B": 1})
    return run_fixture(script, lambda n: RgaReplica(n, site_rank=ranks), "rga")


def run_rga_backward_anomaly() -> str:
    return final_text(rga_log("backward"))


def denseid_log(script: str = "fig1", allocation: str = "figure") -> ExecutionLog:
    """``allocation="figure"`` hands out the figure's ids; ``"midpoint"``
    halves each gap instead."""
    if allocation == "figure":
        def factory(n: bytes) -> DenseIdReplica:
            return DenseIdReplica(n, PinnedAllocator(FIG1_IDS[n]))
    elif allocation == "midpoint":
        def factory(n: bytes) -> DenseIdReplica:
            return DenseIdReplica(n, midpoint)
    else:
        raise ValueError(f"unknown allocation {allocation!r}")
    return run_fixture(script, factory, "dense-id")


def run_denseid_fig1(allocation: str = "figure") -> str:
    """The merged body between the two newlines that follow "milk"."""
    text = final_text(denseid_log("fig1", allocation))
    head, _, rest = text.partition("\n\n")
    if head != "milk":
        raise FugueError(f"unexpected merge {text!r}")
    return rest.rstrip("\n")


def visible_values(log: ExecutionLog) -> list[Any]:
    return [v for _, v in log.final_state(log.replicas[0]) if v is not TOMBSTONE]
