import os

import pytest
from hypothesis import HealthCheck, settings

from fuguelist import core
from fuguelist.engine import InsertOp, Replica, Variant
from fuguelist.ids import END, ROOT, ElementId, Side

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=600, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

KERNELS = sorted(core.KERNELS)


@pytest.fixture(params=KERNELS)
def kernel(request):
    return request.param


@pytest.fixture(params=list(Variant), ids=lambda v: v.value)
def variant(request):
    return request.param


def eid(name: str, counter: int = 0) -> ElementId:
    return ElementId(name.encode(), counter)


def build_abcdef(kernel=None, variant=Variant.FUGUE) -> Replica:
    """Tree for "abcdef": c is the root's right child with left children a, b
    and right child e; e has left child d and right child f."""
    rep = Replica("obs", variant, kernel)
    end = END if variant is Variant.FUGUEMAX else None
    for msg in (
        InsertOp(eid("c"), "c", ROOT, Side.R, end),
        InsertOp(eid("a"), "a", eid("c"), Side.L),
        InsertOp(eid("b"), "b", eid("c"), Side.L),
        InsertOp(eid("e"), "e", eid("c"), Side.R, end),
        InsertOp(eid("d"), "d", eid("e"), Side.L),
        InsertOp(eid("f"), "f", eid("e"), Side.R, end),
    ):
        rep.apply(msg)
    return rep


def pytest_terminal_summary(terminalreporter):
    lines = []
    for key in ("passed", "failed"):
        for report in terminalreporter.stats.get(key, []):
            if getattr(report, "when", "call") != "call":
                continue
            lines += [v for k, v in report.user_properties if k == "criterion"]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
