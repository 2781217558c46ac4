"""Interleaving scorecard over the in-scope algorithms.

Cells marked ● (interleaving occurs), ⚡ (characters reordered) and ○✓ (no
interleaving, checked) are exercised by running the matching script. Cells
marked ○ (no example known) cannot be confirmed by one run and are carried
over unexercised.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from ..engine import Variant
from ..scriptfmt import load_script
from ..sim import ExecutionLog, run_script, state_text
from .. import oracles
from . import anomalies, ot
from .rga_variant import rga_variant_cycle_check

INTERLEAVES = "●"
NOT_FOUND = "○"
PROVEN = "○✓"
REORDERS = "⚡"

COLUMNS = ("forward", "backward", "backward_multi")
COLUMN_TITLES = ("forward (one replica)", "backward (one replica)", "backward (multi-replica)")

# what each user meant to type, per script
SESSIONS = {"forward": ("ab", "x"), "backward": ("ab", "x"), "backward_multi": ("ab", "x")}

EXPECTED: dict[str, tuple[str, str, tuple[str, str, str]]] = {
    "adOPTed": ("OT", "adOPTed", (INTERLEAVES, NOT_FOUND, INTERLEAVES)),
    "Jupiter": ("OT", "Jupiter", (INTERLEAVES, NOT_FOUND, NOT_FOUND)),
    "GOT": ("OT", "GOT", (INTERLEAVES, REORDERS, REORDERS)),
    "TTF": ("OT", "TTF", (INTERLEAVES, NOT_FOUND, INTERLEAVES)),
    "WOOT": ("CRDT", "WOOT", (INTERLEAVES, NOT_FOUND, NOT_FOUND)),
    "Treedoc": ("CRDT", "Treedoc", (INTERLEAVES, INTERLEAVES, INTERLEAVES)),
    "RGA": ("CRDT", "RGA", (PROVEN, INTERLEAVES, INTERLEAVES)),
    "Fugue": ("CRDT", "Fugue", (PROVEN, PROVEN, PROVEN)),
    "FugueMax": ("CRDT", "FugueMax", (PROVEN, PROVEN, PROVEN)),
}


def classify(text: str, sessions: tuple[str, ...]) -> str:
    """● if some user's characters are split up, ⚡ if they are together but
    out of order, otherwise ○."""
    reordered = False
    for s in sessions:
        where = sorted(text.index(ch) for ch in s)
        if where[-1] - where[0] != len(s) - 1:
            return INTERLEAVES
        if "".join(text[k] for k in where) != s:
            reordered = True
    return REORDERS if reordered else NOT_FOUND


@dataclass
class Cell:
    expected: str
    observed: str | None = None
    output: str | None = None
    note: str = ""

    @property
    def exercised(self) -> bool:
        return self.observed is not None

    @property
    def ok(self) -> bool:
        return not self.exercised or self.observed == self.expected


@dataclass
class Row:
    family: str
    algorithm: str
    cells: list[Cell]


@dataclass
class Extra:
    name: str
    expected: str
    observed: str

    @property
    def ok(self) -> bool:
        return self.expected == self.observed


@dataclass
class Scorecard:
    rows: list[Row] = field(default_factory=list)
    extras: list[Extra] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.ok for r in self.rows for c in r.cells) and all(e.ok for e in self.extras)

    def render(self) -> str:
        head = ["family", "algorithm", *COLUMN_TITLES]
        table = [head]
        for r in self.rows:
            cells = []
            for c in r.cells:
                if not c.exercised:
                    cells.append(f"{c.expected} (carried)")
                else:
                    mark = "" if c.ok else f" MISMATCH, observed {c.observed}"
                    cells.append(f"{c.expected} {c.output}{mark}")
            table.append([r.family, r.algorithm, *cells])
        widths = [max(len(row[k]) for row in table) for k in range(len(head))]
        lines = ["  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip() for row in table]
        lines.insert(1, "  ".join("-" * w for w in widths))
        lines.append("")
        for e in self.extras:
            status = "ok" if e.ok else "MISMATCH"
            lines.append(f"{e.name}: {e.observed!r} (expected {e.expected!r}) {status}")
        lines.append("")
        lines.append("all exercised cells reproduce" if self.ok else "SOME CELLS DO NOT REPRODUCE")
        return "\n".join(lines)


def _text_cell(expected: str, script: str, run: Callable[[], str]) -> Cell:
    text = run()
    return Cell(expected, classify(text, SESSIONS[script]), text)


def _log_cell(expected: str, script: str, log: ExecutionLog, variant: Variant | None = None) -> Cell:
    text = state_text(log.final_state(log.replicas[0]))
    observed = classify(text, SESSIONS[script])
    if expected == PROVEN and observed == NOT_FOUND:
        checks = [oracles.check_forward_noninterleaving(log)]
        if variant is Variant.FUGUEMAX:
            checks.append(oracles.check_maximal_noninterleaving(log))
        if variant is not None:
            checks.append(oracles.check_strong_list_spec(log))
        failed = [c.check for c in checks if not c.passed]
        observed = PROVEN if not failed else NOT_FOUND
        return Cell(expected, observed, text, "; ".join(failed))
    return Cell(expected, observed, text)


def _exercise(algorithm: str, column: str, expected: str) -> Cell:
    if expected == NOT_FOUND:
        return Cell(expected)
    if algorithm in ("adOPTed", "TTF"):
        run = {"forward": ot.run_adopted_forward_anomaly,
               "backward_multi": ot.run_adopted_backward_anomaly}[column]
        return _text_cell(expected, column, run)
    if algorithm == "Jupiter":
        return _text_cell(expected, column, lambda: ot.run_jupiter_anomaly(True))
    if algorithm == "GOT":
        # GOT's operations carry no site, so the multi-replica script issues
        # the same operations with the same causality as the one-replica one
        run = ot.got_forward if column == "forward" else ot.got_backward
        return _text_cell(expected, column, lambda: run().document)
    if algorithm == "WOOT":
        return _log_cell(expected, column, anomalies.woot_log(column))
    if algorithm == "Treedoc":
        return _log_cell(expected, column, anomalies.treedoc_log(column))
    if algorithm == "RGA":
        return _log_cell(expected, column, anomalies.rga_log(column))
    variant = Variant.FUGUE if algorithm == "Fugue" else Variant.FUGUEMAX
    return _log_cell(expected, column, run_script(load_script(column), variant), variant)


def build_scorecard() -> Scorecard:
    card = Scorecard()
    for algorithm, (family, label, expected) in EXPECTED.items():
        cells = [_exercise(algorithm, col, exp) for col, exp in zip(COLUMNS, expected)]
        card.rows.append(Row(family, label, cells))
    cycle = rga_variant_cycle_check().cycle
    oab, oa = ot.got_reversibility_counterexample()
    card.extras = [
        Extra("Jupiter, client text first, backward script", "axb", ot.run_jupiter_anomaly(False)),
        Extra("GOT reversibility IT(ET(Insert[a,1], Insert[b,1]), Insert[b,1])", "Insert[a,2]", repr(oab)),
        Extra("GOT reversibility holds", "False", str(oab == oa)),
        Extra("dense-ID merge of the two offline lines", "ebrgegasd", anomalies.run_denseid_fig1()),
        Extra("RGA variant sibling-order cycle", "c<b<d<c", "<".join(cycle + cycle[:1])),
    ]
    return card
