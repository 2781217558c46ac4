"""Command-line entry point: ``fuguelist <command> ...``."""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path
from typing import Sequence

from . import oracles, savefile
from .engine import Replica, Variant
from .errors import FugueError
from .scriptfmt import dump_log, load_script
from .sim import fuzz_execution, run_script, state_text

CHECKS = ("convergence", "strong", "forward", "maximal", "characterization")
# FugueMax guarantees every check; Fugue is not maximally non-interleaving
DEFAULT_CHECKS = {Variant.FUGUE: ("convergence", "strong", "forward", "characterization"),
                  Variant.FUGUEMAX: CHECKS}


def _variant(text: str) -> Variant:
    try:
        return Variant(text.lower())
    except ValueError:
        raise argparse.ArgumentTypeError(f"unknown variant {text!r} (fugue or fuguemax)") from None


def _checks(text: str) -> tuple[str, ...]:
    names = tuple(n.strip() for n in text.split(",") if n.strip())
    bad = [n for n in names if n not in CHECKS]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown check(s) {', '.join(bad)}; choose from {', '.join(CHECKS)}")
    return names


def run_checks(log, variant: Variant, checks: Sequence[str]) -> list[str]:
    """Names and summaries of the failed checks."""
    failures = []
    if "convergence" in checks and not log.converged():
        failures.append("convergence: replicas hold different states")
    if "convergence" in checks and log.commutativity_failures:
        failures.append(f"convergence: {len(log.commutativity_failures)} non-commuting effector pairs")
    origins = oracles.extract_origins(log) if set(checks) - {"convergence"} else None
    order = oracles.union_order(log) if origins else None
    if "strong" in checks:
        v = oracles.check_strong_list_spec(log, order)
        if not v.passed:
            failures.append(v.summary())
    if "forward" in checks:
        v = oracles.check_forward_noninterleaving(log, order, origins=origins)
        if not v.passed:
            failures.append(v.summary())
    if "maximal" in checks:
        v = oracles.check_maximal_noninterleaving(log, order, origins=origins)
        if not v.passed:
            failures.append(v.summary())
    if "characterization" in checks:
        if oracles.characterization_order(log, variant, origins) != order:
            failures.append("characterization: order from origins differs from the engine's")
    return failures


def cmd_simulate(args) -> int:
    log = run_script(load_script(args.script), args.variant, args.kernel)
    for name in log.replicas:
        print(f"{name.decode('utf-8', 'replace')}: {state_text(log.final_state(name))!r}")
    if args.log:
        Path(args.log).write_text(dump_log(log), encoding="utf-8")
    failures = run_checks(log, args.variant, args.check) if args.check else []
    for f in failures:
        print(f"FAIL {f}")
    return 1 if failures else 0


def cmd_fuzz(args) -> int:
    checks = args.check or DEFAULT_CHECKS[args.variant]
    failed = 0
    start = time.perf_counter()
    for seed in range(args.seed, args.seed + args.runs):
        log = fuzz_execution(seed, args.replicas, args.ops, args.variant, args.kernel)
        failures = run_checks(log, args.variant, checks)
        if failures:
            failed += 1
            for f in failures:
                print(f"seed {seed}: FAIL {f}")
    took = time.perf_counter() - start
    print(f"{args.runs} runs, {args.replicas} replicas x {args.ops} ops, {args.variant.value}, "
          f"checks {','.join(checks)}: {failed} failed ({took:.1f} s)")
    return 1 if failed else 0


def cmd_audit(args) -> int:
    from .gallery.scorecard import build_scorecard

    card = build_scorecard()
    print(card.render())
    return 0 if card.ok else 1


def cmd_bench(args) -> int:
    from .trace import bench_replay, ingest_trace, splice_replay

    trace = ingest_trace(args.trace)
    report = bench_replay(trace, args.variant, args.repeat, args.kernel)
    if args.json:
        print(json.dumps(report.as_dict(), indent=2))
    else:
        print(report.render())
    ok = report.round_trip_identical
    if args.verify:
        expected = len(splice_replay(trace)) * args.repeat if args.repeat > 0 else 0
        if report.final_length != expected:
            print(f"FAIL final length {report.final_length} != {expected}")
            ok = False
    return 0 if ok else 1


def cmd_save(args) -> int:
    log = run_script(load_script(args.script), args.variant, args.kernel)
    sim_name = args.replica.encode() if args.replica else log.replicas[0]
    if sim_name not in log.deliveries:
        raise ValueError(f"script has no replica {args.replica!r}")
    # rebuild the replica from its own delivery order
    msgs = {r.stamp.key: r.msg for r in log.ops}
    rep = Replica(sim_name, args.variant, args.kernel)
    for key in log.deliveries[sim_name]:
        rep.apply(msgs[key])
    rep.counter = sum(1 for key in log.deliveries[sim_name] if key[0] == sim_name)
    data = savefile.save(rep)
    Path(args.out).write_bytes(data)
    print(f"saved {rep.tree.visible_count} visible of {len(rep.tree)} elements to {args.out} ({len(data)} bytes)")
    return 0


def cmd_load(args) -> int:
    data = Path(args.file).read_bytes()
    rep = savefile.load(data, args.kernel)
    print(repr(rep.text()))
    if savefile.save(rep) != data:
        print("FAIL re-saving the loaded document gives different bytes")
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fuguelist", description="Fugue list CRDT simulator, checkers and benchmarks")
    p.add_argument("--kernel", choices=("python", "cython"), default=None,
                   help="tree kernel (default: compiled when available)")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run a script and print every replica's final text")
    s.add_argument("script", help="script file or bundled fixture name")
    s.add_argument("--variant", type=_variant, default=Variant.FUGUE)
    s.add_argument("--log", help="write the execution log here")
    s.add_argument("--check", type=_checks, default=(), help="comma-separated oracles to run")
    s.set_defaults(func=cmd_simulate)

    f = sub.add_parser("fuzz", help="random executions checked by the oracles")
    f.add_argument("--seed", type=int, default=int(os.environ.get("FUGUELIST_SEED", "0")),
                   help="first seed (default $FUGUELIST_SEED or 0)")
    f.add_argument("--runs", type=int, default=100)
    f.add_argument("--replicas", type=int, default=4)
    f.add_argument("--ops", type=int, default=50)
    f.add_argument("--variant", type=_variant, default=Variant.FUGUEMAX)
    f.add_argument("--check", type=_checks, default=None,
                   help=f"comma-separated subset of {','.join(CHECKS)}")
    f.set_defaults(func=cmd_fuzz)

    a = sub.add_parser("audit", help="interleaving scorecard of the gallery algorithms")
    a.set_defaults(func=cmd_audit)

    b = sub.add_parser("bench", help="replay an editing trace and report metrics")
    b.add_argument("trace", nargs="?", default=None, help="trace file (default: bundled trace)")
    b.add_argument("--repeat", type=int, default=1)
    b.add_argument("--variant", type=_variant, default=Variant.FUGUE)
    b.add_argument("--json", action="store_true")
    b.add_argument("--verify", action="store_true", help="compare the final length with a plain string replay")
    b.set_defaults(func=cmd_bench)

    sv = sub.add_parser("save", help="run a script and save one replica's document")
    sv.add_argument("script")
    sv.add_argument("-o", "--out", required=True)
    sv.add_argument("--replica", help="replica to save (default: the first)")
    sv.add_argument("--variant", type=_variant, default=Variant.FUGUE)
    sv.set_defaults(func=cmd_save)

    ld = sub.add_parser("load", help="load a saved document, print it and check a re-save matches")
    ld.add_argument("file")
    ld.set_defaults(func=cmd_load)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "trace", "") is None:
        from .trace import DEFAULT_TRACE
        args.trace = DEFAULT_TRACE
    try:
        return args.func(args)
    except (FugueError, FileNotFoundError, ValueError) as exc:
        print(f"fuguelist: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
