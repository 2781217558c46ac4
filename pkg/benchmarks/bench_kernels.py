"""Compare the compiled and pure-Python tree kernels.

    python3 benchmarks/bench_kernels.py [--ops 20000] [--trace-ops 50000] [--json]

Each workload runs once per kernel on identical input; the final documents
are compared so a speedup never hides a divergence.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time

from fuguelist import core
from fuguelist.engine import Replica, Variant
from fuguelist.trace import ingest_trace


# Each workload takes (kernel, n, variant) and returns (replica, seconds),
# keeping input preparation out of the timed part.

def _timed(fn):
    start = time.perf_counter()
    rep = fn()
    return rep, time.perf_counter() - start


def typing_run(kernel: str, n: int, variant: Variant):
    def run():
        rep = Replica("bench", variant, kernel)
        for k in range(n):
            rep.insert(k, "x")
        return rep
    return _timed(run)


def random_edits(kernel: str, n: int, variant: Variant):
    def run():
        rng = random.Random(1)
        rep = Replica("bench", variant, kernel)
        for _ in range(n):
            size = rep.tree.visible_count
            if size and rng.random() < 0.3:
                rep.delete(rng.randrange(size))
            else:
                rep.insert(rng.randint(0, size), "y")
        return rep
    return _timed(run)


def remote_merge(kernel: str, n: int, variant: Variant):
    # four writers typing concurrently at random spots, merged at one replica
    rng = random.Random(2)
    writers = [Replica(f"w{k}", variant, kernel) for k in range(4)]
    msgs = []
    for _ in range(n):
        w = rng.choice(writers)
        msgs.append(w.insert(rng.randint(0, w.tree.visible_count), "z"))

    def run():
        rep = Replica("merge", variant, kernel)
        for m in msgs:
            rep.apply(m)
        return rep
    return _timed(run)


_TRACE = []


def trace_prefix(kernel: str, n: int, variant: Variant):
    if not _TRACE:
        _TRACE.append(ingest_trace())
    ops = _TRACE[0][:n]

    def run():
        rep = Replica("bench", variant, kernel)
        for op in ops:
            if op.char is None:
                rep.delete(op.position)
            else:
                rep.insert(op.position, op.char)
        return rep
    return _timed(run)


WORKLOADS = {
    "sequential typing": (typing_run, "ops"),
    "random edits": (random_edits, "ops"),
    "remote merge": (remote_merge, "ops"),
    "trace prefix": (trace_prefix, "trace_ops"),
}


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--ops", type=int, default=20_000)
    p.add_argument("--trace-ops", type=int, default=50_000)
    p.add_argument("--variant", choices=[v.value for v in Variant], default="fugue")
    p.add_argument("--json", action="store_true")
    args = p.parse_args(argv)
    variant = Variant(args.variant)
    kernels = sorted(core.KERNELS)
    if "cython" not in kernels:
        print("compiled kernel not built; timing the Python kernel only", file=sys.stderr)

    rows = []
    for name, (fn, size_arg) in WORKLOADS.items():
        n = getattr(args, size_arg)
        timings, texts = {}, set()
        for kernel in kernels:
            rep, timings[kernel] = fn(kernel, n, variant)
            texts.add(rep.text())
        if len(texts) != 1:
            print(f"{name}: kernels produced different documents", file=sys.stderr)
            return 1
        row = {"workload": name, "ops": n, **{f"{k}_s": round(t, 4) for k, t in timings.items()}}
        if len(timings) == 2:
            row["speedup"] = round(timings["python"] / timings["cython"], 2)
        rows.append(row)

    if args.json:
        print(json.dumps(rows, indent=2))
        return 0
    print(f"{'workload':<18} {'ops':>8} " + " ".join(f"{k + ' s':>10}" for k in kernels) + "   speedup")
    for row in rows:
        cols = " ".join(f"{row[k + '_s']:>10.3f}" for k in kernels)
        print(f"{row['workload']:<18} {row['ops']:>8} {cols}   {row.get('speedup', '-')}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
