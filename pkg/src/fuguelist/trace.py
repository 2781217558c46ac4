"""Editing-trace ingestion and replay.

The trace is the automerge-perf edit list: ``[position, delete_count,
inserted_text...]`` entries, either as a bare JSON array or under an
``"edits"`` key, optionally gzipped. Entries are normalized to
single-character operations.
"""

from __future__ import annotations

import gzip
import json
import resource
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import IO, Any, Iterator, Sequence

from .codec import encode_op
from .engine import Replica, Variant
from .errors import TraceFormatError
from . import savefile

DEFAULT_TRACE = Path(__file__).resolve().parents[2] / "data" / "editing-trace.json.gz"


@dataclass(frozen=True, slots=True)
class TraceOp:
    position: int
    delete: int  # 0 or 1 after normalization
    char: str | None = None


@dataclass
class EditTrace:
    ops: list[TraceOp] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.ops)

    def __iter__(self) -> Iterator[TraceOp]:
        return iter(self.ops)

    def __getitem__(self, k):
        return EditTrace(self.ops[k]) if isinstance(k, slice) else self.ops[k]

    @property
    def inserts(self) -> int:
        return sum(1 for op in self.ops if op.char is not None)

    @property
    def deletes(self) -> int:
        return sum(1 for op in self.ops if op.delete)


def _open(source: str | Path | IO[bytes]) -> Any:
    if hasattr(source, "read"):
        raw = source.read()
    else:
        raw = Path(source).read_bytes()
    if raw[:2] == b"\x1f\x8b":
        raw = gzip.decompress(raw)
    if not raw.strip():
        return []
    return json.loads(raw)


def ingest_trace(source: str | Path | IO[bytes] = DEFAULT_TRACE) -> EditTrace:
    data = _open(source)
    if isinstance(data, dict):
        data = data.get("edits")
    if not isinstance(data, list):
        raise TraceFormatError("expected a JSON array of edits", 0)
    ops: list[TraceOp] = []
    length = 0
    for k, entry in enumerate(data):
        if not isinstance(entry, list) or len(entry) < 2:
            raise TraceFormatError(f"expected [position, delete_count, text...], got {entry!r}", k)
        pos, ndel, *texts = entry
        if not (isinstance(pos, int) and isinstance(ndel, int)) or pos < 0 or ndel < 0:
            raise TraceFormatError("position and delete count must be nonnegative integers", k)
        if not all(isinstance(t, str) for t in texts):
            raise TraceFormatError("inserted content must be strings", k)
        if pos + ndel > length:
            raise TraceFormatError(f"edit at {pos} deleting {ndel} exceeds document length {length}", k)
        for _ in range(ndel):
            ops.append(TraceOp(pos, 1))
        length -= ndel
        at = pos
        for ch in "".join(texts):
            ops.append(TraceOp(at, 0, ch))
            at += 1
            length += 1
    return EditTrace(ops)


def splice_replay(trace: Sequence[TraceOp] | EditTrace, repeat: int = 1) -> str:
    """Apply the trace directly to a character list."""
    doc: list[str] = []
    for _ in range(repeat):
        for op in trace:
            if op.char is None:
                del doc[op.position]
            else:
                doc.insert(op.position, op.char)
    return "".join(doc)


def replay(trace: Sequence[TraceOp] | EditTrace, variant: Variant | str = Variant.FUGUE,
           repeat: int = 1, kernel: str | None = None, name: str = "trace") -> Replica:
    """Generate every op on one replica. Repeats run the trace again from the
    start of the document, unshifted."""
    rep = Replica(name, variant, kernel)
    for _ in range(repeat):
        for op in trace:
            if op.char is None:
                rep.delete(op.position)
            else:
                rep.insert(op.position, op.char)
    return rep


@dataclass
class BenchReport:
    variant: str
    kernel: str
    repeat: int
    ops: int = 0
    seconds: float = 0.0
    ops_per_sec: float = 0.0
    wire_bytes_per_op: float = 0.0
    final_length: int = 0
    text_bytes: int = 0
    save_bytes: int = 0
    save_seconds: float = 0.0
    load_seconds: float = 0.0
    round_trip_identical: bool = True
    # estimated from array sizes; not comparable to a managed-heap measurement
    tree_bytes_estimate: int = 0
    max_rss_bytes: int = 0

    def as_dict(self) -> dict[str, Any]:
        return asdict(self)

    def render(self) -> str:
        rows = [
            ("variant / kernel", f"{self.variant} / {self.kernel}"),
            ("repeat", str(self.repeat)),
            ("ops", f"{self.ops:,}"),
            ("replay time", f"{self.seconds:.2f} s"),
            ("throughput", f"{self.ops_per_sec:,.0f} ops/s"),
            ("wire bytes/op", f"{self.wire_bytes_per_op:.2f}"),
            ("final length", f"{self.final_length:,} characters"),
            ("save size", f"{self.save_bytes:,} bytes ({self.text_bytes:,} bytes of text)"),
            ("save / load", f"{self.save_seconds:.3f} s / {self.load_seconds:.3f} s"),
            ("round trip", "identical" if self.round_trip_identical else "DIFFERS"),
            ("tree memory (estimate)", f"{self.tree_bytes_estimate / 1e6:,.1f} MB"),
            ("max RSS", f"{self.max_rss_bytes / 1e6:,.1f} MB"),
        ]
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows)


def bench_replay(trace: Sequence[TraceOp] | EditTrace, variant: Variant | str = Variant.FUGUE,
                 repeat: int = 1, kernel: str | None = None, check_round_trip: bool = True) -> BenchReport:
    """Time op generation plus wire encoding, then save and load the result."""
    from . import core

    variant = Variant(variant)
    report = BenchReport(variant.value, kernel or core.KERNEL, repeat)
    rep = Replica("bench", variant, kernel)
    if repeat <= 0:
        return report
    insert, delete = rep.insert, rep.delete
    wire = 0
    ops = 0
    start = time.perf_counter()
    for _ in range(repeat):
        for op in trace:
            msg = delete(op.position) if op.char is None else insert(op.position, op.char)
            wire += len(encode_op(msg))
        ops += len(trace)
    report.seconds = time.perf_counter() - start
    report.ops = ops
    report.ops_per_sec = ops / report.seconds if report.seconds else 0.0
    report.wire_bytes_per_op = wire / ops if ops else 0.0
    text = rep.text()
    report.final_length = len(text)
    report.text_bytes = len(text.encode("utf-8"))
    report.tree_bytes_estimate = rep.tree.memory_bytes()

    t = time.perf_counter()
    data = savefile.save(rep)
    report.save_seconds = time.perf_counter() - t
    report.save_bytes = len(data)
    t = time.perf_counter()
    loaded = savefile.load(data, kernel)
    report.load_seconds = time.perf_counter() - t
    if check_round_trip:
        report.round_trip_identical = loaded.text() == text and savefile.save(loaded) == data
    report.max_rss_bytes = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss * 1024
    return report
