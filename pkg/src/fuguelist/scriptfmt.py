"""Line-oriented text formats for scripts and execution logs.

Script syntax, one step per line, ``#`` starts a comment::

    replicas r1 r2 r3
    insert r1 0 A          # GenerateInsert(replica, index, value)
    delete r1 0            # GenerateDelete(replica, index)
    deliver r2 r1:1        # Deliver(replica, origin:seq)
    sync r1 r2             # bring both replicas up to date with each other
    syncall                # bring every replica up to date
    type r1 0 "hello"      # one insert per character at 0, 1, 2, ...

Values may be Python string literals (``"\\n"``, ``" "``), otherwise the bare
token is the value. Log dumps are tab-separated so values need no quoting
beyond ``repr``.
"""

from __future__ import annotations

import ast
import re
from pathlib import Path
from typing import Any

from .engine import DeleteOp, InsertOp, Variant
from .errors import ScriptError
from .ids import TOMBSTONE, Side, format_ref, format_replica, parse_ref, parse_replica
from .sim import (CausalStamp, Deliver, ExecutionLog, GenerateDelete, GenerateInsert, OpRecord,
                  Script, Sync, SyncAll)

_TOKEN = re.compile(r"""\s*(?:("(?:[^"\\]|\\.)*"|'(?:[^'\\]|\\.)*')|(\#.*)|(\S+))""")

FIXTURE_DIR = Path(__file__).with_name("fixtures")


def _tokens(line: str, lineno: int) -> list[tuple[str, bool]]:
    out = []
    pos = 0
    line = line.rstrip("\n")
    while pos < len(line):
        m = _TOKEN.match(line, pos)
        if not m or m.end() == pos:
            break
        pos = m.end()
        quoted, comment, bare = m.groups()
        if comment is not None:
            break
        if quoted is not None:
            try:
                out.append((ast.literal_eval(quoted), True))
            except (ValueError, SyntaxError) as exc:
                raise ScriptError(f"bad string literal {quoted}", lineno) from exc
        elif bare is not None:
            out.append((bare, False))
    return out


def _int(tok: str, what: str, lineno: int) -> int:
    try:
        value = int(tok)
    except ValueError:
        raise ScriptError(f"{what} must be an integer, got {tok!r}", lineno) from None
    return value


def _stamp_key(tok: str, lineno: int) -> tuple[str, int]:
    name, sep, seq = tok.rpartition(":")
    if not sep or not name:
        raise ScriptError(f"expected origin:seq, got {tok!r}", lineno)
    return name, _int(seq, "sequence number", lineno)


def parse_script(text: str, name: str = "") -> Script:
    replicas: list[str] | None = None
    steps: list = []
    for lineno, line in enumerate(text.splitlines(), 1):
        toks = _tokens(line, lineno)
        if not toks:
            continue
        words = [t for t, _ in toks]
        cmd, args = words[0], words[1:]

        def need(n: int) -> None:
            if len(args) != n:
                raise ScriptError(f"{cmd} takes {n} arguments, got {len(args)}", lineno)

        if cmd == "replicas":
            if replicas is not None:
                raise ScriptError("replicas declared twice", lineno)
            if not args:
                raise ScriptError("replicas needs at least one name", lineno)
            replicas = list(args)
            continue
        if replicas is None:
            raise ScriptError("the first directive must be 'replicas'", lineno)
        if cmd == "insert":
            need(3)
            steps.append(GenerateInsert(args[0], _int(args[1], "index", lineno), args[2]))
        elif cmd == "type":
            need(3)
            start = _int(args[1], "index", lineno)
            for k, ch in enumerate(str(args[2])):
                steps.append(GenerateInsert(args[0], start + k, ch))
        elif cmd == "delete":
            need(2)
            steps.append(GenerateDelete(args[0], _int(args[1], "index", lineno)))
        elif cmd == "deliver":
            need(2)
            origin, seq = _stamp_key(args[1], lineno)
            steps.append(Deliver(args[0], origin, seq))
        elif cmd == "sync":
            need(2)
            steps.append(Sync(args[0], args[1]))
        elif cmd == "syncall":
            need(0)
            steps.append(SyncAll())
        else:
            raise ScriptError(f"unknown directive {cmd!r}", lineno)
        for step in steps[-1:]:
            for attr in ("replica", "a", "b"):
                who = getattr(step, attr, None)
                if who is not None and who not in replicas:
                    raise ScriptError(f"unknown replica {who!r}", lineno)
    if replicas is None:
        raise ScriptError("script declares no replicas", None)
    return Script(tuple(replicas), tuple(steps), name)


def fixture_names() -> list[str]:
    return sorted(p.stem for p in FIXTURE_DIR.glob("*.script"))


def load_script(path_or_name: str | Path) -> Script:
    """Read a script file, or a bundled fixture by name (``fig7``)."""
    path = Path(path_or_name)
    if not path.exists():
        candidate = FIXTURE_DIR / f"{path.stem if path.suffix == '.script' else path.name}.script"
        if not candidate.exists():
            raise FileNotFoundError(f"no script file or fixture named {str(path_or_name)!r}")
        path = candidate
    return parse_script(path.read_text(encoding="utf-8"), path.stem)


# -- execution logs ---------------------------------------------------------

def _value(v: Any) -> str:
    return "~" if v is TOMBSTONE else repr(v)


def _parse_value(tok: str) -> Any:
    return TOMBSTONE if tok == "~" else ast.literal_eval(tok)


def _state(state) -> str:
    return "\t".join(f"{format_ref(i)}={_value(v)}" for i, v in state)


def _parse_state(fields: list[str]) -> tuple:
    out = []
    for f in fields:
        ref, _, val = f.partition("=")
        out.append((parse_ref(ref), _parse_value(val)))
    return tuple(out)


def dump_log(log: ExecutionLog) -> str:
    lines = ["fuguelist-log\t1", f"variant\t{log.variant.value}",
             "replicas\t" + "\t".join(format_replica(n) for n in log.replicas)]
    for r in log.ops:
        s = r.stamp
        head = ["op", format_replica(s.origin), str(s.seq), ",".join(map(str, s.deps)), str(r.index)]
        m = r.msg
        if isinstance(m, InsertOp):
            head += ["insert", format_ref(m.id), format_ref(m.parent), m.side.name,
                     "-" if m.right_origin is None else format_ref(m.right_origin), repr(m.value)]
        else:
            head += ["delete", format_ref(m.target)]
        lines.append("\t".join(head))
        lines.append("before\t" + _state(r.before) if r.before else "before")
        lines.append("after\t" + _state(r.after) if r.after else "after")
    for n in log.replicas:
        for key, snap in zip(log.deliveries[n], log.snapshots[n]):
            lines.append("\t".join(["deliver", format_replica(n), format_replica(key[0]), str(key[1])]))
            lines.append("snapshot\t" + _state(snap) if snap else "snapshot")
    for fail in log.commutativity_failures:
        lines.append("noncommuting\t" + "\t".join(map(repr, fail)))
    return "\n".join(lines) + "\n"


def load_log(text: str) -> ExecutionLog:
    rows = [line.split("\t") for line in text.splitlines() if line]
    if not rows or rows[0] != ["fuguelist-log", "1"]:
        raise ValueError("not a version 1 execution log")
    log: ExecutionLog | None = None
    variant = None
    k = 1
    while k < len(rows):
        row = rows[k]
        tag = row[0]
        if tag == "variant":
            variant = Variant(row[1])
        elif tag == "replicas":
            names = tuple(parse_replica(n) for n in row[1:])
            log = ExecutionLog(variant, names, deliveries={n: [] for n in names},
                               snapshots={n: [] for n in names})
        elif tag == "op":
            origin, seq = parse_replica(row[1]), int(row[2])
            deps = tuple(int(d) for d in row[3].split(",")) if row[3] else ()
            index = int(row[4])
            if row[5] == "insert":
                ro = None if row[9] == "-" else parse_ref(row[9])
                msg = InsertOp(parse_ref(row[6]), ast.literal_eval(row[10]), parse_ref(row[7]),
                               Side[row[8]], ro)
            else:
                msg = DeleteOp(parse_ref(row[6]))
            before = _parse_state(rows[k + 1][1:])
            after = _parse_state(rows[k + 2][1:])
            log.ops.append(OpRecord(CausalStamp(origin, seq, deps), msg, origin, index, before, after))
            k += 2
        elif tag == "deliver":
            who = parse_replica(row[1])
            log.deliveries[who].append((parse_replica(row[2]), int(row[3])))
            log.snapshots[who].append(_parse_state(rows[k + 1][1:]))
            k += 1
        elif tag == "noncommuting":
            log.commutativity_failures.append(tuple(ast.literal_eval(f) for f in row[1:]))
        else:
            raise ValueError(f"line {k + 1}: unknown record {tag!r}")
        k += 1
    if log is None:
        raise ValueError("log declares no replicas")
    return log
