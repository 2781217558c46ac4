"""Saved-document format "FUG1".

::

    "FUG1" version:varint variant:u8 own_name:bytes own_counter:varint
    replica_count:varint name:bytes ...
    record_count:varint record ...
    [run_count:varint (count:varint node:varint) ...]      (FugueMax only)

A record is a run of nodes from one replica with consecutive counters, each
after the first being the first right child of the one before::

    parent:varint side_flags:u8 replica:varint counter:varint length:varint
    [tombstone bitmap]  values

Nodes are numbered 1, 2, ... in file order (0 is the root). Parents always
come before children and siblings keep their order, so a loader can append
nodes as it reads them and build the order index once at the end. The
FugueMax table lists the right origin of every right-side node in node order,
run-length encoded; origins are node numbers, with 0 meaning the end of the
list.
"""

from __future__ import annotations

from array import array
from typing import Any

from . import core
from .codec import read_bytes, read_value, read_varint, write_bytes, write_value, write_varint
from .engine import Replica, Variant
from .errors import DecodeError, UnsupportedVersionError
from .ids import TOMBSTONE

MAGIC = b"FUG1"
VERSION = 1

_VARIANT_BYTE = {Variant.FUGUE: 0, Variant.FUGUEMAX: 1}
_BYTE_VARIANT = {v: k for k, v in _VARIANT_BYTE.items()}

_RIGHT = 0x01
_TOMBSTONES = 0x02
_TEXT_RUN = 0x04


def save(replica: Replica) -> bytes:
    tree = replica.tree
    kc = tree.core
    rep, ctr, vals = tree._rep, tree._ctr, tree._values
    out = bytearray(MAGIC)
    write_varint(out, VERSION)
    out.append(_VARIANT_BYTE[replica.variant])
    write_bytes(out, replica.replica_id)
    write_varint(out, replica.counter)
    write_varint(out, len(tree._names))
    for name in tree._names:
        write_bytes(out, name)

    ordinal = array("i", [0]) * (len(tree) + 1)
    in_file: list[int] = []
    body = bytearray()
    records = 0
    stack = list(reversed(kc.children(0, 0) + kc.children(0, 1)))
    while stack:
        h = stack.pop()
        chain = [h]
        while True:
            last = chain[-1]
            right = kc.children(last, 1)
            if right and rep[right[0]] == rep[last] and ctr[right[0]] == ctr[last] + 1:
                chain.append(right[0])
            else:
                break
        parent = kc.parent(h)
        _write_record(body, ordinal[parent], kc.side(h), rep[h], ctr[h], [vals[c] for c in chain])
        records += 1
        for c in chain:
            in_file.append(c)
            ordinal[c] = len(in_file)
        pending = []
        for k, c in enumerate(chain):
            pending += kc.children(c, 0)
            right = kc.children(c, 1)
            pending += right[1:] if k + 1 < len(chain) else right
        stack.extend(reversed(pending))

    write_varint(out, records)
    out += body
    if replica.variant is Variant.FUGUEMAX:
        runs: list[list[int]] = []
        for h in in_file:
            if kc.side(h) == 1:
                ro = kc.right_origin(h)
                ro = 0 if ro == core.END else ordinal[ro]
                if runs and runs[-1][1] == ro:
                    runs[-1][0] += 1
                else:
                    runs.append([1, ro])
        write_varint(out, len(runs))
        for n, ro in runs:
            write_varint(out, n)
            write_varint(out, ro)
    return bytes(out)


def _write_record(out: bytearray, parent: int, side: int, rep: int, counter: int, values: list[Any]) -> None:
    dead = [v is TOMBSTONE for v in values]
    live = [v for v in values if v is not TOMBSTONE]
    flags = _RIGHT if side else 0
    if any(dead):
        flags |= _TOMBSTONES
    text = live and all(isinstance(v, str) and len(v) == 1 for v in live)
    if text:
        flags |= _TEXT_RUN
    write_varint(out, parent)
    out.append(flags)
    write_varint(out, rep)
    write_varint(out, counter)
    write_varint(out, len(values))
    if flags & _TOMBSTONES:
        bits = bytearray((len(values) + 7) // 8)
        for k, d in enumerate(dead):
            if d:
                bits[k >> 3] |= 1 << (k & 7)
        out += bits
    if text:
        write_bytes(out, "".join(live).encode("utf-8"))
    else:
        for v in live:
            write_value(out, v)


def load(data: bytes, kernel: str | None = None) -> Replica:
    buf = memoryview(data)
    if bytes(buf[:4]) != MAGIC:
        raise DecodeError("not a saved document (bad magic)", 0)
    version, pos = read_varint(buf, 4)
    if version != VERSION:
        raise UnsupportedVersionError(f"saved document version {version} is not supported (expected {VERSION})")
    if pos >= len(buf) or buf[pos] not in _BYTE_VARIANT:
        raise DecodeError("unknown variant", pos)
    variant = _BYTE_VARIANT[buf[pos]]
    own, pos = read_bytes(buf, pos + 1)
    if not own:
        raise DecodeError("empty replica name", pos)
    counter, pos = read_varint(buf, pos)
    replica = Replica(own, variant, kernel)
    replica.counter = counter
    tree = replica.tree
    kc = tree.core

    count, pos = read_varint(buf, pos)
    slots = []
    for _ in range(count):
        start = pos
        name, pos = read_bytes(buf, pos)
        if not name:
            raise DecodeError("empty replica name", start)
        slots.append(tree.replica_index(name))

    records, pos = read_varint(buf, pos)
    right_nodes = []
    for _ in range(records):
        start = pos
        parent, pos = read_varint(buf, pos)
        if pos >= len(buf):
            raise DecodeError("truncated record", pos)
        flags = buf[pos]
        if flags & ~(_RIGHT | _TOMBSTONES | _TEXT_RUN):
            raise DecodeError(f"unknown record flags {flags:#04x}", pos)
        pos += 1
        rep, pos = read_varint(buf, pos)
        first, pos = read_varint(buf, pos)
        length, pos = read_varint(buf, pos)
        if rep >= len(slots) or length == 0 or parent > len(kc):
            raise DecodeError("record refers to unknown replica or node", start)
        dead = [False] * length
        if flags & _TOMBSTONES:
            nbytes = (length + 7) // 8
            if pos + nbytes > len(buf):
                raise DecodeError("truncated tombstone bitmap", pos)
            bits = buf[pos:pos + nbytes]
            dead = [bool(bits[k >> 3] >> (k & 7) & 1) for k in range(length)]
            pos += nbytes
        nlive = length - sum(dead)
        if flags & _TEXT_RUN:
            at = pos
            raw, pos = read_bytes(buf, pos)
            try:
                live = list(raw.decode("utf-8"))
            except UnicodeDecodeError:
                raise DecodeError("invalid utf-8 in text run", at) from None
            if len(live) != nlive:
                raise DecodeError("text run length does not match the record", at)
        else:
            live = []
            for _ in range(nlive):
                v, pos = read_value(buf, pos)
                live.append(v)
        it = iter(live)
        side = 1 if flags & _RIGHT else 0
        for k in range(length):
            visible = not dead[k]
            h = kc.attach(parent, side, core.NONE, visible)
            tree._register(h, slots[rep], first + k, next(it) if visible else TOMBSTONE)
            if side:
                right_nodes.append(h)
            parent, side = h, 1

    if variant is Variant.FUGUEMAX:
        total = len(kc)
        nruns, pos = read_varint(buf, pos)
        k = 0
        for _ in range(nruns):
            start = pos
            n, pos = read_varint(buf, pos)
            ro, pos = read_varint(buf, pos)
            if ro > total or n == 0 or k + n > len(right_nodes):
                raise DecodeError("malformed right-origin run", start)
            for h in right_nodes[k:k + n]:
                kc.set_right_origin(h, core.END if ro == 0 else ro)
            k += n
        if k != len(right_nodes):
            raise DecodeError("right-origin table is too short", pos)
    if pos != len(buf):
        raise DecodeError(f"{len(buf) - pos} trailing bytes", pos)
    kc.reindex()
    return replica
