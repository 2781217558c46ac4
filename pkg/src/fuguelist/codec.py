"""Binary wire format for operation messages.

Layout (all integers are unsigned LEB128 varints and must be minimal)::

    insert:  0x01 id flags value parent [right_origin]
    delete:  0x02 id

    id / ref:  len name [counter]   len 0 means ROOT (parent) or END (right origin)
    flags:     bit 0 side (1 = right), bit 1 right origin present
    value:     0x00 len utf8 | 0x01 zigzag-int | 0x02 len bytes

Every field has one encoding, so equal messages give equal bytes, and the
decoder rejects trailing bytes.
"""

from __future__ import annotations

from typing import Any

from .engine import DeleteOp, InsertOp, OpMessage
from .errors import DecodeError
from .ids import END, ROOT, ElementId, NodeRef, Side

KIND_INSERT = 0x01
KIND_DELETE = 0x02

_VALUE_STR = 0x00
_VALUE_INT = 0x01
_VALUE_BYTES = 0x02

_FLAG_RIGHT = 0x01
_FLAG_ORIGIN = 0x02


# -- primitives -------------------------------------------------------------

def write_varint(out: bytearray, n: int) -> None:
    if n < 0:
        raise ValueError(f"varints are unsigned, got {n}")
    while n >= 0x80:
        out.append((n & 0x7F) | 0x80)
        n >>= 7
    out.append(n)


def read_varint(buf: bytes | memoryview, pos: int) -> tuple[int, int]:
    start = pos
    n = shift = 0
    while True:
        if pos >= len(buf):
            raise DecodeError("truncated varint", start)
        b = buf[pos]
        pos += 1
        n |= (b & 0x7F) << shift
        if not b & 0x80:
            if b == 0 and pos - start > 1:
                raise DecodeError("non-minimal varint", start)
            return n, pos
        shift += 7


def write_bytes(out: bytearray, data: bytes) -> None:
    write_varint(out, len(data))
    out += data


def read_bytes(buf: bytes | memoryview, pos: int) -> tuple[bytes, int]:
    n, p = read_varint(buf, pos)
    if p + n > len(buf):
        raise DecodeError(f"length {n} runs past the end", pos)
    return bytes(buf[p:p + n]), p + n


def write_value(out: bytearray, v: Any) -> None:
    if isinstance(v, str):
        out.append(_VALUE_STR)
        write_bytes(out, v.encode("utf-8"))
    elif isinstance(v, bool) or not isinstance(v, (int, bytes, bytearray)):
        raise TypeError(f"cannot encode value of type {type(v).__name__}")
    elif isinstance(v, int):
        out.append(_VALUE_INT)
        write_varint(out, (v << 1) if v >= 0 else ((-v << 1) - 1))
    else:
        out.append(_VALUE_BYTES)
        write_bytes(out, bytes(v))


def read_value(buf: bytes | memoryview, pos: int) -> tuple[Any, int]:
    if pos >= len(buf):
        raise DecodeError("missing value", pos)
    tag = buf[pos]
    if tag == _VALUE_STR:
        raw, p = read_bytes(buf, pos + 1)
        try:
            return raw.decode("utf-8"), p
        except UnicodeDecodeError:
            raise DecodeError("invalid utf-8 in string value", pos + 1) from None
    if tag == _VALUE_INT:
        z, p = read_varint(buf, pos + 1)
        return (z >> 1) if not z & 1 else -((z + 1) >> 1), p
    if tag == _VALUE_BYTES:
        return read_bytes(buf, pos + 1)
    raise DecodeError(f"unknown value tag {tag:#04x}", pos)


def write_ref(out: bytearray, ref: NodeRef) -> None:
    if ref is ROOT or ref is END:
        out.append(0)
        return
    if not ref.replica:
        raise ValueError("replica names must be nonempty")
    write_bytes(out, ref.replica)
    write_varint(out, ref.counter)


def read_ref(buf: bytes | memoryview, pos: int, sentinel: Any) -> tuple[NodeRef, int]:
    name, p = read_bytes(buf, pos)
    if not name:
        if sentinel is None:
            raise DecodeError("element id with an empty replica name", pos)
        return sentinel, p
    counter, p = read_varint(buf, p)
    return ElementId(name, counter), p


# -- messages ---------------------------------------------------------------

def encode_op(msg: OpMessage) -> bytes:
    out = bytearray()
    if isinstance(msg, InsertOp):
        out.append(KIND_INSERT)
        write_ref(out, msg.id)
        flags = (_FLAG_RIGHT if Side(msg.side) is Side.R else 0)
        if msg.right_origin is not None:
            flags |= _FLAG_ORIGIN
        out.append(flags)
        write_value(out, msg.value)
        if msg.parent is END:
            raise ValueError("END cannot be a parent")
        write_ref(out, msg.parent)
        if msg.right_origin is not None:
            if msg.right_origin is ROOT:
                raise ValueError("ROOT cannot be a right origin")
            write_ref(out, msg.right_origin)
    elif isinstance(msg, DeleteOp):
        out.append(KIND_DELETE)
        write_ref(out, msg.target)
    else:
        raise TypeError(f"not an operation message: {msg!r}")
    return bytes(out)


def decode_op(data: bytes) -> OpMessage:
    buf = memoryview(data)
    if not buf:
        raise DecodeError("empty message", 0)
    kind = buf[0]
    pos = 1
    if kind == KIND_INSERT:
        eid, pos = read_ref(buf, pos, None)
        if pos >= len(buf):
            raise DecodeError("missing flags", pos)
        flags = buf[pos]
        if flags & ~(_FLAG_RIGHT | _FLAG_ORIGIN):
            raise DecodeError(f"unknown flag bits {flags:#04x}", pos)
        pos += 1
        value, pos = read_value(buf, pos)
        parent, pos = read_ref(buf, pos, ROOT)
        ro = None
        if flags & _FLAG_ORIGIN:
            ro, pos = read_ref(buf, pos, END)
        msg: OpMessage = InsertOp(eid, value, parent, Side.R if flags & _FLAG_RIGHT else Side.L, ro)
    elif kind == KIND_DELETE:
        target, pos = read_ref(buf, pos, None)
        msg = DeleteOp(target)
    else:
        raise DecodeError(f"unknown message kind {kind:#04x}", 0)
    if pos != len(buf):
        raise DecodeError(f"{len(buf) - pos} trailing bytes", pos)
    return msg
