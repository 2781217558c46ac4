"""Identifiers, sides and sentinels shared by every list structure."""

from __future__ import annotations

import enum
from typing import NamedTuple, Union


class _Sentinel:
    """A named singleton that refuses ordering against element ids."""

    __slots__ = ("_name",)

    def __init__(self, name: str) -> None:
        self._name = name

    def __repr__(self) -> str:
        return self._name

    def __reduce__(self):
        return self._name


#: Identifier of the tree root (the ``null`` id). Doubles as the ``start``
#: symbol when reasoning about left origins.
ROOT = _Sentinel("ROOT")
#: Right-origin marker for insertions at the tail of the document.
END = _Sentinel("END")
#: Value carried by deleted nodes.
TOMBSTONE = _Sentinel("TOMBSTONE")


class Side(enum.IntEnum):
    L = 0
    R = 1


class ElementId(NamedTuple):
    """``(replica, counter)``; tuple ordering compares replica bytes, then counter."""

    replica: bytes
    counter: int

    def __repr__(self) -> str:
        return f"{format_replica(self.replica)}:{self.counter}"


NodeRef = Union[ElementId, _Sentinel]


def replica_id(name: bytes | str) -> bytes:
    """Normalize a replica name to nonempty bytes."""
    if isinstance(name, str):
        name = name.encode("utf-8")
    if not isinstance(name, (bytes, bytearray)):
        raise TypeError(f"replica names are bytes or str, got {type(name).__name__}")
    if not name:
        raise ValueError("replica names must be nonempty")
    return bytes(name)


_PLAIN = frozenset(b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789_.-")


def format_replica(name: bytes) -> str:
    """Render a replica name for text formats; non-plain names become ``%<hex>``."""
    if name and all(b in _PLAIN for b in name):
        return name.decode("ascii")
    return "%" + name.hex()


def parse_replica(text: str) -> bytes:
    if text.startswith("%"):
        return replica_id(bytes.fromhex(text[1:]))
    return replica_id(text)


def format_ref(ref: NodeRef) -> str:
    if ref is ROOT or ref is END:
        return repr(ref)
    return f"{format_replica(ref.replica)}:{ref.counter}"


def parse_ref(text: str) -> NodeRef:
    if text == "ROOT":
        return ROOT
    if text == "END":
        return END
    name, sep, counter = text.rpartition(":")
    if not sep or not counter.isdigit():
        raise ValueError(f"malformed element id {text!r}")
    return ElementId(parse_replica(name), int(counter))
