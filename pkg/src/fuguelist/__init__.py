"""Fugue and FugueMax replicated lists, with a causal-broadcast simulator,
correctness oracles and a gallery of interleaving anomalies."""

from .core import KERNEL
from .engine import DeleteOp, InsertOp, Replica, Variant
from .errors import (DecodeError, FugueError, ProtocolError, ScriptError, TraceFormatError,
                     UnknownElementError, UnsupportedVersionError)
from .ids import END, ROOT, TOMBSTONE, ElementId, Side
from .sim import ExecutionLog, Simulator, fuzz_execution, run_script

__all__ = [
    "KERNEL",
    "DeleteOp", "InsertOp", "Replica", "Variant",
    "DecodeError", "FugueError", "ProtocolError", "ScriptError", "TraceFormatError",
    "UnknownElementError", "UnsupportedVersionError",
    "END", "ROOT", "TOMBSTONE", "ElementId", "Side",
    "ExecutionLog", "Simulator", "fuzz_execution", "run_script",
]

__version__ = "0.1.0"
