class FugueError(Exception):
    """Base class for errors raised by this package."""


class ProtocolError(FugueError):
    """A message violated the causal-delivery contract (missing parent, duplicate insert)."""


class UnknownElementError(FugueError, KeyError):
    def __str__(self) -> str:
        return f"unknown element {self.args[0]!r}" if self.args else "unknown element"


class ScriptError(FugueError):
    """A script step is malformed or not causally valid."""

    def __init__(self, message: str, step: int | None = None) -> None:
        self.step = step
        super().__init__(message if step is None else f"step {step}: {message}")


class DecodeError(FugueError, ValueError):
    """Malformed bytes; ``offset`` points at the first byte that could not be read."""

    def __init__(self, message: str, offset: int) -> None:
        self.offset = offset
        super().__init__(f"{message} (at byte {offset})")


class UnsupportedVersionError(FugueError, ValueError):
    pass


class TraceFormatError(FugueError, ValueError):
    def __init__(self, message: str, index: int) -> None:
        self.index = index
        super().__init__(f"trace entry {index}: {message}")


class EnumerationTooLarge(FugueError, ValueError):
    pass
