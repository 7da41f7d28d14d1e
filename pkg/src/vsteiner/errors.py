"""Exception hierarchy shared by the library and the CLI."""

from __future__ import annotations


class SteinerError(Exception):
    """Base class for all errors raised by vsteiner."""


class DomainError(SteinerError, ValueError):
    """An argument is outside the domain the operation accepts."""


class GraphFormatError(SteinerError, ValueError):
    """An edge-list (or seed/tree) file could not be parsed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SeedsDisconnected(SteinerError):
    """Some seed vertices cannot be reached from the others."""

    def __init__(self, unreached):
        self.unreached = sorted(unreached)
        shown = ", ".join(str(v) for v in self.unreached[:10])
        more = "" if len(self.unreached) <= 10 else f" (+{len(self.unreached) - 10} more)"
        super().__init__(f"seed vertices not connected to the rest: {shown}{more}")


class OracleRefused(SteinerError):
    """The exact solver declined an instance beyond its size guard."""


class EngineError(SteinerError):
    """Fatal error inside the visitor engine (bad target, handler crash)."""


class MessageBudgetExceeded(EngineError):
    """A phase processed more messages than its budget allows."""


class CorruptedStateError(SteinerError):
    """Per-vertex state violates an invariant the pipeline relies on."""
