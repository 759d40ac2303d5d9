"""Exception hierarchy shared by the library and the command line."""

from __future__ import annotations


class TransportError(Exception):
    """Base class for every error raised by this package."""


class PreconditionError(TransportError, ValueError):
    """An operation was called on input that violates its preconditions."""


class DomainError(TransportError, ValueError):
    """A numeric argument lies outside the operation's domain."""


class StructuralError(TransportError):
    """The network cannot be processed as requested (dead ends, cycles, leftovers)."""


class ParseError(TransportError, ValueError):
    """Malformed document text, positioned at a 1-based line and column."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.message = message
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(where + message)
