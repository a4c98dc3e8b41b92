"""Exception hierarchy shared by every clrlab module."""

from __future__ import annotations


class ClrLabError(Exception):
    """Base class for all errors raised by clrlab."""


class InvalidInputError(ClrLabError, ValueError):
    """An argument lies outside the domain of the operation."""


class SchemaError(InvalidInputError):
    """A structured input (profile or symbol file) failed validation."""

    def __init__(self, message: str, row: int | None = None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class ConvergenceError(ClrLabError):
    """An iterative method stopped before meeting its tolerance.

    ``partial`` carries the best value available when the method gave up.
    """

    def __init__(self, message: str, partial=None, err: float | None = None):
        super().__init__(message)
        self.partial = partial
        self.err = err


class DivergenceError(ClrLabError):
    """An integral that should be finite was detected to diverge."""


class BracketError(ClrLabError):
    """A scalar search bracket does not contain an interior minimum."""

    def __init__(self, message: str, argmin: float | None = None, value: float | None = None):
        super().__init__(message)
        self.argmin = argmin
        self.value = value


class ResolutionError(ClrLabError):
    """A grid is too narrow or too coarse to represent a function."""


class UnsupportedOrderError(ClrLabError, ValueError):
    """A requested derivative order exceeds the supported maximum."""
