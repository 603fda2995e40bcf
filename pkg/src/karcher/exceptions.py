"""Error hierarchy shared by the services and the CLI."""

from typing import Any


class KarcherError(Exception):
    """Base class for every error raised by the package."""


class ConstructionError(KarcherError, ValueError):
    """A matrix or measure could not be built from the given data."""


class DimensionMismatchError(KarcherError, ValueError):
    """Operands live in cones of different dimension."""

    def __init__(self, expected: int, got: int):
        super().__init__(f"dimension mismatch: expected {expected}, got {got}")
        self.expected = expected
        self.got = got


class ConvergenceError(KarcherError, RuntimeError):
    """An iterative solver hit its cap before reaching the tolerance.

    ``report`` holds the best report reached so far and ``state`` the matching iterate,
    so callers can still print or inspect them.
    """

    def __init__(self, message: str, report: Any = None, state: Any = None):
        super().__init__(message)
        self.report = report
        self.state = state


class EigenConvergenceError(ConvergenceError):
    """Cyclic Jacobi did not annihilate the off-diagonal part within the sweep cap."""


class MalformedInputError(KarcherError):
    """Input file or payload could not be parsed."""


class RowFailedError(KarcherError):
    """A law-of-large-numbers row failed; ``row_index`` names it."""

    def __init__(self, row_index: int, cause: Exception):
        super().__init__(f"row {row_index} failed: {cause}")
        self.row_index = row_index
        self.cause = cause


class JobFailedError(KarcherError):
    """A pooled job raised; ``index`` is its position in the input sequence."""

    def __init__(self, index: int, cause: BaseException):
        super().__init__(f"job {index} failed: {cause}")
        self.index = index
        self.cause = cause
