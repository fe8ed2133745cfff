"""Exceptions raised by the fixpoint laboratory."""

from typing import Any, List, Optional


class FixpointError(Exception):
    """Base class for every error raised by this package."""


class InvalidInputError(FixpointError, ValueError):
    """An argument violates a documented invariant."""


class DimensionMismatchError(InvalidInputError):
    """Two points (or a point and an operator) disagree on dimension."""

    def __init__(self, expected: int, actual: int, what: str = "point"):
        self.expected = expected
        self.actual = actual
        super().__init__(f"Dimension mismatch for {what}: expected {expected}, got {actual}")


class RangeError(FixpointError, ArithmeticError):
    """A closed-form power left the representable floating-point range."""


class PreconditionError(FixpointError):
    """A checker was called on inputs that do not satisfy its precondition."""

    def __init__(self, message: str, residual: Optional[float] = None):
        self.residual = residual
        super().__init__(message)


class DivergenceError(FixpointError):
    """The iteration produced a non-finite or out-of-bound intermediate."""

    def __init__(self, n: int, stage: str, message: str):
        self.n = n
        self.stage = stage
        self.trace: List[Any] = []
        super().__init__(f"Divergence at n={n}, stage {stage}: {message}")


class ConsistencyError(FixpointError, AssertionError):
    """An exact identity failed; this indicates a bug, never a valid outcome."""


class ConfigError(FixpointError):
    """An experiment configuration failed validation."""

    def __init__(self, path: str, message: str):
        self.path = path
        self.message = message
        super().__init__(f"{path}: {message}" if path else message)
