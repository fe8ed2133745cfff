"""
Self-maps of R^d and their powers.

Each operator kind is a small immutable description. Scaling, toward_point and
clamp have exact closed forms for T^n; affine maps are iterated.
"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Dict, Iterator, List, Tuple

import numpy as np

from .errors import DimensionMismatchError, InvalidInputError, RangeError
from .spaces import Point

logger = logging.getLogger(__name__)


def _finite_point(arr: np.ndarray, what: str) -> Point:
    if not np.all(np.isfinite(arr)):
        raise RangeError(f"{what} left the floating-point range")
    return Point(arr)


class OperatorSpec(ABC):
    """A closed description of a map T: R^d -> R^d."""

    kind: str = ""

    @property
    @abstractmethod
    def dim(self) -> int:
        """Dimension of the space, or 0 when the map works in every dimension."""

    @abstractmethod
    def _apply(self, arr: np.ndarray) -> np.ndarray:
        ...

    def _power(self, n: int, arr: np.ndarray) -> np.ndarray:
        out = arr
        for _ in range(n):
            out = self._apply(out)
        return out

    @property
    def has_closed_power(self) -> bool:
        return False

    @abstractmethod
    def to_dict(self) -> Dict:
        ...

    def check_dim(self, x: Point) -> None:
        if self.dim and x.dim != self.dim:
            raise DimensionMismatchError(self.dim, x.dim, what=f"{self.kind} operator input")


@dataclass(frozen=True)
class Scaling(OperatorSpec):
    """x -> c x. Scaling(2) is the doubling map of the counterexample."""

    c: float
    kind = "scaling"

    def __post_init__(self):
        if not math.isfinite(self.c):
            raise InvalidInputError(f"scaling factor must be finite, got {self.c}")
        object.__setattr__(self, "c", float(self.c))

    @property
    def dim(self) -> int:
        return 0

    @property
    def has_closed_power(self) -> bool:
        return True

    def _apply(self, arr):
        return self.c * arr

    def _power(self, n, arr):
        try:
            factor = self.c ** n
        except OverflowError as exc:
            raise RangeError(f"{self.c}^{n} overflows") from exc
        return factor * arr

    def to_dict(self):
        return {"kind": self.kind, "c": self.c}


@dataclass(frozen=True)
class TowardPoint(OperatorSpec):
    """x -> x* + r (x - x*)."""

    center: Point
    r: float
    kind = "toward_point"

    def __post_init__(self):
        if not math.isfinite(self.r):
            raise InvalidInputError(f"toward_point ratio must be finite, got {self.r}")
        object.__setattr__(self, "r", float(self.r))

    @property
    def dim(self) -> int:
        return self.center.dim

    @property
    def has_closed_power(self) -> bool:
        return True

    def _apply(self, arr):
        c = self.center.as_array()
        return c + self.r * (arr - c)

    def _power(self, n, arr):
        try:
            factor = self.r ** n
        except OverflowError as exc:
            raise RangeError(f"{self.r}^{n} overflows") from exc
        c = self.center.as_array()
        return c + factor * (arr - c)

    def to_dict(self):
        return {"kind": self.kind, "center": list(self.center.coords), "r": self.r}


@dataclass(frozen=True)
class Affine(OperatorSpec):
    """x -> A x + b."""

    A: Tuple[Tuple[float, ...], ...]
    b: Point
    kind = "affine"

    def __post_init__(self):
        matrix = np.asarray(self.A, dtype=float)
        d = self.b.dim
        if matrix.shape != (d, d):
            raise InvalidInputError(f"affine matrix must be {d}x{d}, got shape {matrix.shape}")
        if not np.all(np.isfinite(matrix)):
            raise InvalidInputError("affine matrix has non-finite entries")
        object.__setattr__(self, "A", tuple(tuple(float(v) for v in row) for row in matrix))

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.A, dtype=float)

    @property
    def dim(self) -> int:
        return self.b.dim

    def _apply(self, arr):
        return self.matrix @ arr + self.b.as_array()

    def _power(self, n, arr):
        matrix, shift = self.matrix, self.b.as_array()
        out = arr
        with np.errstate(over="ignore", invalid="ignore"):
            for _ in range(n):
                out = matrix @ out + shift
                if not np.all(np.isfinite(out)):
                    break
        return out

    def to_dict(self):
        return {"kind": self.kind, "A": [list(row) for row in self.A], "b": list(self.b.coords)}


@dataclass(frozen=True)
class Clamp(OperatorSpec):
    """Componentwise projection onto the box [lo, hi]^d; idempotent."""

    lo: float
    hi: float
    kind = "clamp"

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)) or self.lo > self.hi:
            raise InvalidInputError(f"clamp bounds must be finite with lo <= hi, got [{self.lo}, {self.hi}]")
        object.__setattr__(self, "lo", float(self.lo))
        object.__setattr__(self, "hi", float(self.hi))

    @property
    def dim(self) -> int:
        return 0

    @property
    def has_closed_power(self) -> bool:
        return True

    def _apply(self, arr):
        return np.clip(arr, self.lo, self.hi)

    def _power(self, n, arr):
        return self._apply(arr)

    def to_dict(self):
        return {"kind": self.kind, "lo": self.lo, "hi": self.hi}


def apply(T: OperatorSpec, x: Point) -> Point:
    """T(x)."""
    T.check_dim(x)
    return _finite_point(T._apply(x.as_array()), f"{T.kind} image")


def power_apply(T: OperatorSpec, n: int, x: Point) -> Point:
    """T^n(x), the n-fold composition."""
    if n < 1:
        raise InvalidInputError(f"power must be >= 1, got {n}")
    T.check_dim(x)
    with np.errstate(over="ignore", invalid="ignore"):
        out = T._power(n, x.as_array())
    return _finite_point(out, f"{T.kind}^{n} image")


def orbit(T: OperatorSpec, x: Point, n_max: int) -> Iterator[Tuple[int, Point]]:
    """Yield (n, T^n x) for n = 1..n_max."""
    if T.has_closed_power:
        for n in range(1, n_max + 1):
            yield n, power_apply(T, n, x)
        return
    current = x
    for n in range(1, n_max + 1):
        current = apply(T, current)
        yield n, current


def has_bounded_range(T: OperatorSpec) -> bool:
    """Whether T(R^d) is bounded; only constant maps qualify outside clamp."""
    if isinstance(T, Clamp):
        return True
    if isinstance(T, Scaling):
        return T.c == 0.0
    if isinstance(T, TowardPoint):
        return T.r == 0.0
    if isinstance(T, Affine):
        return not np.any(T.matrix)
    return False


def known_fixed_points(T: OperatorSpec, dim: int) -> List[Point]:
    """
    Fixed points that follow from the structure of T.

    Returns two distinct points whenever the fixed-point set is not a
    singleton, so a uniqueness check has a witness to find.
    """
    if isinstance(T, Scaling):
        points = [Point.zeros(dim)]
        if T.c == 1.0:
            points.append(Point((1.0,) * dim))
        return points
    if isinstance(T, TowardPoint):
        points = [T.center]
        if T.r == 1.0:
            points.append(T.center + Point((1.0,) * T.dim))
        return points
    if isinstance(T, Affine):
        system = np.eye(T.dim) - T.matrix
        solution, _, rank, _ = np.linalg.lstsq(system, T.b.as_array(), rcond=None)
        if not np.allclose(system @ solution, T.b.as_array(), rtol=1e-12, atol=1e-12):
            logger.debug("affine map has no fixed point; (I - A) x = b is inconsistent")
            return []
        points = [Point(solution)]
        if rank < T.dim:
            _, _, vt = np.linalg.svd(system)
            points.append(Point(solution + vt[-1]))
        return points
    if isinstance(T, Clamp):
        points = [Point((T.lo,) * dim)]
        if T.hi != T.lo:
            points.append(Point((T.hi,) * dim))
        return points
    return []


def operator_from_dict(data: Dict) -> OperatorSpec:
    """Build an operator from its JSON form; assumes keys were validated."""
    kind = data["kind"]
    if kind == "scaling":
        return Scaling(float(data["c"]))
    if kind == "toward_point":
        return TowardPoint(Point(data["center"]), float(data["r"]))
    if kind == "affine":
        return Affine(tuple(tuple(row) for row in data["A"]), Point(data["b"]))
    if kind == "clamp":
        return Clamp(float(data["lo"]), float(data["hi"]))
    raise InvalidInputError(f"Unknown operator kind: {kind}")


@dataclass(frozen=True)
class KSequence:
    """k_n = 1 + c / n^s."""

    c: float = 0.0
    s: float = 1.0

    def __post_init__(self):
        if not self.c >= 0.0 or not math.isfinite(self.c):
            raise InvalidInputError(f"k-sequence needs c >= 0, got {self.c}")
        if not self.s > 0.0 or not math.isfinite(self.s):
            raise InvalidInputError(f"k-sequence needs s > 0, got {self.s}")

    def __call__(self, n: int) -> float:
        return 1.0 + self.c / float(n) ** self.s

    def to_dict(self):
        return {"c": self.c, "s": self.s}


@dataclass(frozen=True)
class PsiSpec:
    """Psi(t) = lam * t^m, strictly increasing on [0, inf) with Psi(0) = 0."""

    lam: float
    m: float = 1.0

    def __post_init__(self):
        if not self.lam > 0.0 or not math.isfinite(self.lam):
            raise InvalidInputError(f"Psi needs lambda > 0, got {self.lam}")
        if not self.m >= 1.0 or not math.isfinite(self.m):
            raise InvalidInputError(f"Psi needs m >= 1, got {self.m}")

    def __call__(self, t: float) -> float:
        return self.lam * t ** self.m

    def to_dict(self):
        return {"lambda": self.lam, "m": self.m}
