"""
Finite-dimensional real l_p spaces.

Points are immutable vectors of finite floats. The normalized duality map is
single-valued for 1 < p < inf and is evaluated with the usual l_p selection

    j(x)_i = ||x||_p^(2-p) * |x_i|^(p-1) * sign(x_i)

written in a scaled form so that large or tiny coordinates do not overflow.
"""

import math
from dataclasses import dataclass
from typing import Iterable, Tuple, Union

import numpy as np

from .errors import DimensionMismatchError, InvalidInputError

REL_TOL = 1e-9

ArrayLike = Union[np.ndarray, Iterable[float]]


@dataclass(frozen=True)
class NormTag:
    """Exponent p of the l_p norm carried by a space."""

    p: float = 2.0

    def __post_init__(self):
        p = float(self.p)
        if not math.isfinite(p) or p <= 1.0:
            raise InvalidInputError(
                f"Norm exponent must satisfy 1 < p < inf (duality map is multivalued otherwise), got {self.p}"
            )
        object.__setattr__(self, "p", p)

    @property
    def q(self) -> float:
        """Conjugate exponent, 1/p + 1/q = 1."""
        return self.p / (self.p - 1.0)


HILBERT = NormTag(2.0)


def _as_coords(values: ArrayLike, what: str) -> Tuple[float, ...]:
    arr = np.asarray(list(values) if not isinstance(values, np.ndarray) else values, dtype=float)
    if arr.ndim != 1:
        raise InvalidInputError(f"{what} must be a flat list of numbers")
    if arr.size == 0:
        raise InvalidInputError(f"{what} must have dimension >= 1")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{what} has non-finite coordinates: {arr.tolist()}")
    return tuple(float(v) for v in arr)


@dataclass(frozen=True)
class Point:
    """An element of R^d."""

    coords: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "coords", _as_coords(self.coords, "Point"))

    @classmethod
    def of(cls, *values: float) -> "Point":
        return cls(tuple(values))

    @classmethod
    def zeros(cls, dim: int) -> "Point":
        if dim < 1:
            raise InvalidInputError(f"dim must be >= 1, got {dim}")
        return cls((0.0,) * dim)

    @property
    def dim(self) -> int:
        return len(self.coords)

    def as_array(self) -> np.ndarray:
        return np.array(self.coords, dtype=float)

    def __sub__(self, other: "Point") -> "Point":
        require_same_dim(self, other)
        return Point(self.as_array() - other.as_array())

    def __add__(self, other: "Point") -> "Point":
        require_same_dim(self, other)
        return Point(self.as_array() + other.as_array())

    def scaled(self, factor: float) -> "Point":
        return Point(factor * self.as_array())

    def permuted(self, order: Iterable[int]) -> "Point":
        return Point(tuple(self.coords[i] for i in order))


@dataclass(frozen=True)
class DualVector:
    """A functional on R^d, represented by its coordinates."""

    coords: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "coords", _as_coords(self.coords, "DualVector"))

    @property
    def dim(self) -> int:
        return len(self.coords)

    def as_array(self) -> np.ndarray:
        return np.array(self.coords, dtype=float)


def require_same_dim(a, b) -> None:
    if a.dim != b.dim:
        raise DimensionMismatchError(a.dim, b.dim)


def array_norm(arr: np.ndarray, p: float) -> float:
    """l_p norm of a raw array, scaled by the largest magnitude."""
    mags = np.abs(arr)
    top = float(mags.max()) if mags.size else 0.0
    if top == 0.0:
        return 0.0
    if not math.isfinite(top):
        return math.inf
    return top * float(np.sum((mags / top) ** p)) ** (1.0 / p)


def norm(x: Point, tag: NormTag = HILBERT) -> float:
    """(sum |x_i|^p)^(1/p)."""
    return array_norm(x.as_array(), tag.p)


def distance(x: Point, y: Point, tag: NormTag = HILBERT) -> float:
    """||x - y|| in the given norm."""
    require_same_dim(x, y)
    return array_norm(x.as_array() - y.as_array(), tag.p)


def duality_array(arr: np.ndarray, p: float) -> np.ndarray:
    if p == 2.0:
        return arr.copy()
    size = array_norm(arr, p)
    if size == 0.0:
        return np.zeros_like(arr)
    return size * (np.abs(arr) / size) ** (p - 1.0) * np.sign(arr)


def duality_map(x: Point, tag: NormTag = HILBERT) -> DualVector:
    """
    Single-valued normalized duality map j(x).

    Satisfies <x, j(x)> = ||x||^2 and ||j(x)||_q = ||x||_p. The Hilbert case
    p = 2 returns the coordinates untouched.
    """
    return DualVector(duality_array(x.as_array(), tag.p))


def duality_pairing(u: Point, x: Point, tag: NormTag = HILBERT) -> float:
    """<u, j(x)>."""
    require_same_dim(u, x)
    return float(np.dot(u.as_array(), duality_array(x.as_array(), tag.p)))


def dual_norm(f: DualVector, tag: NormTag = HILBERT) -> float:
    """Norm of a functional, measured in the conjugate exponent."""
    return array_norm(f.as_array(), tag.q)


def slack(rhs: float) -> float:
    """Allowed excess of lhs over rhs in an inequality check."""
    return REL_TOL * (1.0 + abs(rhs))


def holds(lhs: float, rhs: float) -> bool:
    """lhs <= rhs up to the relative slack."""
    return lhs <= rhs + slack(rhs)
