"""
Checkers for the operator classes.

Every "for all n >= 1" quantifier is truncated to a horizon n_max and every
"for all x, y" to a seeded sample, so a pass is only evidence up to the tested
horizon while a fail is a concrete witness.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import InvalidInputError, PreconditionError, RangeError
from .operators import KSequence, OperatorSpec, PsiSpec, apply, orbit, power_apply
from .spaces import (
    HILBERT,
    NormTag,
    Point,
    distance,
    duality_pairing,
    holds,
    require_same_dim,
)

logger = logging.getLogger(__name__)

DEFAULT_N_MAX = 64
DEFAULT_SAMPLES = 256
DEFAULT_SAMPLE_RADIUS = 10.0
FIXED_POINT_TOL = 1e-12
DISTINCT_TOL = 1e-9

PASS = "pass"
FAIL = "fail"

STAR_READING = "rhs uses k_n * ||x - x*||^2 (printed subscript on x_n read as x)"

Pair = Tuple[Point, Point]


@dataclass(frozen=True)
class Violation:
    n: int
    witness: Tuple[Point, ...]
    lhs: float
    rhs: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "witness": [list(p.coords) for p in self.witness],
            "lhs": self.lhs,
            "rhs": self.rhs,
        }


@dataclass
class CheckReport:
    name: str
    verdict: str
    n_tested: int
    samples_tested: int
    horizon: int
    first_violation: Optional[Violation] = None
    seed: Optional[int] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "verdict": self.verdict,
            "horizon": self.horizon,
            "n_tested": self.n_tested,
            "samples_tested": self.samples_tested,
            "seed": self.seed,
            "first_violation": self.first_violation.to_dict() if self.first_violation else None,
            "metadata": self.metadata,
        }


def sample_points(dim: int, count: int = DEFAULT_SAMPLES, seed: int = 0,
                  radius: float = DEFAULT_SAMPLE_RADIUS) -> List[Point]:
    """Uniform points in [-radius, radius]^dim from numpy's seeded generator."""
    if dim < 1 or count < 1:
        raise InvalidInputError(f"sampling needs dim >= 1 and count >= 1, got dim={dim}, count={count}")
    rng = np.random.default_rng(seed)
    return [Point(row) for row in rng.uniform(-radius, radius, size=(count, dim))]


def sample_pairs(dim: int, count: int = DEFAULT_SAMPLES, seed: int = 0,
                 radius: float = DEFAULT_SAMPLE_RADIUS) -> List[Pair]:
    """Seeded pairs of distinct points."""
    if dim < 1 or count < 1:
        raise InvalidInputError(f"sampling needs dim >= 1 and count >= 1, got dim={dim}, count={count}")
    rng = np.random.default_rng(seed)
    pairs: List[Pair] = []
    while len(pairs) < count:
        x, y = rng.uniform(-radius, radius, size=(2, dim))
        if np.any(x != y):
            pairs.append((Point(x), Point(y)))
    return pairs


def _nondegenerate(pairs: Sequence[Pair], tag: NormTag) -> List[Tuple[Point, Point, float]]:
    kept = []
    for x, y in pairs:
        require_same_dim(x, y)
        gap = distance(x, y, tag)
        if gap > 0.0:
            kept.append((x, y, gap))
    if not kept:
        raise InvalidInputError("every pair is degenerate (x == y)")
    return kept


def estimate_power_lipschitz(T: OperatorSpec, n: int, pairs: Sequence[Pair],
                             tag: NormTag = HILBERT) -> float:
    """max ||T^n x - T^n y|| / ||x - y|| over the pairs; a lower bound on Lip(T^n)."""
    best = 0.0
    for x, y, gap in _nondegenerate(pairs, tag):
        ratio = distance(power_apply(T, n, x), power_apply(T, n, y), tag) / gap
        best = max(best, ratio)
    return best


def _ratio_check(name: str, T: OperatorSpec, L: float, n_max: int,
                 pairs: Sequence[Pair], tag: NormTag, seed: Optional[int]) -> CheckReport:
    if not L > 0.0:
        raise InvalidInputError(f"Lipschitz bound must be positive, got {L}")
    if n_max < 1:
        raise InvalidInputError(f"n_max must be >= 1, got {n_max}")
    kept = _nondegenerate(pairs, tag)
    orbits = [(orbit(T, x, n_max), orbit(T, y, n_max), x, y, gap) for x, y, gap in kept]
    bound = L * (1.0 + 1e-9)
    evaluated = 0
    for n in range(1, n_max + 1):
        for ox, oy, x, y, gap in orbits:
            evaluated += 1
            try:
                _, tx = next(ox)
                _, ty = next(oy)
            except RangeError as exc:
                logger.debug("%s fails at n=%d: %s", name, n, exc)
                return CheckReport(name, FAIL, n, evaluated, n_max, None, seed, {"L": L, "overflow": str(exc)})
            ratio = distance(tx, ty, tag) / gap
            if ratio > bound:
                logger.debug("%s fails at n=%d: ratio %.17g > %.17g", name, n, ratio, L)
                return CheckReport(name, FAIL, n, evaluated, n_max,
                                   Violation(n, (x, y), ratio, L), seed, {"L": L})
    return CheckReport(name, PASS, n_max, evaluated, n_max, None, seed, {"L": L})


def check_lipschitz(T: OperatorSpec, L: float, pairs: Sequence[Pair],
                    tag: NormTag = HILBERT, seed: Optional[int] = None) -> CheckReport:
    """||Tx - Ty|| <= L ||x - y|| for a single application."""
    return _ratio_check("lipschitz", T, L, 1, pairs, tag, seed)


def check_uniform_lipschitz(T: OperatorSpec, L: float, n_max: int, pairs: Sequence[Pair],
                            tag: NormTag = HILBERT, seed: Optional[int] = None) -> CheckReport:
    """
    ||T^n x - T^n y|| <= L ||x - y|| for every n <= n_max.

    The violation's lhs is the observed ratio and rhs is L, so the earliest
    failing n is reported with the ratio that broke the bound.
    """
    return _ratio_check("uniform_lipschitz", T, L, n_max, pairs, tag, seed)


def check_asymptotic_pseudocontractivity(T: OperatorSpec, k: KSequence, n_max: int,
                                         pairs: Sequence[Pair], tag: NormTag = HILBERT,
                                         seed: Optional[int] = None) -> CheckReport:
    """<T^n x - T^n y, j(x - y)> <= k_n ||x - y||^2 for every n <= n_max."""
    if n_max < 1:
        raise InvalidInputError(f"n_max must be >= 1, got {n_max}")
    kept = _nondegenerate(pairs, tag)
    orbits = [(orbit(T, x, n_max), orbit(T, y, n_max), x, y, x - y, gap) for x, y, gap in kept]
    evaluated = 0
    for n in range(1, n_max + 1):
        k_n = k(n)
        for ox, oy, x, y, diff, gap in orbits:
            _, tx = next(ox)
            _, ty = next(oy)
            evaluated += 1
            lhs = duality_pairing(tx - ty, diff, tag)
            rhs = k_n * gap * gap
            if not holds(lhs, rhs):
                return CheckReport("asymptotic_pseudocontractivity", FAIL, n, evaluated, n_max,
                                   Violation(n, (x, y), lhs, rhs), seed, {"k": k.to_dict()})
    return CheckReport("asymptotic_pseudocontractivity", PASS, n_max, evaluated, n_max,
                       None, seed, {"k": k.to_dict()})


def fixed_point_residual(T: OperatorSpec, xstar: Point, tag: NormTag = HILBERT) -> float:
    return distance(apply(T, xstar), xstar, tag)


def check_star_condition(T: OperatorSpec, xstar: Point, k: KSequence, psi: PsiSpec, n_max: int,
                         samples: Sequence[Point], tag: NormTag = HILBERT,
                         seed: Optional[int] = None) -> CheckReport:
    """
    <T^n x - x*, j(x - x*)> <= k_n ||x - x*||^2 - Psi(||x - x*||).

    x* must be a fixed point of T to within FIXED_POINT_TOL; otherwise a
    PreconditionError carrying the residual is raised.
    """
    if n_max < 1:
        raise InvalidInputError(f"n_max must be >= 1, got {n_max}")
    residual = fixed_point_residual(T, xstar, tag)
    if residual > FIXED_POINT_TOL:
        raise PreconditionError(f"x* is not a fixed point of {T.kind}: ||T x* - x*|| = {residual:.6g}",
                                residual=residual)
    metadata = {"k": k.to_dict(), "psi": psi.to_dict(), "reading": STAR_READING,
                "xstar": list(xstar.coords)}
    prepared = []
    for x in samples:
        require_same_dim(x, xstar)
        offset = x - xstar
        radius = distance(x, xstar, tag)
        prepared.append((orbit(T, x, n_max), x, offset, radius, psi(radius)))
    evaluated = 0
    for n in range(1, n_max + 1):
        k_n = k(n)
        for ox, x, offset, radius, penalty in prepared:
            _, tx = next(ox)
            evaluated += 1
            lhs = duality_pairing(tx - xstar, offset, tag)
            rhs = k_n * radius * radius - penalty
            if not holds(lhs, rhs):
                return CheckReport("star_condition", FAIL, n, evaluated, n_max,
                                   Violation(n, (x, xstar), lhs, rhs), seed, metadata)
    return CheckReport("star_condition", PASS, n_max, evaluated, n_max, None, seed, metadata)


def assert_unique_fixed_point(T: OperatorSpec, xstar: Point, candidates: Sequence[Point],
                              tag: NormTag = HILBERT, seed: Optional[int] = None) -> CheckReport:
    """
    Look for a second fixed point among the candidates.

    Meant to follow a passing check_star_condition; it is a consistency check
    on the operator, not a proof of uniqueness.
    """
    evaluated = 0
    for y in candidates:
        require_same_dim(y, xstar)
        evaluated += 1
        moved = distance(apply(T, y), y, tag)
        apart = distance(y, xstar, tag)
        if moved <= FIXED_POINT_TOL and apart > DISTINCT_TOL:
            return CheckReport("unique_fixed_point", FAIL, 1, evaluated, 1,
                               Violation(1, (y, xstar), apart, DISTINCT_TOL), seed,
                               {"xstar": list(xstar.coords)})
    return CheckReport("unique_fixed_point", PASS, 1, evaluated, 1, None, seed,
                       {"xstar": list(xstar.coords)})
