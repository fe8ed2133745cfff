"""
Exact reproduction of the doubling-map counterexample.

With T x = 2x, y_n = 1 + 1/n and x_{n+1} = 1 - 1/n, the pair gap 2/n tends
to zero while |T^n y_n - T^n x_{n+1}| = 2^{n+1}/n never drops below 1, so
uniform continuity of T does not make the power gap vanish. Replacing T by a
contraction r x (uniformly Lipschitzian) makes d_n = M r^n 2/n vanish.

Everything here is rational arithmetic on fractions.Fraction; no float is
ever produced.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Tuple, Union

from .errors import ConsistencyError, InvalidInputError

logger = logging.getLogger(__name__)

ExactScalar = Fraction
Rational = Union[int, Fraction, str]

DEFAULT_HORIZON = 4096
DEFAULT_THRESHOLD = Fraction(1, 10**6)


def exact(value: Rational) -> Fraction:
    """Coerce to Fraction; floats are refused so nothing is rounded silently."""
    if isinstance(value, float):
        raise InvalidInputError(f"exact arithmetic refuses float input {value!r}; pass a string or Fraction")
    return Fraction(value)


def render(value: Fraction) -> str:
    """numerator/denominator, with integers as k/1."""
    return f"{value.numerator}/{value.denominator}"


def _require_index(n: int) -> None:
    if not isinstance(n, int) or n < 1:
        raise InvalidInputError(f"index must be a positive integer, got {n!r}")


def example_sequences(n: int) -> Tuple[Fraction, Fraction]:
    """(y_n^1, x_{n+1}) = (1 + 1/n, 1 - 1/n)."""
    _require_index(n)
    step = Fraction(1, n)
    return 1 + step, 1 - step


def doubling_power(n: int, x: Rational) -> Fraction:
    """T^n x = 2^n x for the doubling map."""
    _require_index(n)
    return exact(x) * (1 << n)


def doubling_power_iterated(n: int, x: Rational) -> Fraction:
    """2^n x by n successive doublings."""
    _require_index(n)
    out = exact(x)
    for _ in range(n):
        out = out * 2
    return out


def scaled_power(c: Rational, n: int, x: Rational) -> Fraction:
    """c^n x, exactly."""
    _require_index(n)
    return exact(c) ** n * exact(x)


def scaled_gap(c: Rational, n: int) -> Fraction:
    """|c^n y_n - c^n x_{n+1}| for T x = c x; equals |c|^n 2/n."""
    y, x = example_sequences(n)
    return abs(scaled_power(c, n, y) - scaled_power(c, n, x))


def gap(n: int) -> Fraction:
    """|T^n y_n - T^n x_{n+1}|, checked against 2^{n+1}/n."""
    y, x = example_sequences(n)
    value = abs(doubling_power(n, y) - doubling_power(n, x))
    closed = Fraction(1 << (n + 1), n)
    if value != closed:
        raise ConsistencyError(f"gap({n}) = {render(value)} differs from 2^{n + 1}/{n}")
    return value


def pair_gap_threshold(epsilon: Rational) -> int:
    """Smallest n with 2/n < epsilon, i.e. floor(2/epsilon) + 1."""
    eps = exact(epsilon)
    if eps <= 0:
        raise InvalidInputError(f"epsilon must be positive, got {epsilon}")
    n = math.floor(Fraction(2) / eps) + 1
    if not Fraction(2, n) < eps or (n > 1 and Fraction(2, n - 1) < eps):
        raise ConsistencyError(f"threshold {n} is not the least index with 2/n < {render(eps)}")
    return n


@dataclass
class NoteReport:
    horizon: int
    min_gap: Fraction
    min_gap_at: List[int]
    checks: Dict[str, bool]
    samples: Dict[int, Fraction]
    epsilon: Optional[Fraction] = None
    epsilon_threshold: Optional[int] = None
    notes: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_dict(self):
        return {
            "horizon": self.horizon,
            "min_gap": render(self.min_gap),
            "min_gap_at": self.min_gap_at,
            "checks": self.checks,
            "samples": {str(n): render(v) for n, v in self.samples.items()},
            "epsilon": render(self.epsilon) if self.epsilon is not None else None,
            "epsilon_threshold": self.epsilon_threshold,
            "notes": self.notes,
        }


def sample_indices(N: int) -> List[int]:
    """1, 2, 3, powers of two and N itself, capped at N."""
    picks = {1, 2, 3, N}
    k = 4
    while k <= N:
        picks.add(k)
        k *= 2
    return sorted(n for n in picks if n <= N)


def verify_note_claims(N: int = DEFAULT_HORIZON, epsilon: Optional[Rational] = None) -> NoteReport:
    """
    Verify the counterexample identities exactly for every n <= N.

    Checks |y - x| = 2/n, gap(n) = 2^{n+1}/n, 2^{n+1} >= n, gap(n) >= 1 and
    that gap(n) n = 2^{n+1} is strictly increasing (which carries the
    induction 2^{n+2} >= 2 * 2^{n+1} >= n + 1 past the horizon). Any failure
    raises ConsistencyError.
    """
    _require_index(N)
    wanted = set(sample_indices(N))
    samples: Dict[int, Fraction] = {}
    min_gap: Optional[Fraction] = None
    min_at: List[int] = []
    previous = 0
    for n in range(1, N + 1):
        y, x = example_sequences(n)
        if y - x != Fraction(2, n):
            raise ConsistencyError(f"pair gap at n={n} is {render(y - x)}, not 2/{n}")
        value = gap(n)
        power = 1 << (n + 1)
        if power < n:
            raise ConsistencyError(f"2^{n + 1} < {n}")
        if value < 1:
            raise ConsistencyError(f"gap({n}) = {render(value)} < 1")
        scaled = value * n
        if scaled != power or scaled <= previous:
            raise ConsistencyError(f"gap(n) * n is not strictly increasing at n={n}")
        previous = scaled
        if min_gap is None or value < min_gap:
            min_gap, min_at = value, [n]
        elif value == min_gap:
            min_at.append(n)
        if n in wanted:
            samples[n] = value
    report = NoteReport(
        horizon=N,
        min_gap=min_gap,
        min_gap_at=min_at,
        checks={
            "pair_gap_is_2_over_n": True,
            "gap_closed_form": True,
            "power_dominates_index": True,
            "gap_at_least_one": True,
            "gap_times_n_increasing": True,
        },
        samples=samples,
        notes=[f"verified exactly for 1 <= n <= {N}; beyond N by the monotone witness gap(n) n = 2^(n+1)"],
    )
    if epsilon is not None:
        report.epsilon = exact(epsilon)
        report.epsilon_threshold = pair_gap_threshold(report.epsilon)
    logger.debug("note claims verified up to N=%d", N)
    return report


@dataclass
class CorrectedReport:
    ratio: Fraction
    horizon: int
    M: Fraction
    L: Fraction
    d: Dict[int, Fraction]
    tail_max: Dict[int, Fraction]
    threshold: Fraction
    first_below: Optional[int]
    bound_holds: bool

    @property
    def passed(self) -> bool:
        return self.bound_holds

    def to_dict(self, picks: Iterable[int]):
        """Summary with the tail maxima at the given n only."""
        return {
            "ratio": render(self.ratio),
            "horizon": self.horizon,
            "M": render(self.M),
            "L": render(self.L),
            "tail_max": {str(n): render(self.tail_max[n]) for n in picks if n in self.tail_max},
            "threshold": render(self.threshold),
            "first_below": self.first_below,
            "bound_holds": self.bound_holds,
        }


def tail_maxima(values: Dict[int, Fraction]) -> Dict[int, Fraction]:
    """max_{m >= n} values[m] for every n, over a finite horizon."""
    out: Dict[int, Fraction] = {}
    running: Optional[Fraction] = None
    for n in sorted(values, reverse=True):
        running = values[n] if running is None else max(running, values[n])
        out[n] = running
    return dict(sorted(out.items()))


def threshold_index(tails: Dict[int, Fraction], threshold: Fraction) -> Optional[int]:
    """First n whose tail maximum is strictly below the threshold."""
    return next((n for n in sorted(tails) if tails[n] < threshold), None)


def corrected_demo(r: Rational = Fraction(1, 2), N: int = 64, M: Rational = 1, L: Rational = 1,
                   threshold: Rational = DEFAULT_THRESHOLD) -> CorrectedReport:
    """
    d_n = M |T^n y_n - T^n x_{n+1}| for T x = r x, 0 < r < 1 <= L.

    Verifies d_n = M r^n 2/n <= M L 2/n for all n <= N and that the tail
    maxima are nonincreasing, then reports the first n_0 whose tail maximum
    is below the threshold.
    """
    _require_index(N)
    r, M, L, threshold = exact(r), exact(M), exact(L), exact(threshold)
    if not (0 < r < 1):
        raise InvalidInputError(f"ratio must satisfy 0 < r < 1, got {render(r)}")
    if L < 1:
        raise InvalidInputError(f"L must be >= 1, got {render(L)}")
    if M <= 0:
        raise InvalidInputError(f"M must be positive, got {render(M)}")
    d: Dict[int, Fraction] = {}
    bound_holds = True
    for n in range(1, N + 1):
        y, x = example_sequences(n)
        value = M * abs(scaled_power(r, n, y) - scaled_power(r, n, x))
        if value != M * r ** n * Fraction(2, n):
            raise ConsistencyError(f"d_{n} = {render(value)} differs from M r^n 2/n")
        bound_holds = bound_holds and value <= M * L * Fraction(2, n)
        d[n] = value
    tails = tail_maxima(d)
    ordered = [tails[n] for n in sorted(tails)]
    if any(later > earlier for earlier, later in zip(ordered, ordered[1:])):
        raise ConsistencyError("tail maxima of d_n increase")
    first_below = threshold_index(tails, threshold)
    return CorrectedReport(r, N, M, L, d, tails, threshold, first_below, bound_holds)
