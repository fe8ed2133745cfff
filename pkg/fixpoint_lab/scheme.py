"""
Multi-step Mann-type iteration for a finite family T_1..T_p.

At step n, with powers T_l^n:

    y^{p-1} = (1 - b^{p-1}) x_n + b^{p-1} T_p^n x_n
    y^i     = (1 - b^i) x_n + b^i T_{i+1}^n y^{i+1},   i = p-2 .. 1
    x_{n+1} = (1 - a) x_n + a T_1^n y^1

Stages are evaluated bottom-up. Every convex combination is computed as
x + t (v - x), which returns x bit-exactly when v == x.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .checks import FAIL, PASS, CheckReport, Violation, fixed_point_residual
from .errors import DivergenceError, InvalidInputError, RangeError
from .operators import OperatorSpec, has_bounded_range, power_apply
from .spaces import HILBERT, NormTag, Point, distance, holds, require_same_dim

logger = logging.getLogger(__name__)

DIVERGENCE_BOUND = 1e150


@dataclass(frozen=True)
class ScheduleSpec:
    """s_n = a / (n + b)^q, clamped to [0, 1]. a = 0 is the zero schedule."""

    a: float
    b: float = 0.0
    q: float = 1.0

    def __post_init__(self):
        if not (0.0 <= self.a <= 1.0):
            raise InvalidInputError(f"schedule needs 0 <= a <= 1, got a={self.a}")
        if not (self.b >= 0.0 and math.isfinite(self.b)):
            raise InvalidInputError(f"schedule needs b >= 0, got b={self.b}")
        if not (self.q >= 0.0 and math.isfinite(self.q)):
            raise InvalidInputError(f"schedule needs q >= 0, got q={self.q}")

    @classmethod
    def zero(cls) -> "ScheduleSpec":
        return cls(0.0, 0.0, 0.0)

    @property
    def tends_to_zero(self) -> bool:
        return self.q > 0.0 or self.a == 0.0

    @property
    def diverges(self) -> bool:
        """Sum of s_n is infinite (p-series rule)."""
        return self.a > 0.0 and self.q <= 1.0

    def to_dict(self):
        return {"a": self.a, "b": self.b, "q": self.q}


def schedule_value(s: ScheduleSpec, n: int) -> float:
    if n < 1:
        raise InvalidInputError(f"schedule index must be >= 1, got {n}")
    return min(1.0, max(0.0, s.a / (n + s.b) ** s.q))


@dataclass(frozen=True)
class IterationConfig:
    p: int
    operators: Tuple[OperatorSpec, ...]
    alpha: ScheduleSpec
    betas: Tuple[ScheduleSpec, ...]
    x1: Point
    xstar: Optional[Point] = None
    n_max: int = 10_000
    tol: float = 1e-3
    M: float = 1.0
    norm: NormTag = HILBERT

    def __post_init__(self):
        object.__setattr__(self, "operators", tuple(self.operators))
        object.__setattr__(self, "betas", tuple(self.betas))
        if self.p < 2:
            raise InvalidInputError(f"the scheme needs p >= 2 operators, got p={self.p}")
        if len(self.operators) != self.p:
            raise InvalidInputError(f"expected {self.p} operators, got {len(self.operators)}")
        if len(self.betas) != self.p - 1:
            raise InvalidInputError(f"expected {self.p - 1} beta schedules, got {len(self.betas)}")
        for T in self.operators:
            T.check_dim(self.x1)
        if self.xstar is not None:
            require_same_dim(self.x1, self.xstar)
        if self.n_max < 1:
            raise InvalidInputError(f"n_max must be >= 1, got {self.n_max}")
        if not self.tol >= 0.0:
            raise InvalidInputError(f"tol must be >= 0, got {self.tol}")
        if not (self.M > 0.0 and math.isfinite(self.M)):
            raise InvalidInputError(f"M must be positive, got {self.M}")

    @property
    def dim(self) -> int:
        return self.x1.dim


@dataclass(frozen=True)
class TraceRecord:
    n: int
    x_n: Point
    y_n: Tuple[Point, ...]
    x_next: Point
    residual: Optional[float]
    pair_gap: float
    d_n: float


@dataclass(frozen=True)
class HypothesisReport:
    cond_i_holds: bool
    cond_ii_holds: bool
    p_valid: bool
    notes: str

    def to_dict(self):
        return {
            "cond_i_holds": self.cond_i_holds,
            "cond_ii_holds": self.cond_ii_holds,
            "p_valid": self.p_valid,
            "notes": self.notes,
        }


@dataclass(frozen=True)
class OperatorHypotheses:
    t1_bounded_range: bool
    t2_bounded_range: bool
    xstar_residual: Optional[float] = None
    xstar_common_fixed: Optional[bool] = None

    def to_dict(self):
        return {
            "t1_bounded_range": self.t1_bounded_range,
            "t2_bounded_range": self.t2_bounded_range,
            "xstar_residual": self.xstar_residual,
            "xstar_common_fixed": self.xstar_common_fixed,
        }


def classify_hypotheses(config: IterationConfig) -> HypothesisReport:
    """Conditions (i) and (ii) read off the schedule exponents alone."""
    alpha, beta1 = config.alpha, config.betas[0]
    cond_i = alpha.tends_to_zero and beta1.tends_to_zero
    cond_ii = alpha.diverges
    notes = []
    if not alpha.tends_to_zero:
        notes.append(f"alpha_n does not tend to 0 (q={alpha.q})")
    if not beta1.tends_to_zero:
        notes.append(f"beta_n^1 does not tend to 0 (q={beta1.q})")
    if not cond_ii:
        notes.append(f"sum of alpha_n converges (q={alpha.q} > 1)")
    if config.p > 2:
        notes.append("beta^2..beta^{p-1} are unconstrained")
    return HypothesisReport(cond_i, cond_ii, config.p >= 2, "; ".join(notes) or "all schedule conditions hold")


def classify_operators(config: IterationConfig) -> OperatorHypotheses:
    """Operator-side hypotheses: bounded ranges and whether x* is a common fixed point."""
    T1, T2 = config.operators[0], config.operators[1]
    residual = common = None
    if config.xstar is not None:
        residual = max(fixed_point_residual(T, config.xstar, config.norm) for T in config.operators)
        common = residual <= 1e-12
    return OperatorHypotheses(has_bounded_range(T1), has_bounded_range(T2), residual, common)


def _guard(arr: np.ndarray, n: int, stage: str) -> Point:
    if not np.all(np.isfinite(arr)) or np.max(np.abs(arr)) > DIVERGENCE_BOUND:
        raise DivergenceError(n, stage, f"coordinate magnitude exceeds {DIVERGENCE_BOUND:g}")
    return Point(arr)


def _power(T: OperatorSpec, n: int, x: Point, stage: str) -> np.ndarray:
    try:
        return power_apply(T, n, x).as_array()
    except RangeError as exc:
        raise DivergenceError(n, stage, str(exc)) from exc


def _combine(x: np.ndarray, t: float, v: np.ndarray) -> np.ndarray:
    return x + t * (v - x)


def step(config: IterationConfig, x_n: Point, n: int) -> Tuple[Point, List[Point]]:
    """One application of the scheme; returns x_{n+1} and [y^1, .., y^{p-1}]."""
    if n < 1:
        raise InvalidInputError(f"step index must be >= 1, got {n}")
    ops, p = config.operators, config.p
    x = x_n.as_array()
    ys: List[Point] = [x_n] * (p - 1)
    inner = x_n
    for i in range(p - 1, 0, -1):
        beta = schedule_value(config.betas[i - 1], n)
        image = _power(ops[i], n, inner, f"T_{i + 1}^n")
        inner = _guard(_combine(x, beta, image), n, f"y^{i}")
        ys[i - 1] = inner
    alpha = schedule_value(config.alpha, n)
    image = _power(ops[0], n, inner, "T_1^n")
    x_next = _guard(_combine(x, alpha, image), n, "x_next")
    return x_next, ys


def _record(config: IterationConfig, n: int, x_n: Point, ys: Sequence[Point], x_next: Point) -> TraceRecord:
    tag = config.norm
    residual = distance(x_n, config.xstar, tag) if config.xstar is not None else None
    pair_gap = distance(ys[0], x_next, tag)
    T1 = config.operators[0]
    d_n = config.M * distance(power_apply(T1, n, ys[0]), power_apply(T1, n, x_next), tag)
    return TraceRecord(n, x_n, tuple(ys), x_next, residual, pair_gap, d_n)


def run(config: IterationConfig) -> List[TraceRecord]:
    """
    Iterate from x_1 until n_max, or until the residual drops to tol when x*
    is known. A DivergenceError leaves with the partial trace attached.
    """
    trace: List[TraceRecord] = []
    x = config.x1
    for n in range(1, config.n_max + 1):
        try:
            x_next, ys = step(config, x, n)
            record = _record(config, n, x, ys, x_next)
        except (DivergenceError, RangeError) as exc:
            if isinstance(exc, RangeError):
                exc = DivergenceError(n, "d_n", str(exc))
            exc.trace = trace
            logger.debug("run diverged after %d records", len(trace))
            raise exc
        trace.append(record)
        if record.residual is not None and record.residual <= config.tol:
            logger.debug("residual %.3g <= tol at n=%d", record.residual, n)
            break
        x = x_next
    return trace


def termination_reason(config: IterationConfig, trace: Sequence[TraceRecord]) -> str:
    """Why a finished run stopped."""
    last = trace[-1]
    if last.residual is not None and last.residual <= config.tol:
        return f"residual {last.residual:.6g} <= tol {config.tol:g} at n={last.n}"
    return f"reached n_max={config.n_max}"


def trace_from_pairs(T1: OperatorSpec, pairs: Sequence[Tuple[Point, Point]], M: float = 1.0,
                     tag: NormTag = HILBERT) -> List[TraceRecord]:
    """
    Records for externally prescribed (y_n^1, x_{n+1}) pairs, n = 1, 2, ...

    x_n and the deeper stages are not known here and are set to y_n^1.
    """
    trace = []
    for n, (y, x_next) in enumerate(pairs, start=1):
        gap = distance(y, x_next, tag)
        d_n = M * distance(power_apply(T1, n, y), power_apply(T1, n, x_next), tag)
        trace.append(TraceRecord(n, y, (y,), x_next, None, gap, d_n))
    return trace


def dn_bound_check(trace: Sequence[TraceRecord], L: float, M: float) -> CheckReport:
    """d_n <= M L ||y_n^1 - x_{n+1}|| along a trace."""
    if not trace:
        raise InvalidInputError("trace is empty")
    if not (L > 0.0 and M > 0.0):
        raise InvalidInputError(f"L and M must be positive, got L={L}, M={M}")
    for i, record in enumerate(trace, start=1):
        rhs = M * L * record.pair_gap
        if not holds(record.d_n, rhs):
            return CheckReport("dn_bound", FAIL, record.n, i, trace[-1].n,
                               Violation(record.n, (record.y_n[0], record.x_next), record.d_n, rhs),
                               None, {"L": L, "M": M})
    return CheckReport("dn_bound", PASS, trace[-1].n, len(trace), trace[-1].n, None, None, {"L": L, "M": M})


@dataclass
class ReductionComparison:
    full: List[TraceRecord]
    reduced: List[TraceRecord]
    max_deviation: float
    deviation_at: int
    notes: List[str] = field(default_factory=list)


def compare_two_operator_reduction(config: IterationConfig) -> ReductionComparison:
    """
    Run the family and its truncation to T_1, T_2 side by side.

    Both runs stop at the same horizon (the shorter of the two traces) and
    the largest distance between matching iterates is reported.
    """
    reduced_config = replace(config, p=2, operators=config.operators[:2], betas=config.betas[:1])
    full = run(config)
    reduced = run(reduced_config)
    worst, worst_n = 0.0, 1
    for a, b in zip(full, reduced):
        gap = distance(a.x_n, b.x_n, config.norm)
        if gap > worst:
            worst, worst_n = gap, a.n
    notes = []
    if config.p == 2:
        notes.append("family already has two operators; runs are identical")
    return ReductionComparison(full, reduced, worst, worst_n, notes)
