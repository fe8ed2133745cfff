"""
Property tests, driven by hypothesis.

Coordinates are drawn as integers / 1000 (or / 8 where bit-exact results are
expected) so that the engine and the independent oracles see the same floats.
"""

import math
import unittest

import hypothesis.strategies as st
import numpy as np
from hypothesis import example, given, settings

from fixpoint_lab.checks import estimate_power_lipschitz
from fixpoint_lab.operators import Clamp, Scaling, TowardPoint, apply, power_apply
from fixpoint_lab.scheme import IterationConfig, ScheduleSpec, run, schedule_value, step
from fixpoint_lab.spaces import NormTag, Point, dual_norm, duality_map, duality_pairing, norm

PROPERTY_SETTINGS = settings(max_examples=1000, derandomize=True, deadline=None)

EXPONENTS = st.sampled_from([1.5, 2.0, 3.0, 4.0])
DYADIC_FACTORS = st.sampled_from([0.5, 2.0, 0.25, -0.5])


def points(dim, scale=1000, bound=10_000):
    return st.lists(st.integers(-bound, bound), min_size=dim, max_size=dim).map(
        lambda values: Point(tuple(v / scale for v in values)))


def any_points(scale=1000):
    return st.integers(1, 5).flatmap(lambda d: points(d, scale))


def schedules():
    return st.builds(
        ScheduleSpec,
        st.sampled_from([0.25, 0.5, 1.0]),
        st.sampled_from([0.0, 1.0, 3.0]),
        st.sampled_from([0.0, 0.5, 1.0, 2.0]),
    )


def close(a, b):
    return math.isclose(a, b, rel_tol=1e-9, abs_tol=1e-12)


class TestDualityProperties(unittest.TestCase):
    """Identities of the normalized duality map."""

    @PROPERTY_SETTINGS
    @given(any_points(), EXPONENTS)
    @example(Point.of(0.0, 0.0), 3.0)
    @example(Point.of(-0.001, 10.0), 1.5)
    def test_pairing_with_itself_is_squared_norm(self, x, p):
        tag = NormTag(p)
        self.assertTrue(close(duality_pairing(x, x, tag), norm(x, tag) ** 2))

    @PROPERTY_SETTINGS
    @given(any_points(), EXPONENTS)
    def test_dual_norm_equals_norm(self, x, p):
        tag = NormTag(p)
        self.assertTrue(close(dual_norm(duality_map(x, tag), tag), norm(x, tag)))

    @PROPERTY_SETTINGS
    @given(any_points(), EXPONENTS, st.integers(-1000, 1000))
    @example(Point.of(3.0, -4.0), 3.0, 0)
    @example(Point.of(0.5, 2.0), 1.5, -250)
    def test_homogeneity(self, x, p, k):
        tag = NormTag(p)
        t = k / 100
        scaled = duality_map(x.scaled(t), tag).as_array()
        expected = t * duality_map(x, tag).as_array()
        np.testing.assert_allclose(scaled, expected, rtol=1e-12, atol=1e-12)


class TestOperatorProperties(unittest.TestCase):
    """Closed-form powers and Lipschitz estimates."""

    @PROPERTY_SETTINGS
    @given(any_points(scale=8), DYADIC_FACTORS, st.integers(1, 64))
    @example(Point.of(1250.0), 0.25, 64)
    def test_scaling_power_is_repeated_application(self, x, c, n):
        T = Scaling(c)
        repeated = x
        for _ in range(n):
            repeated = apply(T, repeated)
        self.assertEqual(power_apply(T, n, x), repeated)

    @PROPERTY_SETTINGS
    @given(points(2, scale=8), points(2, scale=8), st.sampled_from([0.5, 0.25, -0.5, 0.9, 2.0, -2.0]),
           st.integers(1, 64))
    def test_toward_point_power_is_repeated_application(self, x, center, r, n):
        T = TowardPoint(center, r)
        repeated = x
        for _ in range(n):
            repeated = apply(T, repeated)
        np.testing.assert_allclose(power_apply(T, n, x).as_array(), repeated.as_array(),
                                   rtol=1e-12, atol=1e-12)

    @PROPERTY_SETTINGS
    @given(any_points(), st.integers(-3, 3), st.integers(0, 3), st.integers(1, 64))
    def test_clamp_power_is_repeated_application(self, x, lo, width, n):
        T = Clamp(lo, lo + width)
        repeated = x
        for _ in range(n):
            repeated = apply(T, repeated)
        self.assertEqual(power_apply(T, n, x), repeated)

    @PROPERTY_SETTINGS
    @given(points(2), points(2), DYADIC_FACTORS, st.integers(1, 16), EXPONENTS)
    def test_scaling_lipschitz_estimate(self, x, y, c, n, p):
        if x == y:
            return
        estimate = estimate_power_lipschitz(Scaling(c), n, [(x, y)], NormTag(p))
        self.assertTrue(close(estimate, abs(c) ** n))


class TestSchemeProperties(unittest.TestCase):
    """Invariants of the multi-step scheme."""

    @PROPERTY_SETTINGS
    @given(points(2, scale=8), st.lists(DYADIC_FACTORS, min_size=2, max_size=4), schedules(), st.data())
    def test_fixed_point_is_invariant(self, xstar, factors, alpha, data):
        p = len(factors)
        operators = tuple(TowardPoint(xstar, r) for r in factors)
        betas = tuple(data.draw(schedules()) for _ in range(p - 1))
        config = IterationConfig(p, operators, alpha, betas, xstar, n_max=16)
        for record in run(config):
            self.assertEqual(record.x_next, xstar)
            self.assertTrue(all(y == xstar for y in record.y_n))

    @PROPERTY_SETTINGS
    @given(points(2), points(2), st.sampled_from([0.5, 0.9, -0.5, 0.0]), schedules(),
           st.sampled_from([Scaling(3), Clamp(-1, 1)]))
    def test_zero_beta_matches_mann_oracle(self, x1, center, r, alpha, inner):
        config = IterationConfig(2, (TowardPoint(center, r), inner), alpha, (ScheduleSpec.zero(),), x1, n_max=20)
        c = center.as_array()
        x = x1.as_array()
        for record in run(config):
            a = schedule_value(alpha, record.n)
            image = c + r ** record.n * (x - c)
            x = x + a * (image - x)
            self.assertEqual(record.x_next.coords, tuple(float(v) for v in x))

    @PROPERTY_SETTINGS
    @given(points(2), points(2), st.lists(st.sampled_from([0.5, -0.5, 1.0, -1.0, 0.0]), min_size=2, max_size=3),
           schedules(), EXPONENTS, st.data())
    def test_iterates_do_not_move_away_from_common_fixed_point(self, x1, xstar, factors, alpha, p, data):
        """Quasi-nonexpansive maps and convex combinations keep ||x_n - x*|| nonincreasing."""
        tag = NormTag(p)
        operators = tuple(TowardPoint(xstar, r) for r in factors)
        betas = tuple(data.draw(schedules()) for _ in range(len(factors) - 1))
        config = IterationConfig(len(factors), operators, alpha, betas, x1, xstar=xstar,
                                 n_max=20, tol=0.0, norm=tag)
        for record in run(config):
            before = norm(record.x_n - xstar, tag)
            after = norm(record.x_next - xstar, tag)
            self.assertLessEqual(after, before * (1 + 1e-12) + 1e-12)

    @PROPERTY_SETTINGS
    @given(points(1), st.sampled_from([Scaling(0.5), Scaling(-2), Clamp(-1, 1), TowardPoint(Point.of(3), 0.25)]),
           st.sampled_from([Scaling(1.5), Clamp(0, 2), TowardPoint(Point.of(-1), -0.5)]),
           schedules(), schedules(), st.integers(1, 30))
    def test_convex_combinations_stay_in_the_hull(self, x, T1, T2, alpha, beta, n):
        config = IterationConfig(2, (T1, T2), alpha, (beta,), x, n_max=1)
        x_next, ys = step(config, x, n)
        inner = power_apply(T2, n, x).coords[0]
        outer = power_apply(T1, n, ys[0]).coords[0]
        lo = min(x.coords[0], inner, outer)
        hi = max(x.coords[0], inner, outer)
        slack = 1e-12 * (1 + max(abs(lo), abs(hi)))
        for value in (ys[0].coords[0], x_next.coords[0]):
            self.assertGreaterEqual(value, lo - slack)
            self.assertLessEqual(value, hi + slack)


if __name__ == '__main__':
    unittest.main()
