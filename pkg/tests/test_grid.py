import unittest

import numpy as np

from envscreen.grid import (
    GridFn,
    Tolerance,
    cumulative_integral,
    divided_difference,
    integrate,
    lower_derivative_estimate,
    total_variation,
    upper_derivative_estimate,
    variation_growth,
)
from envscreen.utils.errors import AlignmentError, ArgumentError, DomainError, EvaluationError


class TestGridFn(unittest.TestCase):
    def test_rejects_small_grids(self):
        with self.assertRaises(ArgumentError):
            GridFn([0.0, 1.0])

    def test_rejects_non_finite_values(self):
        with self.assertRaises(EvaluationError) as ctx:
            GridFn([0.0, np.nan, 1.0])
        self.assertEqual(ctx.exception.index, 1)

    def test_values_are_read_only(self):
        f = GridFn.from_callable(lambda s: s, 11)
        with self.assertRaises(ValueError):
            f.values[0] = 3.0

    def test_step_and_interpolation(self):
        f = GridFn.from_callable(lambda s: 2 * s, 11)
        self.assertAlmostEqual(f.step, 0.1)
        self.assertAlmostEqual(f(0.25), 0.5)

    def test_arithmetic(self):
        f = GridFn.from_callable(lambda s: s, 5)
        g = GridFn.constant(1.0, 5)
        np.testing.assert_allclose((2 * f - g + 1.0).values, 2 * f.values)


class TestTolerance(unittest.TestCase):
    def test_needs_a_positive_part(self):
        with self.assertRaises(ArgumentError):
            Tolerance(0.0, 0.0)

    def test_bound_uses_larger_part(self):
        tol = Tolerance(abs_tol=1e-3, rel_tol=1e-2)
        self.assertEqual(tol.bound(0.0), 1e-3)
        self.assertAlmostEqual(tol.bound(10.0), 0.1)
        self.assertTrue(tol.allows(0.05, 10.0))
        self.assertFalse(tol.allows(0.05, 1.0))


class TestIntegrate(unittest.TestCase):
    def test_constant(self):
        for n in (3, 11, 101):
            self.assertAlmostEqual(integrate(GridFn.constant(1.0, n), 0.0, 1.0), 1.0, places=12)

    def test_affine_is_exact(self):
        f = GridFn.from_callable(lambda s: s, 101)
        self.assertAlmostEqual(integrate(f, 0.0, 1.0), 0.5, places=12)
        # non-grid endpoints are interpolated linearly, still exact on affine functions
        self.assertAlmostEqual(integrate(f, 0.123, 0.777), (0.777 ** 2 - 0.123 ** 2) / 2, places=12)

    def test_square(self):
        f = GridFn.from_callable(lambda s: s * s, 101)
        self.assertAlmostEqual(integrate(f, 0.0, 1.0), 1.0 / 3.0, delta=2e-5)

    def test_antisymmetric(self):
        f = GridFn.from_callable(np.sin, 51)
        self.assertAlmostEqual(integrate(f, 0.7, 0.2), -integrate(f, 0.2, 0.7), places=14)

    def test_linear_and_additive(self):
        f = GridFn.from_callable(np.exp, 41)
        g = GridFn.from_callable(lambda s: s ** 3, 41)
        combo = integrate(2.0 * f - 3.0 * g, 0.1, 0.9)
        self.assertAlmostEqual(combo, 2.0 * integrate(f, 0.1, 0.9) - 3.0 * integrate(g, 0.1, 0.9), places=12)
        self.assertAlmostEqual(
            integrate(f, 0.1, 0.9), integrate(f, 0.1, 0.45) + integrate(f, 0.45, 0.9), places=12
        )

    def test_second_order_convergence(self):
        errors = []
        for n in (51, 101, 201):
            f = GridFn.from_callable(lambda s: s * s, n)
            errors.append(abs(integrate(f, 0.0, 1.0) - 1.0 / 3.0))
        self.assertGreaterEqual(errors[0] / errors[1], 3.5)
        self.assertGreaterEqual(errors[1] / errors[2], 3.5)

    def test_endpoint_outside_unit_interval(self):
        f = GridFn.constant(1.0, 11)
        with self.assertRaises(DomainError):
            integrate(f, -0.1, 0.5)
        with self.assertRaises(DomainError):
            integrate(f, 0.5, 1.5)

    def test_cumulative_matches_integrate(self):
        f = GridFn.from_callable(np.cos, 21)
        F = cumulative_integral(f)
        for i, t in enumerate(f.points):
            self.assertAlmostEqual(F[i], integrate(f, 0.0, t), places=12)


class TestDifferences(unittest.TestCase):
    def test_affine_slope(self):
        f = GridFn.from_callable(lambda s: 3.0 * s - 1.0, 101)
        for m in (0.01, 0.05, 0.3):
            d = divided_difference(f, m)
            np.testing.assert_allclose(d.values, 3.0, atol=1e-9)

    def test_constant(self):
        d = divided_difference(GridFn.constant(4.0, 11), 0.2)
        np.testing.assert_allclose(d.values, 0.0)

    def test_square_at_point(self):
        f = GridFn.from_callable(lambda s: s * s, 101)
        d = divided_difference(f, 0.1)
        self.assertAlmostEqual(d(0.2), 0.5, places=9)
        self.assertEqual(d.padded_from, 91)

    def test_misaligned_shift(self):
        f = GridFn.constant(0.0, 11)
        with self.assertRaises(AlignmentError):
            divided_difference(f, 0.05)

    def test_upper_derivative(self):
        n = 101
        h = 1.0 / (n - 1)
        self.assertAlmostEqual(upper_derivative_estimate(GridFn.from_callable(lambda s: s, n), 0.3, [2 * h, h]), 1.0)
        kink = GridFn.from_callable(lambda s: abs(s - 0.5), n)
        self.assertAlmostEqual(upper_derivative_estimate(kink, 0.5, [h]), 1.0)
        self.assertAlmostEqual(lower_derivative_estimate(kink, 0.5, [h]), -1.0)
        self.assertEqual(upper_derivative_estimate(GridFn.constant(0.0, n), 0.4, [h]), 0.0)

    def test_upper_derivative_needs_steps(self):
        with self.assertRaises(ArgumentError):
            upper_derivative_estimate(GridFn.constant(0.0, 11), 0.5, [])


class TestVariation(unittest.TestCase):
    def test_monotone_function(self):
        f = GridFn.from_callable(lambda s: s * s, 101)
        self.assertAlmostEqual(total_variation(f), 1.0)
        self.assertAlmostEqual(variation_growth(f), 1.0)

    def test_oscillation_grows(self):
        # alternating signs are invisible on the coarse grid
        values = [(-1.0) ** i for i in range(101)]
        self.assertGreater(variation_growth(GridFn(values)), 1.5)


if __name__ == "__main__":
    unittest.main()
