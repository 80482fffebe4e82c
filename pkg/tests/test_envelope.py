import unittest

import numpy as np

from envscreen.envelope import (
    DEFAULT_MESH,
    DecisionProblem,
    DecisionRule,
    Verdict,
    calibrated_tolerance,
    check_classical_theorem,
    check_main_theorem,
    check_necessity,
    classical_foc_residual,
    differentiation_identity_residual,
    envelope_residual,
    housekeeping_residual,
    identity_residual,
    outer_foc_estimates,
    outer_foc_residual,
    outer_foc_richardson,
    usable_mesh,
    value_function,
)
from envscreen.grid import Tolerance
from envscreen.utils.errors import DomainError, EvaluationError, NotOptimalError, PreconditionError


def linear_product(bound=1.0, analytic=True):
    return DecisionProblem(
        objective=lambda x, t: x * t,
        t_partial=(lambda x, t: x) if analytic else None,
        t_partial_bound=bound,
        name="linear_product",
    )


def quadratic_loss():
    return DecisionProblem(
        objective=lambda x, t: -((x - t) ** 2), t_partial=lambda x, t: 2.0 * (x - t), t_partial_bound=2.0
    )


def square_plus_type():
    return DecisionProblem(objective=lambda x, t: x * x + t, t_partial=lambda x, t: 1.0, t_partial_bound=1.0)


def rule(fn, n=101, **kwargs):
    return DecisionRule.from_callable(fn, n, **kwargs)


class TestResiduals(unittest.TestCase):
    def test_value_function(self):
        p = linear_product()
        np.testing.assert_allclose(value_function(p, rule(lambda t: 1.0)).values, np.linspace(0, 1, 101))
        np.testing.assert_allclose(value_function(p, rule(lambda t: 0.0)).values, 0.0)
        np.testing.assert_allclose(value_function(p, rule(lambda t: t)).values, np.linspace(0, 1, 101) ** 2)

    def test_envelope_residual_constant_rule(self):
        np.testing.assert_allclose(envelope_residual(linear_product(), rule(lambda t: 0.7)).values, 0.0, atol=1e-12)

    def test_envelope_residual_identity_rule(self):
        res = envelope_residual(linear_product(), rule(lambda t: t))
        t = res.points
        np.testing.assert_allclose(res.values, t ** 2 / 2, atol=1e-4)

    def test_envelope_residual_type_independent(self):
        p = DecisionProblem(objective=lambda x, t: 3.0, t_partial=lambda x, t: 0.0)
        np.testing.assert_allclose(envelope_residual(p, rule(lambda t: t)).values, 0.0)

    def test_finite_difference_matches_analytic_derivative(self):
        def f(x, t):
            return x * t * t + 0.5 * np.sin(x * t)

        analytic = DecisionProblem(objective=f, t_partial=lambda x, t: 2.0 * x * t + 0.5 * x * np.cos(x * t))
        numeric = DecisionProblem(objective=f)
        bound = 10 * numeric.fd_step ** 2
        for x in (0.0, 0.4, 1.0):
            for t in (0.0, 0.3, 0.7, 1.0):
                self.assertLessEqual(abs(numeric.partial_t(x, t) - analytic.partial_t(x, t)), bound, (x, t))

    def test_outer_foc_constant_rule_vanishes(self):
        p, X = linear_product(), rule(lambda t: 1.0)
        for r, t in ((0.25, 0.75), (0.1, 0.9), (0.6, 0.3)):
            self.assertAlmostEqual(outer_foc_residual(p, X, r, t, 0.01), 0.0, places=10)

    def test_outer_foc_identity_rule(self):
        p, X = linear_product(), rule(lambda t: t)
        self.assertAlmostEqual(outer_foc_residual(p, X, 0.25, 0.75, 0.01), 0.25, delta=0.01)
        est = outer_foc_estimates(p, X, 0.25, 0.75, 0.01)
        self.assertAlmostEqual(est.symmetric, (est.forward + est.backward) / 2, places=12)

    def test_outer_foc_x_independent(self):
        p = DecisionProblem(objective=lambda x, t: np.sin(t), t_partial=lambda x, t: np.cos(t))
        self.assertAlmostEqual(outer_foc_residual(p, rule(lambda t: t * t), 0.2, 0.8, 0.02), 0.0, places=10)

    def test_outer_foc_shift_out_of_range(self):
        p, X = linear_product(), rule(lambda t: t)
        with self.assertRaises(DomainError):
            outer_foc_residual(p, X, 0.005, 0.5, 0.01)
        with self.assertRaises(DomainError):
            outer_foc_residual(p, X, 0.0, 0.5, 0.01)

    def test_richardson_is_exact_on_linear_shift(self):
        p, X = linear_product(), rule(lambda t: t)
        self.assertAlmostEqual(outer_foc_richardson(p, X, 0.25, 0.75, 0.01), 0.25, places=6)

    def test_classical_foc(self):
        n = 101
        self.assertEqual(classical_foc_residual(linear_product(), rule(lambda t: 0.3, lipschitz=True), 0.5, 0.01), 0.0)
        self.assertAlmostEqual(
            classical_foc_residual(linear_product(), rule(lambda t: t, n, lipschitz=True), 0.5, 0.01), 0.5
        )
        self.assertAlmostEqual(
            classical_foc_residual(square_plus_type(), rule(lambda t: t, n, lipschitz=True), 0.5, 0.01), 1.0
        )

    def test_classical_foc_needs_lipschitz_flag(self):
        with self.assertRaises(PreconditionError):
            classical_foc_residual(linear_product(), rule(lambda t: t), 0.5, 0.01)

    def test_identity_residual(self):
        p = linear_product()
        self.assertAlmostEqual(identity_residual(p, rule(lambda t: 0.4), 0.3, 0.6, 0.01), 0.0, places=10)
        self.assertLess(identity_residual(p, rule(lambda t: t), 0.25, 0.75, 0.01), 0.01)
        q = DecisionProblem(objective=lambda x, t: 2.0, t_partial=lambda x, t: 0.0)
        self.assertEqual(identity_residual(q, rule(lambda t: 1.0), 0.2, 0.7, 0.01), 0.0)

    def test_identity_residual_random_smooth_problems(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            c = rng.uniform(-1.0, 1.0, size=(3, 3))
            a = rng.uniform(-1.0, 1.0, size=3)
            i, j = np.arange(3), np.arange(3)

            def objective(x, t, c=c):
                return float(x ** i @ c @ t ** j)

            def t_partial(x, t, c=c):
                return float(x ** i @ c @ np.array([0.0, 1.0, 2.0 * t]))

            p = DecisionProblem(objective=objective, t_partial=t_partial)
            residuals = []
            for n in (101, 201):
                h = 1.0 / (n - 1)
                X = rule(lambda t, a=a: float(a[0] + a[1] * t + a[2] * t * t), n)
                res = identity_residual(p, X, 0.25, 0.75, h)
                self.assertLessEqual(res, 10 * h)
                residuals.append(res)
            if residuals[0] > 1e-9:
                self.assertGreaterEqual(residuals[0] / residuals[1], 1.8)

    def test_housekeeping_and_differentiation_identity(self):
        p = square_plus_type()
        X = rule(lambda t: t, 201, lipschitz=True, lipschitz_constant=1.0)
        h = 1.0 / 200
        self.assertLess(housekeeping_residual(p, X, 0.2, 0.8, h), 1e-3)
        self.assertLess(differentiation_identity_residual(p, X, 0.5, h), 1e-6)

    def test_failing_objective_reports_grid_index(self):
        def objective(x, t):
            if t > 0.5:
                raise ValueError("boom")
            return x

        p = DecisionProblem(objective=objective, t_partial=lambda x, t: 0.0)
        with self.assertRaises(EvaluationError) as ctx:
            value_function(p, rule(lambda t: 1.0, 11))
        self.assertEqual(ctx.exception.index, 6)


class TestMainTheorem(unittest.TestCase):
    def test_example_family(self):
        p = linear_product()
        cases = [
            (lambda t: 1.0, Verdict.BOTH_HOLD),
            (lambda t: -0.5, Verdict.BOTH_HOLD),
            (lambda t: t, Verdict.BOTH_FAIL),
            (lambda t: 1.0 if t >= 0.5 else 0.0, Verdict.BOTH_FAIL),
        ]
        for n in (101, 201, 401):
            for fn, expected in cases:
                report = check_main_theorem(p, rule(fn, n))
                self.assertEqual(report.verdict, expected)

    def test_identity_rule_residual_at_quarter_pair(self):
        report = check_main_theorem(linear_product(), rule(lambda t: t, 201), mesh=(0.25, 0.75))
        self.assertAlmostEqual(report.outer_foc_residuals[0, 1], 0.25, places=6)

    def test_report_contents(self):
        report = check_main_theorem(linear_product(), rule(lambda t: 1.0))
        d = report.to_dict()
        self.assertEqual(
            list(d)[:5], ["value_fn", "envelope_residual", "outer_foc_residuals", "max_abs_residuals", "verdict"]
        )
        self.assertEqual(d["verdict"], "BothHold")
        self.assertEqual(report.grid_table().shape, (101, 3))
        self.assertEqual(report.pair_table().shape, (81, 5))
        self.assertFalse(report.uses_finite_difference)

    def test_finite_difference_fallback(self):
        report = check_main_theorem(linear_product(analytic=False), rule(lambda t: 1.0))
        self.assertTrue(report.uses_finite_difference)
        self.assertEqual(report.verdict, Verdict.BOTH_HOLD)

    def test_calibrated_tolerance(self):
        X = rule(lambda t: t, 101)
        self.assertAlmostEqual(calibrated_tolerance(linear_product(bound=2.0), X).abs_tol, 10 * 0.01 * 2.0)
        # without a declared bound the largest |f_2| on the grid is used
        p = DecisionProblem(objective=lambda x, t: x * t, t_partial=lambda x, t: x)
        self.assertAlmostEqual(calibrated_tolerance(p, X).abs_tol, 10 * 0.01 * 1.0)

    def test_never_inconsistent_under_loose_tolerance(self):
        report = check_main_theorem(linear_product(), rule(lambda t: t), tol=Tolerance(abs_tol=10.0))
        self.assertEqual(report.verdict, Verdict.BOTH_HOLD)

    def test_coarse_grids_drop_edge_mesh_points(self):
        expected = {5: (0.3, 0.4, 0.5, 0.6, 0.7), 8: (0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8)}
        for n, mesh in expected.items():
            report = check_main_theorem(linear_product(), rule(lambda t: 1.0, n))
            self.assertEqual(report.verdict, Verdict.BOTH_HOLD, n)
            np.testing.assert_allclose(report.mesh, mesh)
            self.assertEqual(report.pair_table().shape, (len(mesh) ** 2, 5))

    def test_coarse_grid_with_richardson(self):
        report = check_main_theorem(linear_product(), rule(lambda t: 1.0, 5), richardson=True)
        self.assertEqual(report.mesh, (0.5,))
        self.assertEqual(report.verdict, Verdict.BOTH_HOLD)

    def test_usable_mesh(self):
        self.assertEqual(usable_mesh(DEFAULT_MESH, 0.01), DEFAULT_MESH)
        self.assertEqual(usable_mesh((0.1, 0.9), 0.3), (0.5,))
        with self.assertRaises(DomainError):
            usable_mesh(DEFAULT_MESH, 0.75)


class TestNecessity(unittest.TestCase):
    def test_linear_maximizer(self):
        report = check_necessity(linear_product(), lambda t: 1.0, candidates=[-1.0, 0.0, 0.5, 1.0])
        self.assertEqual(report.verdict, Verdict.BOTH_HOLD)

    def test_quadratic_maximizer(self):
        report = check_necessity(quadratic_loss(), lambda t: t, candidates=np.linspace(0, 1, 11))
        self.assertEqual(report.verdict, Verdict.BOTH_HOLD)

    def test_non_maximizer(self):
        with self.assertRaises(NotOptimalError) as ctx:
            check_necessity(linear_product(), lambda t: 0.0, candidates=[1.0])
        self.assertAlmostEqual(ctx.exception.t, 0.05, delta=0.006)
        self.assertEqual(ctx.exception.candidate, 1.0)


class TestClassicalTheorem(unittest.TestCase):
    def test_quadratic_maximizer(self):
        X = rule(lambda t: t, 201, lipschitz=True, lipschitz_constant=1.0)
        report = check_classical_theorem(quadratic_loss(), X)
        self.assertEqual(report.verdict, Verdict.BOTH_HOLD)
        self.assertAlmostEqual(report.lipschitz_estimate, 1.0)

    def test_linear_identity_rule_fails_both(self):
        X = rule(lambda t: t, 201, lipschitz=True)
        self.assertEqual(check_classical_theorem(linear_product(), X).verdict, Verdict.BOTH_FAIL)


if __name__ == "__main__":
    unittest.main()
