import unittest

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from envscreen.grid import GridFn
from envscreen.mechanism import (
    Allocation,
    Preference,
    invert_in_payment,
    natural_order,
    probe_preference,
    quasilinear_payments,
    run_synthesis,
    synthesize_payments,
    verify_envelope_consistency,
)
from envscreen.scenarios import PREFERENCE_REGISTRY, build_allocation, quasilinear_parts
from envscreen.utils import logger as logger_utils
from envscreen.utils.errors import ArgumentError, ModelViolationError, NotOntoError


def quasilinear_product():
    return Preference(payoff=lambda y, p, t: y * t - p, t_partial=lambda y, p, t: y, t_partial_bound=1.0)


def power_payment_product():
    return Preference(payoff=lambda y, p, t: y * t - p ** 3, t_partial=lambda y, p, t: y, t_partial_bound=1.0)


def wobbly_payment():
    # f_3 depends on the payment, so the value path has to be marched
    return Preference(
        payoff=lambda y, p, t: y * t - p - 0.25 * t * np.sin(p),
        t_partial=lambda y, p, t: y - 0.25 * np.sin(p),
        t_partial_bound=1.25,
    )


def identity_allocation(n):
    return Allocation.from_callable(lambda t: t, n, order_cmp=natural_order)


class TestInversion(unittest.TestCase):
    def test_quasilinear(self):
        p = invert_in_payment(quasilinear_product(), 0.5, 0.4, -3.0)
        self.assertAlmostEqual(p, 3.2, places=9)

    def test_bracket_moves_down(self):
        p = invert_in_payment(quasilinear_product(), 0.0, 0.3, 5.0)
        self.assertAlmostEqual(p, -5.0, places=9)

    def test_power_payment(self):
        self.assertAlmostEqual(invert_in_payment(power_payment_product(), 1.0, 1.0, -7.0), 2.0, places=6)

    def test_bounded_payoff_is_not_onto(self):
        pref = Preference(
            payoff=lambda y, p, t: -np.arctan(p), t_partial=lambda y, p, t: 0.0, t_partial_bound=0.0
        )
        with self.assertRaises(NotOntoError):
            invert_in_payment(pref, 0.0, 0.5, 10.0)

    def test_unreachable_tolerance_warns(self):
        # the payoff jumps from -1 to -1.5 at p = 1, so -1.25 is never hit
        pref = Preference(
            payoff=lambda y, p, t: -p - (0.5 if p > 1.0 else 0.0),
            t_partial=lambda y, p, t: 0.0,
            t_partial_bound=0.0,
        )
        logger_utils._SEEN.pop(("envscreen.mechanism.synthesis", "inexact_inversion"), None)
        with self.assertLogs("envscreen.mechanism.synthesis", level="WARNING") as logs:
            p = invert_in_payment(pref, 0.0, 0.5, -1.25)
        self.assertAlmostEqual(p, 1.0, places=9)
        self.assertIn("payoff gap", logs.output[0])


class TestProbe(unittest.TestCase):
    def test_increasing_payoff(self):
        pref = Preference(payoff=lambda y, p, t: p, t_partial=lambda y, p, t: 0.0, t_partial_bound=0.0)
        with self.assertRaises(ModelViolationError):
            probe_preference(pref, identity_allocation(11))

    def test_understated_bound(self):
        pref = Preference(payoff=lambda y, p, t: y * t - p, t_partial=lambda y, p, t: y, t_partial_bound=0.5)
        with self.assertRaises(ModelViolationError):
            probe_preference(pref, identity_allocation(11))

    def test_synthesis_checks_bound_along_the_path(self):
        pref = Preference(payoff=lambda y, p, t: y * t - p, t_partial=lambda y, p, t: y, t_partial_bound=0.5)
        with self.assertRaises(ModelViolationError):
            run_synthesis(pref, identity_allocation(11), probe=False)


class TestSynthesis(unittest.TestCase):
    def test_quasilinear_identity_matches_closed_form(self):
        Y = identity_allocation(101)
        P = synthesize_payments(quasilinear_product(), Y)
        oracle = quasilinear_payments(lambda y, t: y * t, lambda y, t: y, Y)
        np.testing.assert_allclose(P.values, oracle.values, atol=1e-9)
        np.testing.assert_allclose(P.values, Y.points ** 2 / 2, atol=1e-9)

    def test_payments_shift_with_initial_value(self):
        Y = identity_allocation(51)
        pref = quasilinear_product()
        base = synthesize_payments(pref, Y)
        shifted = synthesize_payments(pref, Y, k=0.3)
        np.testing.assert_allclose((base - shifted).values, 0.3, atol=1e-9)

    def test_power_payment(self):
        Y = identity_allocation(101)
        result = run_synthesis(power_payment_product(), Y)
        np.testing.assert_allclose(result.W.values, Y.points ** 2 / 2, atol=1e-9)
        np.testing.assert_allclose(result.P.values, np.cbrt(Y.points ** 2 / 2), atol=1e-6)

    def test_marched_value_path_matches_ode_solver(self):
        pref = wobbly_payment()

        def rhs(t, w):
            p = brentq(lambda q: pref.evaluate(t, q, t) - w[0], -10.0, 10.0, xtol=1e-14)
            return [t - 0.25 * np.sin(p)]

        errors = []
        for n in (101, 201):
            Y = identity_allocation(n)
            result = run_synthesis(pref, Y)
            oracle = solve_ivp(rhs, (0.0, 1.0), [0.0], t_eval=Y.points, rtol=1e-10, atol=1e-12)
            errors.append(np.max(np.abs(result.W.values - oracle.y[0])))
        self.assertLess(errors[1], 1e-4)
        self.assertLess(errors[1], errors[0])

    def test_envelope_consistency(self):
        pref = wobbly_payment()
        Y = identity_allocation(201)
        P = synthesize_payments(pref, Y, k=0.1)
        residual = verify_envelope_consistency(pref, Y, P, k=0.1)
        self.assertLess(residual.max_abs(), 1e-4)

    def test_refinement_shrinks_payment_error(self):
        # h(y, t) = (y + y^2 / 2) t with Y(t) = t pays t^2 / 2 + t^3 / 3
        params = {"COEFFS": [[0.0, 0.0], [0.0, 1.0], [0.0, 0.5]]}
        pref = PREFERENCE_REGISTRY.get("quasilinear_polynomial")(params)
        errors = []
        for n in (21, 41, 81):
            Y = identity_allocation(n)
            exact = Y.points ** 2 / 2 + Y.points ** 3 / 3
            errors.append(np.max(np.abs(synthesize_payments(pref, Y).values - exact)))
        self.assertGreater(errors[0], 0.0)
        for coarse, fine in zip(errors, errors[1:]):
            self.assertGreaterEqual(coarse / fine, 1.6)

    def test_envelope_consistency_flags_shifted_payments(self):
        pref = quasilinear_product()
        Y = identity_allocation(101)
        P = synthesize_payments(pref, Y)
        shifted = P + GridFn(np.where(Y.points >= 0.5, 0.1, 0.0))
        residual = verify_envelope_consistency(pref, Y, shifted).values
        np.testing.assert_allclose(residual[Y.points < 0.5], 0.0, atol=1e-9)
        np.testing.assert_allclose(residual[Y.points >= 0.5], -0.1, atol=1e-9)
        self.assertLess(verify_envelope_consistency(pref, Y, P).max_abs(), 1e-9)

    def test_random_quasilinear_scenarios_match_closed_form(self):
        rng = np.random.default_rng(0)
        n = 201
        for trial in range(10):
            params = {"COEFFS": rng.uniform(-1.0, 1.0, size=(3, 3)).tolist()}
            pref = PREFERENCE_REGISTRY.get("quasilinear_polynomial")(params)
            h, h_t = quasilinear_parts("quasilinear_polynomial", params)
            if trial % 2:
                a1, a2 = rng.uniform(0.0, 0.5, size=2)
                Y = build_allocation("polynomial_allocation", {"COEFFS": [0.0, a1, a2]}, n)
            else:
                values = np.sort(rng.uniform(0.0, 1.0, size=4)).tolist()
                Y = build_allocation("levels", {"THRESHOLDS": [0.25, 0.5, 0.75], "VALUES": values}, n)
            gap = (synthesize_payments(pref, Y) - quasilinear_payments(h, h_t, Y)).max_abs()
            self.assertLessEqual(gap, 5.0 / (n - 1))

    def test_levels_allocation(self):
        pref = quasilinear_product()
        Y = build_allocation("levels", {}, 101)
        P = synthesize_payments(pref, Y)
        self.assertLess(verify_envelope_consistency(pref, Y, P).max_abs(), 1e-9)

    def test_record_steps(self):
        result = run_synthesis(quasilinear_product(), identity_allocation(11), record_steps=True)
        self.assertEqual(len(result.steps), 10)
        self.assertEqual(set(result.steps[0]), {"index", "t", "chi", "chi_next"})
        self.assertEqual(run_synthesis(quasilinear_product(), identity_allocation(11)).steps, [])

    def test_mismatched_grid(self):
        with self.assertRaises(ArgumentError):
            verify_envelope_consistency(quasilinear_product(), identity_allocation(11), GridFn.constant(0.0, 21))


if __name__ == "__main__":
    unittest.main()
