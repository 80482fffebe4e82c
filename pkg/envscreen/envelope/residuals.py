"""
Envelope-formula, outer-first-order-condition and classical first-order
residuals for a decision rule on a grid.

The outer first-order condition asks that

    d/dm  int_r^t f(X(s + m), s) ds  |_{m=0}  = 0     for all r, t in (0, 1).

On a grid the shift ``m`` is a multiple of the step, so ``X(s + m)`` is just
the rule read ``m / h`` indices further along.
"""
import logging
from collections import namedtuple
from typing import Dict

import numpy as np

from ..grid import GridFn, check_unit_interval, cumulative_integral, integrate, shift_steps
from ..utils.errors import AlignmentError, DomainError, PreconditionError
from ..utils.logger import log_first_n
from .problem import DecisionProblem, DecisionRule

__all__ = [
    "MimicPayoffs",
    "OuterFOCEstimate",
    "value_function",
    "partial_path",
    "envelope_residual",
    "outer_foc_estimates",
    "outer_foc_residual",
    "outer_foc_richardson",
    "classical_foc_residual",
    "identity_residual",
    "housekeeping_residual",
    "differentiation_identity_residual",
]

logger = logging.getLogger(__name__)

OuterFOCEstimate = namedtuple("OuterFOCEstimate", ["forward", "backward", "symmetric"])

# slack for endpoint checks so that grid points computed in floating point pass
_EDGE_SLACK = 1e-12


def value_function(p: DecisionProblem, X: DecisionRule) -> GridFn:
    """``V_X(t) = f(X(t), t)`` on the grid."""
    return GridFn([p.evaluate(x, t, index=i) for i, (x, t) in enumerate(zip(X.actions, X.points))])


def partial_path(p: DecisionProblem, X: DecisionRule) -> GridFn:
    """``t -> f_2(X(t), t)`` on the grid."""
    return GridFn([p.partial_t(x, t, index=i) for i, (x, t) in enumerate(zip(X.actions, X.points))])


def envelope_residual(p: DecisionProblem, X: DecisionRule) -> GridFn:
    """
    ``t -> V_X(t) - V_X(0) - int_0^t f_2(X(s), s) ds``.

    The envelope formula holds at grid scale iff this is (numerically) zero.
    """
    if p.uses_finite_difference:
        log_first_n(
            logging.WARNING,
            f"{p.name}: no analytic t_partial, using central differences (step {p.fd_step:g})",
            name=__name__,
        )
    V = value_function(p, X)
    return V - V[0] - cumulative_integral(partial_path(p, X))


class MimicPayoffs:
    """
    The integrands ``s -> f(X(s + j h), s)`` for integer shifts ``j``,
    computed once per shift and reused across every (r, t) pair.

    Entries whose shifted index falls off the grid are padded with the nearest
    valid value; callers never integrate over them.
    """

    def __init__(self, problem: DecisionProblem, rule: DecisionRule):
        self.problem = problem
        self.rule = rule
        self._integrands: Dict[int, GridFn] = {}

    def integrand(self, j: int) -> GridFn:
        if j not in self._integrands:
            n = self.rule.n_points
            points = self.rule.points
            values = np.empty(n)
            valid = range(max(0, -j), min(n, n - j))
            for i in valid:
                values[i] = self.problem.evaluate(self.rule[i + j], points[i], index=i)
            if j > 0:
                values[n - j:] = values[n - j - 1]
            elif j < 0:
                values[:-j] = values[-j]
            self._integrands[j] = GridFn(values)
        return self._integrands[j]

    def integral(self, j: int, r: float, t: float) -> float:
        return integrate(self.integrand(j), r, t)


def _check_outer_domain(r: float, t: float, m: float):
    for v in (r, t):
        if not (0.0 < v < 1.0):
            raise DomainError(f"outer first-order condition needs r, t in (0, 1), got {v!r}")
    lo, hi = min(r, t), max(r, t)
    if lo - m < -_EDGE_SLACK or hi + m > 1.0 + _EDGE_SLACK:
        raise DomainError(f"shift {m!r} takes [{lo}, {hi}] outside [0, 1]")


def outer_foc_estimates(
    p: DecisionProblem, X: DecisionRule, r: float, t: float, m: float, mimic: MimicPayoffs = None
) -> OuterFOCEstimate:
    """
    Forward, backward and symmetric difference quotients of
    ``m -> int_r^t f(X(s + m), s) ds`` at ``m = 0``.
    """
    k = shift_steps(m, X.n_points)
    _check_outer_domain(r, t, m)
    if mimic is None:
        mimic = MimicPayoffs(p, X)
    plus = mimic.integral(k, r, t)
    zero = mimic.integral(0, r, t)
    minus = mimic.integral(-k, r, t)
    return OuterFOCEstimate(
        forward=(plus - zero) / m,
        backward=(zero - minus) / m,
        symmetric=(plus - minus) / (2 * m),
    )


def outer_foc_residual(
    p: DecisionProblem, X: DecisionRule, r: float, t: float, m: float, mimic: MimicPayoffs = None
) -> float:
    """Symmetric finite-difference estimate of the outer first-order derivative."""
    return outer_foc_estimates(p, X, r, t, m, mimic).symmetric


def outer_foc_richardson(
    p: DecisionProblem, X: DecisionRule, r: float, t: float, m: float, mimic: MimicPayoffs = None
) -> float:
    """Richardson combination ``(4 D(m) - D(2m)) / 3`` of symmetric estimates."""
    if mimic is None:
        mimic = MimicPayoffs(p, X)
    d1 = outer_foc_residual(p, X, r, t, m, mimic)
    d2 = outer_foc_residual(p, X, r, t, 2 * m, mimic)
    return (4.0 * d1 - d2) / 3.0


def _lipschitz_guard(X: DecisionRule):
    if not X.lipschitz:
        raise PreconditionError(
            "the classical first-order condition needs a rule flagged Lipschitz continuous"
        )
    estimate = X.estimate_lipschitz()
    if estimate is not None and X.lipschitz_constant is not None:
        if estimate > X.lipschitz_constant * (1 + 1e-9):
            log_first_n(
                logging.WARNING,
                f"{X.name}: grid slope {estimate:.4g} exceeds the declared "
                f"Lipschitz constant {X.lipschitz_constant:.4g}",
                name=__name__,
            )


def classical_foc_residual(p: DecisionProblem, X: DecisionRule, t: float, m: float) -> float:
    """
    Symmetric difference of ``m -> f(X(t + m), t)`` at ``m = 0``.

    ``t`` must be a grid point with ``t -/+ m`` inside [0, 1].
    """
    _lipschitz_guard(X)
    k = shift_steps(m, X.n_points)
    check_unit_interval(t)
    pos = t * (X.n_points - 1)
    i = int(round(pos))
    if abs(pos - i) > 1e-9 * max(1.0, pos):
        raise AlignmentError(f"point {t!r} is not on the grid of {X.n_points} points")
    if i - k < 0 or i + k > X.n_points - 1:
        raise DomainError(f"shift {m!r} takes t={t!r} outside [0, 1]")
    ahead = p.evaluate(X[i + k], t, index=i + k)
    behind = p.evaluate(X[i - k], t, index=i - k)
    return (ahead - behind) / (2 * m)


def identity_residual(
    p: DecisionProblem, X: DecisionRule, r: float, t: float, m: float, mimic: MimicPayoffs = None
) -> float:
    """
    ``|D(r, t, m) - [V_X(t) - V_X(r) - int_r^t f_2(X(s), s) ds]|`` where ``D`` is
    the outer first-order estimate. Small values witness the identity linking
    the outer first-order derivative with the envelope gap over [r, t].
    """
    outer = outer_foc_residual(p, X, r, t, m, mimic)
    V = value_function(p, X) if mimic is None else mimic.integrand(0)
    gap = V(t) - V(r) - integrate(partial_path(p, X), r, t)
    return abs(outer - gap)


def housekeeping_residual(p: DecisionProblem, X: DecisionRule, r: float, t: float, m: float) -> float:
    """
    ``|D(r, t, m) - int_r^t classical(s, m) ds|``: for Lipschitz rules the
    outer derivative equals the integral of the classical one.
    """
    _lipschitz_guard(X)
    k = shift_steps(m, X.n_points)
    _check_outer_domain(r, t, m)
    n = X.n_points
    points = X.points
    values = np.zeros(n)
    for i in range(k, n - k):
        values[i] = (
            p.evaluate(X[i + k], points[i], index=i) - p.evaluate(X[i - k], points[i], index=i)
        ) / (2 * m)
    values[:k] = values[k]
    values[n - k:] = values[n - k - 1]
    inner = integrate(GridFn(values), r, t)
    return abs(outer_foc_residual(p, X, r, t, m) - inner)


def differentiation_identity_residual(p: DecisionProblem, X: DecisionRule, t: float, m: float) -> float:
    """
    Grid form of ``V_X'(t) = d/dm f(X(t + m), t)|_0 + f_2(X(t), t)`` for
    Lipschitz rules, returned as an absolute gap.
    """
    classical = classical_foc_residual(p, X, t, m)
    V = value_function(p, X)
    i = int(round(t * (X.n_points - 1)))
    k = shift_steps(m, X.n_points)
    slope = (V[i + k] - V[i - k]) / (2 * m)
    return abs(slope - classical - p.partial_t(X[i], t, index=i))
