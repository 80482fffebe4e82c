"""
Quadrature, finite differences and Dini-type derivative estimates on grids.
"""
from typing import Sequence

import numpy as np

from ..utils.errors import ArgumentError, DomainError
from .grid_fn import GridFn, check_unit_interval, shift_steps

__all__ = [
    "integrate",
    "cumulative_integral",
    "divided_difference",
    "upper_derivative_estimate",
    "lower_derivative_estimate",
    "one_sided_differences",
    "total_variation",
    "variation_growth",
]


def integrate(f: GridFn, a: float, b: float) -> float:
    """
    Composite trapezoid approximation of the integral of ``f`` over [a, b],
    interpolating linearly at endpoints that are not grid points.
    ``integrate(f, b, a) == -integrate(f, a, b)``.
    """
    check_unit_interval(a, b)
    return f.antiderivative(b) - f.antiderivative(a)


def cumulative_integral(f: GridFn) -> GridFn:
    """The grid function ``t -> integral of f over [0, t]``."""
    return GridFn(f.cumulative)


def divided_difference(f: GridFn, m: float) -> GridFn:
    """
    ``t -> (f(t + m) - f(t)) / m`` on [0, 1 - m].

    The result keeps the input grid; entries beyond ``1 - m`` repeat the last
    valid value and ``padded_from`` records where the padding starts.
    """
    k = shift_steps(m, f.n_points)
    n = f.n_points
    if k > n - 1:
        raise DomainError(f"shift {m!r} leaves no admissible points")
    v = f.values
    valid = (v[k:] - v[:-k]) / m
    padded = np.concatenate([valid, np.full(k, valid[-1])])
    return GridFn(padded, padded_from=n - k)


def one_sided_differences(f: GridFn, t: float, steps: Sequence[float]):
    """
    Forward and backward divided differences of ``f`` at ``t`` for each step.

    Sides that leave [0, 1] are skipped. Returns ``(forward, backward)`` lists.
    """
    if len(steps) == 0:
        raise ArgumentError("step list is empty")
    if not (0.0 < t < 1.0):
        raise DomainError(f"derivative estimate needs t in (0, 1), got {t!r}")
    forward, backward = [], []
    ft = f(t)
    for m in sorted(steps, reverse=True):
        shift_steps(m, f.n_points)
        if t + m <= 1.0:
            forward.append((f(t + m) - ft) / m)
        if t - m >= 0.0:
            backward.append((ft - f(t - m)) / m)
    if not forward and not backward:
        raise DomainError(f"no admissible step at t={t!r}")
    return forward, backward


def upper_derivative_estimate(f: GridFn, t: float, steps: Sequence[float]) -> float:
    """Finite-scale proxy for the upper Dini derivative: max over steps and sides."""
    forward, backward = one_sided_differences(f, t, steps)
    return float(max(forward + backward))


def lower_derivative_estimate(f: GridFn, t: float, steps: Sequence[float]) -> float:
    """Finite-scale proxy for the lower Dini derivative: min over steps and sides."""
    forward, backward = one_sided_differences(f, t, steps)
    return float(min(forward + backward))


def total_variation(f: GridFn) -> float:
    return float(np.sum(np.abs(np.diff(f.values))))


def variation_growth(f: GridFn) -> float:
    """
    Ratio of the total variation on the full grid to that on every other
    point. Ratios well above 1 mean the variation keeps growing with
    refinement, which is what a function that is not of bounded variation
    looks like at grid scale.
    """
    coarse = np.abs(np.diff(f.values[::2])).sum()
    fine = total_variation(f)
    if coarse == 0.0:
        return 1.0 if fine == 0.0 else float("inf")
    return float(fine / coarse)
