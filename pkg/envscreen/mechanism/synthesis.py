"""
Payment schedules from the envelope formula.

Given preferences ``f(y, p, t)`` and an allocation ``Y``, the payments ``P``
that make ``(Y, P)`` satisfy the envelope formula with ``V(0) = k`` solve

    W(t) = k + int_0^t chi(W(s), s) ds,   chi(w, t) = f_3(Y(t), p(w, t), t),

where ``p(w, t)`` inverts ``p -> f(Y(t), p, t)`` at level ``w``. The value
path ``W`` is marched with Heun steps on the allocation's grid and the
payments are read off by one more inversion per grid point.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from ..grid import GridFn, Tolerance, cumulative_integral
from ..utils.errors import ArgumentError, ModelViolationError, NotOntoError
from ..utils.logger import log_first_n
from .preference import Allocation, Preference

__all__ = [
    "SynthesisResult",
    "invert_in_payment",
    "probe_preference",
    "run_synthesis",
    "synthesize_payments",
    "verify_envelope_consistency",
    "quasilinear_payments",
]

logger = logging.getLogger(__name__)

_MAX_DOUBLINGS = 60
_MAX_BISECTIONS = 200

DEFAULT_INVERSION_TOL = Tolerance(abs_tol=1e-12)
DEFAULT_SYNTHESIS_TOL = Tolerance(abs_tol=1e-11, rel_tol=1e-6)


def invert_in_payment(
    pref: Preference, y, t: float, target: float, tol: Tolerance = DEFAULT_INVERSION_TOL
) -> float:
    """
    Solve ``pref.payoff(y, p, t) == target`` for ``p``.

    The bracket starts at ``pref.payment_range_hint`` and each side is moved
    outward by doubling its width until it contains the target, then the
    root is bisected to ``tol.abs_tol``.

    Raises:
        NotOntoError: the target is not bracketed after 60 doublings.
    """
    lo, hi = pref.payment_range_hint
    f_lo = pref.evaluate(y, lo, t)
    f_hi = pref.evaluate(y, hi, t)

    width = hi - lo
    doublings = 0
    # payoff decreases in p: lower payments give higher payoffs
    while f_lo < target:
        doublings += 1
        if doublings > _MAX_DOUBLINGS:
            raise NotOntoError(
                f"payoff of {y!r} at t={t:.6g} stays below {target:.6g} as payments fall"
            )
        hi, f_hi = lo, f_lo
        lo -= width
        width *= 2
        f_lo = pref.evaluate(y, lo, t)
    width = hi - lo
    while f_hi > target:
        doublings += 1
        if doublings > _MAX_DOUBLINGS:
            raise NotOntoError(
                f"payoff of {y!r} at t={t:.6g} stays above {target:.6g} as payments rise"
            )
        lo, f_lo = hi, f_hi
        hi += width
        width *= 2
        f_hi = pref.evaluate(y, hi, t)

    if abs(f_lo - target) <= tol.abs_tol:
        return lo
    if abs(f_hi - target) <= tol.abs_tol:
        return hi
    mid = 0.5 * (lo + hi)
    for _ in range(_MAX_BISECTIONS):
        mid = 0.5 * (lo + hi)
        f_mid = pref.evaluate(y, mid, t)
        if abs(f_mid - target) <= tol.abs_tol:
            return mid
        if f_mid > target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 4 * np.finfo(float).eps * max(1.0, abs(mid)):
            break
    gap = abs(pref.evaluate(y, mid, t) - target)
    log_first_n(
        logging.WARNING,
        f"inversion of {y!r} at t={t:.6g} stopped with payoff gap {gap:.3g} "
        f"above the tolerance {tol.abs_tol:.3g}",
        n=3,
        name=__name__,
        key="inexact_inversion",
    )
    return mid


def probe_preference(
    pref: Preference, Y: Allocation, lattice_size: int = 33, n_samples: int = 17, rel_tol: float = 1e-6
):
    """
    Sample ``(y, t)`` along the allocation and check that the payoff is
    strictly decreasing on a payment lattice over the range hint and that
    ``|f_3|`` stays within its declared bound.

    Raises:
        ModelViolationError: either check fails at some sample.
    """
    n = Y.n_points
    indices = np.unique(np.linspace(0, n - 1, min(n, n_samples)).round().astype(int))
    lattice = np.linspace(*pref.payment_range_hint, lattice_size)
    limit = pref.t_partial_bound * (1 + rel_tol) + 1e-12
    points = Y.points
    for i in indices:
        y, t = Y[i], float(points[i])
        values = np.array([pref.evaluate(y, p, t, index=int(i)) for p in lattice])
        bad = np.flatnonzero(np.diff(values) >= 0)
        if bad.size:
            j = int(bad[0])
            raise ModelViolationError(
                f"payoff of {y!r} at t={t:.6g} is not strictly decreasing between "
                f"p={lattice[j]:.6g} and p={lattice[j + 1]:.6g}"
            )
        for p in lattice:
            d = pref.partial_t(y, p, t, index=int(i))
            if abs(d) > limit:
                raise ModelViolationError(
                    f"|f_3({y!r}, {p:.6g}, {t:.6g})| = {abs(d):.6g} exceeds the declared "
                    f"bound {pref.t_partial_bound:.6g}"
                )


@dataclass
class SynthesisResult:
    """Payments ``P``, the value path ``W`` and one log entry per Heun step."""

    P: GridFn
    W: GridFn
    k: float
    steps: List[dict] = field(default_factory=list)


def run_synthesis(
    pref: Preference,
    Y: Allocation,
    k: float = 0.0,
    tol: Optional[Tolerance] = None,
    probe: bool = True,
    lattice_size: int = 33,
    record_steps: bool = False,
) -> SynthesisResult:
    """
    March the value path with Heun steps and invert it into payments.

    Raises:
        NotOntoError: a payment inversion failed.
        ModelViolationError: the probe failed, or some ``|chi|`` exceeded
            ``t_partial_bound * (1 + tol.rel_tol)``.
    """
    if tol is None:
        tol = DEFAULT_SYNTHESIS_TOL
    if probe:
        probe_preference(pref, Y, lattice_size=lattice_size, rel_tol=tol.rel_tol)
    inversion_tol = Tolerance(abs_tol=tol.abs_tol)
    limit = pref.t_partial_bound * (1 + tol.rel_tol) + 1e-12
    points = Y.points
    h = Y.step

    def chi(w: float, i: int) -> float:
        t = float(points[i])
        p = invert_in_payment(pref, Y[i], t, w, inversion_tol)
        value = pref.partial_t(Y[i], p, t, index=i)
        if abs(value) > limit:
            raise ModelViolationError(
                f"type derivative {value:.6g} at t={t:.6g} exceeds the declared bound "
                f"{pref.t_partial_bound:.6g} (grid index {i})"
            )
        return value

    n = Y.n_points
    W = np.empty(n)
    W[0] = k
    steps = []
    for i in range(n - 1):
        slope = chi(W[i], i)
        predicted = W[i] + h * slope
        corrected = chi(predicted, i + 1)
        W[i + 1] = W[i] + 0.5 * h * (slope + corrected)
        if record_steps:
            steps.append({"index": i, "t": float(points[i]), "chi": slope, "chi_next": corrected})

    P = np.array(
        [invert_in_payment(pref, Y[i], float(points[i]), W[i], inversion_tol) for i in range(n)]
    )
    logger.debug(f"{pref.name}/{Y.name}: synthesized payments on {n} points, W(1)={W[-1]:.6g}")
    return SynthesisResult(P=GridFn(P), W=GridFn(W), k=k, steps=steps)


def synthesize_payments(
    pref: Preference, Y: Allocation, k: float = 0.0, tol: Optional[Tolerance] = None, **kwargs
) -> GridFn:
    """Payments making ``(Y, P)`` satisfy the envelope formula with ``V(0) = k``."""
    return run_synthesis(pref, Y, k, tol, **kwargs).P


def verify_envelope_consistency(pref: Preference, Y: Allocation, P: GridFn, k: float = 0.0) -> GridFn:
    """``t -> f(Y(t), P(t), t) - k - int_0^t f_3(Y(s), P(s), s) ds``."""
    if P.n_points != Y.n_points:
        raise ArgumentError(
            f"payments have {P.n_points} points but the allocation has {Y.n_points}"
        )
    points = Y.points
    value = GridFn([pref.evaluate(Y[i], P[i], points[i], index=i) for i in range(Y.n_points)])
    partial = GridFn([pref.partial_t(Y[i], P[i], points[i], index=i) for i in range(Y.n_points)])
    return value - k - cumulative_integral(partial)


def quasilinear_payments(
    h: Callable[[object, float], float],
    h_t: Callable[[object, float], float],
    Y: Allocation,
    k: float = 0.0,
) -> GridFn:
    """
    Closed form for ``f(y, p, t) = h(y, t) - p``:
    ``P(t) = h(Y(t), t) - k - int_0^t h_2(Y(s), s) ds``.
    """
    points = Y.points
    value = GridFn([h(Y[i], float(points[i])) for i in range(Y.n_points)])
    partial = GridFn([h_t(Y[i], float(points[i])) for i in range(Y.n_points)])
    return value - k - cumulative_integral(partial)
