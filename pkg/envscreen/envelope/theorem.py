import logging
from collections import OrderedDict
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Iterable, Optional, Sequence, Tuple

import numpy as np

from ..grid import GridFn, Tolerance, total_variation, variation_growth
from ..utils.errors import DomainError, NotOptimalError
from ..utils.logger import log_first_n
from .problem import DecisionProblem, DecisionRule
from .residuals import (
    MimicPayoffs,
    classical_foc_residual,
    envelope_residual,
    outer_foc_estimates,
    outer_foc_richardson,
    partial_path,
)

__all__ = [
    "Verdict",
    "EnvelopeReport",
    "ClassicalReport",
    "DEFAULT_MESH",
    "calibrated_tolerance",
    "usable_mesh",
    "check_main_theorem",
    "check_necessity",
    "check_classical_theorem",
]

logger = logging.getLogger(__name__)

DEFAULT_MESH = tuple(round(0.1 * i, 10) for i in range(1, 10))

# full-grid / half-grid total variation ratio above which V_X is flagged
_VARIATION_GROWTH_LIMIT = 1.5


def usable_mesh(mesh: Sequence[float], reach: float) -> Tuple[float, ...]:
    """
    The mesh points at least ``reach`` away from both ends of [0, 1]. When
    none are left the midpoint is used, if it is far enough from the ends.
    """
    mesh = tuple(float(v) for v in mesh)
    kept = tuple(v for v in mesh if reach - 1e-12 <= v <= 1.0 - reach + 1e-12)
    if not kept:
        if reach > 0.5 + 1e-12:
            raise DomainError(f"shift {reach!r} leaves no type in [0, 1] to check the outer condition at")
        kept = (0.5,)
    if kept != mesh:
        log_first_n(
            logging.WARNING,
            f"mesh {list(mesh)} reduced to {list(kept)} for shift {reach:.4g}",
            name=__name__,
        )
    return kept


class Verdict(str, Enum):
    BOTH_HOLD = "BothHold"
    BOTH_FAIL = "BothFail"
    INCONSISTENT = "Inconsistent"

    @classmethod
    def from_checks(cls, first_ok: bool, second_ok: bool) -> "Verdict":
        if first_ok and second_ok:
            return cls.BOTH_HOLD
        if not first_ok and not second_ok:
            return cls.BOTH_FAIL
        return cls.INCONSISTENT


def calibrated_tolerance(p: DecisionProblem, X: DecisionRule, constant: float = 10.0) -> Tolerance:
    """
    ``constant * h * B`` where ``B`` is the declared bound on ``|f_2|`` or,
    failing that, the largest ``|f_2(X(t), t)|`` seen on the grid. A zero bound
    falls back to 1 so the tolerance stays positive.
    """
    if p.t_partial_bound is not None:
        bound = p.t_partial_bound
    else:
        bound = partial_path(p, X).max_abs()
    if bound <= 0.0:
        bound = 1.0
    return Tolerance(abs_tol=constant * X.step * bound)


@dataclass
class EnvelopeReport:
    """
    Outcome of checking the envelope formula against the outer first-order
    condition for one decision rule.

    ``outer_foc_residuals[a, b]`` is the estimate at ``r = mesh[a], t = mesh[b]``;
    ``forward_residuals`` and ``backward_residuals`` hold the one-sided
    estimates on the same mesh.
    """

    value_fn: GridFn
    envelope_residual: GridFn
    outer_foc_residuals: np.ndarray
    max_abs_residuals: Tuple[float, float]
    verdict: Verdict
    mesh: Tuple[float, ...]
    shift: float
    tolerance: Tolerance
    forward_residuals: np.ndarray
    backward_residuals: np.ndarray
    richardson: bool = False
    uses_finite_difference: bool = False
    total_variation: float = 0.0
    variation_growth: float = 1.0

    @property
    def bounded_variation_flag(self) -> bool:
        return self.variation_growth > _VARIATION_GROWTH_LIMIT

    def to_dict(self) -> "OrderedDict[str, Any]":
        ret = OrderedDict()
        ret["value_fn"] = self.value_fn.tolist()
        ret["envelope_residual"] = self.envelope_residual.tolist()
        ret["outer_foc_residuals"] = self.outer_foc_residuals.tolist()
        ret["max_abs_residuals"] = list(self.max_abs_residuals)
        ret["verdict"] = self.verdict.value
        ret["diagnostics"] = OrderedDict(
            [
                ("n_points", self.value_fn.n_points),
                ("mesh", list(self.mesh)),
                ("shift", self.shift),
                ("tolerance", self.tolerance.bound()),
                ("richardson", self.richardson),
                ("uses_finite_difference", self.uses_finite_difference),
                ("total_variation", self.total_variation),
                ("variation_growth", self.variation_growth),
                ("bounded_variation_flag", self.bounded_variation_flag),
                ("forward_residuals", self.forward_residuals.tolist()),
                ("backward_residuals", self.backward_residuals.tolist()),
            ]
        )
        return ret

    def grid_table(self) -> np.ndarray:
        """Columns t, value, residual."""
        return np.column_stack(
            [self.value_fn.points, self.value_fn.values, self.envelope_residual.values]
        )

    def pair_table(self) -> np.ndarray:
        """Columns r, t, symmetric, forward, backward; one row per mesh pair."""
        rows = []
        for a, r in enumerate(self.mesh):
            for b, t in enumerate(self.mesh):
                rows.append(
                    [
                        r,
                        t,
                        self.outer_foc_residuals[a, b],
                        self.forward_residuals[a, b],
                        self.backward_residuals[a, b],
                    ]
                )
        return np.array(rows)


def check_main_theorem(
    p: DecisionProblem,
    X: DecisionRule,
    tol: Optional[Tolerance] = None,
    mesh: Sequence[float] = DEFAULT_MESH,
    m: Optional[float] = None,
    richardson: bool = False,
) -> EnvelopeReport:
    """
    Compute the envelope residual on the grid and the outer first-order
    residual on every pair of ``mesh`` and compare both against ``tol``.

    Args:
        tol: defaults to :func:`calibrated_tolerance`.
        m: shift used for the outer derivative, defaults to one grid step.
            Mesh points closer than the shift to 0 or 1 are dropped.
        richardson: headline the ``(m, 2m)`` Richardson combination instead
            of the plain symmetric estimate.
    """
    if tol is None:
        tol = calibrated_tolerance(p, X)
    if m is None:
        m = X.step
    mesh = usable_mesh(mesh, 2 * m if richardson else m)

    env = envelope_residual(p, X)
    mimic = MimicPayoffs(p, X)
    V = mimic.integrand(0)

    size = len(mesh)
    symmetric = np.zeros((size, size))
    forward = np.zeros((size, size))
    backward = np.zeros((size, size))
    for a, r in enumerate(mesh):
        for b, t in enumerate(mesh):
            est = outer_foc_estimates(p, X, r, t, m, mimic)
            forward[a, b] = est.forward
            backward[a, b] = est.backward
            if richardson:
                symmetric[a, b] = outer_foc_richardson(p, X, r, t, m, mimic)
            else:
                symmetric[a, b] = est.symmetric

    max_env = env.max_abs()
    max_foc = float(np.max(np.abs(symmetric))) if size else 0.0
    scale = V.max_abs()
    verdict = Verdict.from_checks(tol.allows(max_env, scale), tol.allows(max_foc, scale))

    report = EnvelopeReport(
        value_fn=V,
        envelope_residual=env,
        outer_foc_residuals=symmetric,
        max_abs_residuals=(max_env, max_foc),
        verdict=verdict,
        mesh=mesh,
        shift=m,
        tolerance=tol,
        forward_residuals=forward,
        backward_residuals=backward,
        richardson=richardson,
        uses_finite_difference=p.uses_finite_difference,
        total_variation=total_variation(V),
        variation_growth=variation_growth(V),
    )
    if report.bounded_variation_flag:
        logger.warning(
            f"{p.name}: total variation of the value function grows under refinement "
            f"(ratio {report.variation_growth:.3g})"
        )
    if verdict is Verdict.INCONSISTENT:
        logger.warning(
            f"{p.name}/{X.name}: envelope residual {max_env:.3g} and outer first-order "
            f"residual {max_foc:.3g} disagree at tolerance {tol.bound(scale):.3g}"
        )
    logger.info(
        f"{p.name}/{X.name}: n={X.n_points} envelope={max_env:.3g} "
        f"outer_foc={max_foc:.3g} tol={tol.bound(scale):.3g} -> {verdict.value}"
    )
    return report


def check_necessity(
    p: DecisionProblem,
    maximizer: Callable[[float], Any],
    tol: Optional[Tolerance] = None,
    n_points: int = 201,
    candidates: Optional[Iterable[Any]] = None,
    mesh: Sequence[float] = DEFAULT_MESH,
) -> EnvelopeReport:
    """
    Build the rule ``t -> maximizer(t)`` on the grid and check it.

    When ``candidates`` is given, every candidate action is compared against
    the maximizer's choice at every grid point first.

    Raises:
        NotOptimalError: a candidate beats the maximizer by more than the
            tolerance.
    """
    X = DecisionRule.from_callable(maximizer, n_points, name="maximizer")
    if tol is None:
        tol = calibrated_tolerance(p, X)
    if candidates is not None:
        candidates = list(candidates)
        margin = tol.bound()
        for i, t in enumerate(X.points):
            chosen = p.evaluate(X[i], t, index=i)
            for c in candidates:
                gain = p.evaluate(c, t, index=i) - chosen
                if gain > margin:
                    raise NotOptimalError(float(t), c, gain)
    return check_main_theorem(p, X, tol, mesh=mesh)


@dataclass
class ClassicalReport:
    envelope_residual: GridFn
    classical_foc_residual: GridFn
    max_abs_residuals: Tuple[float, float]
    verdict: Verdict
    tolerance: Tolerance
    lipschitz_estimate: Optional[float] = None

    def to_dict(self) -> "OrderedDict[str, Any]":
        ret = OrderedDict()
        ret["envelope_residual"] = self.envelope_residual.tolist()
        ret["classical_foc_residual"] = self.classical_foc_residual.tolist()
        ret["max_abs_residuals"] = list(self.max_abs_residuals)
        ret["verdict"] = self.verdict.value
        ret["lipschitz_estimate"] = self.lipschitz_estimate
        return ret


def check_classical_theorem(
    p: DecisionProblem, X: DecisionRule, tol: Optional[Tolerance] = None
) -> ClassicalReport:
    """
    For a rule flagged Lipschitz: compare the classical first-order condition
    at every interior grid point against the envelope formula.
    The two end points carry the neighbouring interior value.
    """
    if tol is None:
        tol = calibrated_tolerance(p, X)
    n = X.n_points
    points = X.points
    values = np.zeros(n)
    for i in range(1, n - 1):
        values[i] = classical_foc_residual(p, X, float(points[i]), X.step)
    values[0] = values[1]
    values[-1] = values[-2]
    classical = GridFn(values)
    env = envelope_residual(p, X)
    max_env, max_foc = env.max_abs(), classical.max_abs()
    verdict = Verdict.from_checks(tol.allows(max_env), tol.allows(max_foc))
    logger.info(
        f"{p.name}/{X.name}: classical={max_foc:.3g} envelope={max_env:.3g} -> {verdict.value}"
    )
    return ClassicalReport(
        envelope_residual=env,
        classical_foc_residual=classical,
        max_abs_residuals=(max_env, max_foc),
        verdict=verdict,
        tolerance=tol,
        lipschitz_estimate=X.estimate_lipschitz(),
    )
