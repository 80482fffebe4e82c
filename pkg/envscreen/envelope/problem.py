import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Optional, Sequence

import numpy as np

from ..grid import grid_points
from ..utils.errors import ArgumentError, EvaluationError

__all__ = ["DecisionProblem", "DecisionRule"]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DecisionProblem:
    """
    A decision maker with objective ``f(x, t)`` over an unstructured action
    set and types ``t`` in [0, 1].

    Attributes:
        objective: ``f(x, t)``; actions are opaque tokens.
        t_partial: the type derivative ``f_2(x, t)``. When omitted, a central
            finite difference with step ``fd_step`` is used instead.
        t_partial_bound: a bound on ``|f_2|``, used to calibrate tolerances.
        name: label used in logs and reports.
    """

    objective: Callable[[Any, float], float]
    t_partial: Optional[Callable[[Any, float], float]] = None
    t_partial_bound: Optional[float] = None
    fd_step: float = 1e-5
    name: str = "problem"

    def __post_init__(self):
        if self.t_partial_bound is not None and self.t_partial_bound < 0:
            raise ArgumentError(f"t_partial_bound must be >= 0, got {self.t_partial_bound}")
        if not self.fd_step > 0:
            raise ArgumentError(f"fd_step must be positive, got {self.fd_step}")

    @property
    def uses_finite_difference(self) -> bool:
        return self.t_partial is None

    def evaluate(self, x, t: float, index: Optional[int] = None) -> float:
        return _call(self.objective, x, t, index, "objective")

    def partial_t(self, x, t: float, index: Optional[int] = None) -> float:
        if self.t_partial is not None:
            return _call(self.t_partial, x, t, index, "t_partial")
        return central_difference(lambda s: self.evaluate(x, s, index), t, self.fd_step)


def central_difference(fn: Callable[[float], float], t: float, step: float) -> float:
    """
    Second-order finite difference of ``fn`` at ``t``, switching to one-sided
    three-point stencils where ``t -/+ step`` would leave [0, 1].
    """
    if t - step < 0.0:
        return (-3.0 * fn(t) + 4.0 * fn(t + step) - fn(t + 2 * step)) / (2 * step)
    if t + step > 1.0:
        return (3.0 * fn(t) - 4.0 * fn(t - step) + fn(t - 2 * step)) / (2 * step)
    return (fn(t + step) - fn(t - step)) / (2 * step)


def _call(fn, x, t, index, what) -> float:
    try:
        value = float(fn(x, t))
    except (ArithmeticError, ValueError, TypeError) as e:
        raise EvaluationError(f"{what} failed at x={x!r}, t={t:.6g}: {e}", index=index) from e
    if not math.isfinite(value):
        raise EvaluationError(f"{what} returned {value} at x={x!r}, t={t:.6g}", index=index)
    return value


@dataclass(frozen=True)
class DecisionRule:
    """
    A decision rule ``X: [0, 1] -> actions`` sampled on the ambient grid.

    ``lipschitz`` is the caller's assertion that the underlying rule is
    Lipschitz continuous (with constant ``lipschitz_constant`` if given); it is
    required by the classical first-order condition only.
    """

    actions: Sequence[Hashable]
    lipschitz: bool = False
    lipschitz_constant: Optional[float] = None
    name: str = field(default="rule", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "actions", tuple(self.actions))
        if len(self.actions) < 3:
            raise ArgumentError(f"a grid needs at least 3 points, got {len(self.actions)}")

    @classmethod
    def from_callable(cls, fn: Callable[[float], Any], n_points: int, **kwargs) -> "DecisionRule":
        actions = []
        for i, t in enumerate(grid_points(n_points)):
            try:
                actions.append(fn(t))
            except (ArithmeticError, ValueError, TypeError) as e:
                raise EvaluationError(f"decision rule failed at t={t:.6g}: {e}", index=i) from e
        return cls(actions, **kwargs)

    @property
    def n_points(self) -> int:
        return len(self.actions)

    @property
    def step(self) -> float:
        return 1.0 / (self.n_points - 1)

    @property
    def points(self) -> np.ndarray:
        return grid_points(self.n_points)

    def __getitem__(self, index):
        return self.actions[index]

    def __len__(self):
        return self.n_points

    def numeric_values(self) -> Optional[np.ndarray]:
        """Actions as floats, or None when they are not numbers."""
        try:
            values = np.array([float(a) for a in self.actions])
        except (TypeError, ValueError):
            return None
        return values

    def estimate_lipschitz(self) -> Optional[float]:
        """Largest grid slope of a numeric rule; None for non-numeric actions."""
        values = self.numeric_values()
        if values is None:
            return None
        return float(np.max(np.abs(np.diff(values))) / self.step)
