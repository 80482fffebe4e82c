import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Hashable, Optional, Sequence, Tuple

import numpy as np

from ..envelope.problem import central_difference
from ..grid import grid_points
from ..utils.errors import ArgumentError, EvaluationError

__all__ = ["Order", "natural_order", "Preference", "Allocation"]


class Order(Enum):
    LT = "LT"
    EQ = "EQ"
    GT = "GT"
    INCOMPARABLE = "INCOMPARABLE"

    def reverse(self) -> "Order":
        return {Order.LT: Order.GT, Order.GT: Order.LT}.get(self, self)


def natural_order(a, b) -> Order:
    """Total order of real outcomes."""
    if a < b:
        return Order.LT
    if a > b:
        return Order.GT
    return Order.EQ


@dataclass(frozen=True)
class Preference:
    """
    Preferences ``f(y, p, t)`` over outcome ``y``, payment ``p`` and type ``t``.

    ``payoff`` must be strictly decreasing in ``p`` and onto the reals;
    ``t_partial`` is ``f_3``, bounded in absolute value by ``t_partial_bound``.
    ``payment_range_hint`` is the initial bracket for payment inversion.
    """

    payoff: Callable[[Any, float, float], float]
    t_partial: Optional[Callable[[Any, float, float], float]]
    t_partial_bound: float
    payment_range_hint: Tuple[float, float] = (-1.0, 1.0)
    fd_step: float = 1e-5
    name: str = "preference"

    def __post_init__(self):
        if self.t_partial_bound < 0:
            raise ArgumentError(f"t_partial_bound must be >= 0, got {self.t_partial_bound}")
        lo, hi = self.payment_range_hint
        if not lo < hi:
            raise ArgumentError(f"payment_range_hint must be an increasing pair, got {(lo, hi)}")

    def evaluate(self, y, p: float, t: float, index: Optional[int] = None) -> float:
        return _call(self.payoff, y, p, t, index, "payoff")

    def partial_t(self, y, p: float, t: float, index: Optional[int] = None) -> float:
        if self.t_partial is not None:
            return _call(self.t_partial, y, p, t, index, "t_partial")
        return central_difference(lambda s: self.evaluate(y, p, s, index), t, self.fd_step)


def _call(fn, y, p, t, index, what) -> float:
    try:
        value = float(fn(y, p, t))
    except (ArithmeticError, ValueError, TypeError) as e:
        raise EvaluationError(
            f"{what} failed at y={y!r}, p={p:.6g}, t={t:.6g}: {e}", index=index
        ) from e
    if not math.isfinite(value):
        raise EvaluationError(f"{what} returned {value} at y={y!r}, p={p:.6g}, t={t:.6g}", index=index)
    return value


@dataclass(frozen=True)
class Allocation:
    """
    An allocation ``Y: [0, 1] -> outcomes`` sampled on the grid, with an
    optional partial order on outcomes.
    """

    outcomes: Sequence[Hashable]
    order_cmp: Optional[Callable[[Any, Any], Order]] = None
    name: str = field(default="allocation", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "outcomes", tuple(self.outcomes))
        if len(self.outcomes) < 3:
            raise ArgumentError(f"a grid needs at least 3 points, got {len(self.outcomes)}")

    @classmethod
    def from_callable(cls, fn: Callable[[float], Any], n_points: int, **kwargs) -> "Allocation":
        outcomes = []
        for i, t in enumerate(grid_points(n_points)):
            try:
                outcomes.append(fn(float(t)))
            except (ArithmeticError, ValueError, TypeError) as e:
                raise EvaluationError(f"allocation failed at t={t:.6g}: {e}", index=i) from e
        return cls(outcomes, **kwargs)

    @property
    def n_points(self) -> int:
        return len(self.outcomes)

    @property
    def step(self) -> float:
        return 1.0 / (self.n_points - 1)

    @property
    def points(self) -> np.ndarray:
        return grid_points(self.n_points)

    def __getitem__(self, index):
        return self.outcomes[index]

    def __len__(self):
        return self.n_points

    def compare(self, a, b) -> Order:
        if self.order_cmp is None:
            raise ArgumentError(f"{self.name} has no order on its outcomes")
        return self.order_cmp(a, b)

    def levels(self):
        """
        Maximal runs of equal consecutive outcomes as ``(start, stop, outcome)``
        with ``stop`` exclusive.
        """
        runs = []
        start = 0
        for i in range(1, self.n_points + 1):
            if i == self.n_points or self.outcomes[i] != self.outcomes[start]:
                runs.append((start, i, self.outcomes[start]))
                start = i
        return runs
