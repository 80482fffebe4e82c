"""
Real-valued functions sampled on a uniform grid over [0, 1].

Every other part of envscreen carries decision rules, value functions,
payment schedules and residuals as :class:`GridFn` objects. The grid is
always uniform and includes both endpoints, so a shift ``s -> s + m`` by a
multiple of the step never needs interpolation; interpolation only happens
at integration endpoints.
"""
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, Optional

import numpy as np

from ..utils.errors import AlignmentError, ArgumentError, DomainError, EvaluationError

__all__ = [
    "Tolerance",
    "GridFn",
    "grid_points",
    "shift_steps",
    "check_unit_interval",
]

# relative slack when deciding whether a shift is a multiple of the grid step
_ALIGN_RTOL = 1e-9


@dataclass(frozen=True)
class Tolerance:
    """
    Absolute/relative tolerance pair. A value ``x`` is within tolerance of a
    reference scale ``s`` iff ``|x| <= max(abs_tol, rel_tol * |s|)``.
    """

    abs_tol: float = 1e-9
    rel_tol: float = 0.0

    def __post_init__(self):
        if self.abs_tol < 0 or self.rel_tol < 0:
            raise ArgumentError(f"tolerances must be non-negative, got {self}")
        if self.abs_tol == 0 and self.rel_tol == 0:
            raise ArgumentError("at least one of abs_tol, rel_tol must be positive")

    def bound(self, scale: float = 0.0) -> float:
        return max(self.abs_tol, self.rel_tol * abs(scale))

    def allows(self, value: float, scale: float = 0.0) -> bool:
        return abs(value) <= self.bound(scale)

    def scaled(self, factor: float) -> "Tolerance":
        return Tolerance(self.abs_tol * factor, self.rel_tol)


def grid_points(n_points: int) -> np.ndarray:
    if n_points < 3:
        raise ArgumentError(f"a grid needs at least 3 points, got {n_points}")
    return np.linspace(0.0, 1.0, n_points)


def check_unit_interval(*values: float):
    for v in values:
        if not (0.0 <= v <= 1.0):
            raise DomainError(f"point {v!r} lies outside [0, 1]")


def shift_steps(m: float, n_points: int) -> int:
    """
    Number of grid steps in the shift ``m``.

    Raises:
        AlignmentError: m is not a positive integer multiple of the step.
    """
    if not m > 0:
        raise AlignmentError(f"shift must be positive, got {m!r}")
    k = m * (n_points - 1)
    rounded = int(round(k))
    if rounded < 1 or abs(k - rounded) > _ALIGN_RTOL * max(1.0, k):
        raise AlignmentError(
            f"shift {m!r} is not a multiple of the grid step 1/{n_points - 1}"
        )
    return rounded


class GridFn:
    """
    A function on the uniform grid ``t_i = i / (n_points - 1)``.

    Instances are immutable: the value array is copied and flagged read-only.
    ``padded_from`` marks the first index whose value is padding rather than a
    genuine sample (see :func:`divided_difference`).
    """

    def __init__(self, values: Iterable[float], padded_from: Optional[int] = None):
        values = np.array(values, dtype=float)
        if values.ndim != 1:
            raise ArgumentError(f"GridFn values must be one-dimensional, got shape {values.shape}")
        if values.size < 3:
            raise ArgumentError(f"a grid needs at least 3 points, got {values.size}")
        bad = np.flatnonzero(~np.isfinite(values))
        if bad.size:
            raise EvaluationError("non-finite value in grid function", index=int(bad[0]))
        values.setflags(write=False)
        self._values = values
        self.padded_from = padded_from

    @classmethod
    def from_callable(cls, fn: Callable[[float], float], n_points: int) -> "GridFn":
        values = []
        for i, t in enumerate(grid_points(n_points)):
            try:
                values.append(float(fn(t)))
            except (ArithmeticError, ValueError, TypeError) as e:
                raise EvaluationError(f"evaluation failed: {e}", index=i) from e
        return cls(values)

    @classmethod
    def constant(cls, value: float, n_points: int) -> "GridFn":
        return cls(np.full(n_points, float(value)))

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def n_points(self) -> int:
        return self._values.size

    @property
    def step(self) -> float:
        return 1.0 / (self.n_points - 1)

    @cached_property
    def points(self) -> np.ndarray:
        return grid_points(self.n_points)

    @cached_property
    def cumulative(self) -> np.ndarray:
        # trapezoid integral from 0 to every grid point
        v = self._values
        increments = 0.5 * self.step * (v[1:] + v[:-1])
        return np.concatenate([[0.0], np.cumsum(increments)])

    def __len__(self):
        return self.n_points

    def __getitem__(self, index):
        return self._values[index]

    def __call__(self, t: float) -> float:
        check_unit_interval(t)
        return float(np.interp(t, self.points, self._values))

    def index_of(self, t: float) -> int:
        """Grid index of ``t``; raises AlignmentError if ``t`` is not a grid point."""
        check_unit_interval(t)
        k = t * (self.n_points - 1)
        rounded = int(round(k))
        if abs(k - rounded) > _ALIGN_RTOL * max(1.0, k):
            raise AlignmentError(f"point {t!r} is not on the grid of {self.n_points} points")
        return rounded

    def antiderivative(self, t: float) -> float:
        """Trapezoid integral from 0 to ``t``, interpolating linearly inside a cell."""
        check_unit_interval(t)
        n = self.n_points
        pos = t * (n - 1)
        i = min(int(np.floor(pos)), n - 2)
        frac = pos - i
        v = self._values
        # value at t by linear interpolation within cell [i, i + 1]
        vt = v[i] + frac * (v[i + 1] - v[i])
        return float(self.cumulative[i] + 0.5 * frac * self.step * (v[i] + vt))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self._values)))

    def _coerce(self, other):
        if isinstance(other, GridFn):
            if other.n_points != self.n_points:
                raise ArgumentError(
                    f"grid mismatch: {self.n_points} vs {other.n_points} points"
                )
            return other._values
        return float(other)

    def __add__(self, other):
        return GridFn(self._values + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return GridFn(self._values - self._coerce(other))

    def __rsub__(self, other):
        return GridFn(self._coerce(other) - self._values)

    def __mul__(self, other):
        return GridFn(self._values * self._coerce(other))

    __rmul__ = __mul__

    def __neg__(self):
        return GridFn(-self._values)

    def tolist(self):
        return self._values.tolist()

    def __repr__(self):
        return f"GridFn(n_points={self.n_points}, max_abs={self.max_abs():.4g})"
