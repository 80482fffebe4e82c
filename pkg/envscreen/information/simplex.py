"""
Dense phase-one simplex for small feasibility problems ``A x = b, x >= 0``.

Pivoting follows Bland's rule (lowest-index entering column, ties in the ratio
test broken by lowest basic index), so the method cannot cycle in exact
arithmetic. An iteration guard turns floating-point cycling into an error.
"""
from dataclasses import dataclass

import numpy as np

from ..utils.errors import ArgumentError, NumericError

__all__ = ["PhaseOneResult", "phase_one"]

_PIVOT_EPS = 1e-12


@dataclass
class PhaseOneResult:
    feasible: bool
    x: np.ndarray
    infeasibility: float
    iterations: int


def phase_one(A, b, tol: float = 1e-8, max_iterations: int = None) -> PhaseOneResult:
    """
    Minimize the sum of artificial variables for ``A x = b, x >= 0``.

    Returns the basic solution found; ``feasible`` is set when the remaining
    artificial mass is at most ``tol``.

    Raises:
        NumericError: more than ``max_iterations`` pivots were needed.
    """
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float)
    if A.ndim != 2 or b.shape != (A.shape[0],):
        raise ArgumentError(f"shape mismatch: A {A.shape}, b {b.shape}")
    m, n = A.shape
    flip = b < 0
    A[flip] *= -1
    b[flip] *= -1

    width = n + m
    T = np.zeros((m + 1, width + 1))
    T[:m, :n] = A
    T[:m, n:width] = np.eye(m)
    T[:m, -1] = b
    # reduced costs of the artificial objective; last entry holds -objective
    T[m, :n] = -A.sum(axis=0)
    T[m, -1] = -b.sum()
    basis = list(range(n, width))

    if max_iterations is None:
        max_iterations = 50 * width
    iterations = 0
    while True:
        costs = T[m, :width]
        candidates = np.flatnonzero(costs < -_PIVOT_EPS)
        if candidates.size == 0:
            break
        entering = int(candidates[0])
        column = T[:m, entering]
        rows = np.flatnonzero(column > _PIVOT_EPS)
        assert rows.size > 0, "phase-one objective is bounded below by zero"
        ratios = T[rows, -1] / column[rows]
        best = ratios.min()
        ties = rows[ratios <= best + _PIVOT_EPS * max(1.0, abs(best))]
        leaving = int(min(ties, key=lambda i: basis[i]))

        T[leaving] /= T[leaving, entering]
        for i in range(m + 1):
            if i != leaving and T[i, entering] != 0.0:
                T[i] -= T[i, entering] * T[leaving]
        basis[leaving] = entering

        iterations += 1
        if iterations > max_iterations:
            raise NumericError(f"phase-one simplex exceeded {max_iterations} pivots")

    x = np.zeros(n)
    for i, j in enumerate(basis):
        if j < n:
            x[j] = max(T[i, -1], 0.0)
    infeasibility = max(-T[m, -1], 0.0)
    return PhaseOneResult(
        feasible=bool(infeasibility <= tol), x=x, infeasibility=float(infeasibility), iterations=iterations
    )
