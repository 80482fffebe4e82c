"""
Incentive compatibility of direct mechanisms on a grid, single-crossing
checks, and the increasing-allocation implementation pipeline.
"""
import logging
from collections import OrderedDict, namedtuple
from dataclasses import dataclass, field
from typing import Any, Callable, List, Optional, Sequence, Tuple

import numpy as np

from ..grid import GridFn, Tolerance
from ..utils.errors import ArgumentError, EnvscreenError, PreconditionError
from .preference import Allocation, Order, Preference, natural_order
from .synthesis import synthesize_payments

__all__ = [
    "Mechanism",
    "ICReport",
    "SingleCrossingReport",
    "MonotonicityCheck",
    "ConverseReport",
    "PaymentSearchReport",
    "ic_tolerance",
    "ic_report",
    "single_crossing_differences_check",
    "is_nondecreasing",
    "implement_increasing",
    "converse_check",
    "search_ic_payments",
    "step_payment_search",
    "outer_spence_mirrlees_check",
]

logger = logging.getLogger(__name__)

MonotonicityCheck = namedtuple("MonotonicityCheck", ["holds", "pair"])


@dataclass(frozen=True)
class Mechanism:
    pref: Preference
    Y: Allocation
    P: GridFn

    def __post_init__(self):
        if self.P.n_points != self.Y.n_points:
            raise ArgumentError(
                f"allocation has {self.Y.n_points} points but payments have {self.P.n_points}"
            )

    @property
    def n_points(self) -> int:
        return self.Y.n_points


@dataclass
class ICReport:
    """
    ``mimic_matrix[r, t]`` is the payoff of type ``t`` reporting ``r``.

    ``violations`` lists ``(r, t, gain)`` in decreasing gain, truncated to
    ``max_listed`` entries; ``n_violations`` counts all of them.
    """

    mimic_matrix: np.ndarray
    worst_violation: float
    violations: List[Tuple[float, float, float]]
    n_violations: int
    is_ic: bool
    tolerance: float

    @property
    def violating_pairs(self) -> List[Tuple[float, float]]:
        return [(r, t) for r, t, _ in self.violations]

    @property
    def gains(self) -> np.ndarray:
        """``gains[r, t] = U(r, t) - U(t, t)``."""
        return self.mimic_matrix - np.diag(self.mimic_matrix)[None, :]

    def to_dict(self) -> "OrderedDict[str, Any]":
        ret = OrderedDict()
        ret["worst_violation"] = self.worst_violation
        ret["is_ic"] = self.is_ic
        ret["tolerance"] = self.tolerance
        ret["n_violations"] = self.n_violations
        ret["violating_pairs"] = [list(v) for v in self.violations]
        return ret

    def violation_table(self) -> np.ndarray:
        """Columns r, t, gain."""
        if not self.violations:
            return np.zeros((0, 3))
        return np.array(self.violations)


def ic_tolerance(pref: Preference, Y: Allocation, constant: float = 10.0) -> Tolerance:
    """``constant * h * B`` with ``B`` the declared ``|f_3|`` bound (1 if zero)."""
    bound = pref.t_partial_bound if pref.t_partial_bound > 0 else 1.0
    return Tolerance(abs_tol=constant * Y.step * bound)


def ic_report(m: Mechanism, tol: Optional[Tolerance] = None, max_listed: int = 100) -> ICReport:
    """
    Exhaustive incentive-compatibility check: every type against every report.
    """
    if tol is None:
        tol = Tolerance(abs_tol=1e-9)
    n = m.n_points
    points = m.Y.points
    U = np.empty((n, n))
    rows = {}
    for r in range(n):
        key = (m.Y[r], float(m.P[r]))
        try:
            cached = rows.get(key)
        except TypeError:
            cached = None
        if cached is None:
            cached = np.array(
                [m.pref.evaluate(m.Y[r], m.P[r], float(t), index=r) for t in points]
            )
            try:
                rows[key] = cached
            except TypeError:
                pass
        U[r] = cached

    gains = U - np.diag(U)[None, :]
    worst = max(0.0, float(gains.max()))
    bound = tol.bound(float(np.max(np.abs(U))))
    rs, ts = np.nonzero(gains > bound)
    order = np.argsort(-gains[rs, ts], kind="stable")
    violations = [
        (float(points[rs[j]]), float(points[ts[j]]), float(gains[rs[j], ts[j]]))
        for j in order[:max_listed]
    ]
    report = ICReport(
        mimic_matrix=U,
        worst_violation=worst,
        violations=violations,
        n_violations=int(rs.size),
        is_ic=worst <= bound,
        tolerance=bound,
    )
    logger.debug(
        f"{m.pref.name}/{m.Y.name}: worst IC violation {worst:.3g} "
        f"({report.n_violations} pairs above {bound:.3g})"
    )
    return report


@dataclass
class SingleCrossingReport:
    """
    ``violation`` is ``(pair_index, t, t_later)`` for the first pattern
    breach; ``crossings[i]`` is the first grid type where pair ``i`` turns
    non-negative (None if it never does).
    """

    holds: bool
    strict: bool
    violation: Optional[Tuple[int, float, float]] = None
    crossings: List[Optional[float]] = field(default_factory=list)

    def to_dict(self) -> "OrderedDict[str, Any]":
        ret = OrderedDict()
        ret["holds"] = self.holds
        ret["strict"] = self.strict
        ret["violation"] = list(self.violation) if self.violation else None
        ret["crossings"] = self.crossings
        return ret


def single_crossing_differences_check(
    pref: Preference,
    pairs: Sequence[Tuple[Tuple[Any, float], Tuple[Any, float]]],
    t_grid: Sequence[float],
    strict: bool = False,
    tol: Optional[Tolerance] = None,
    order_cmp: Callable[[Any, Any], Order] = natural_order,
) -> SingleCrossingReport:
    """
    For each ``((y, p), (y2, p2))`` with ``y < y2``, check that
    ``D(t) = f(y2, p2, t) - f(y, p, t)`` never returns below zero once it has
    reached zero along ``t_grid``.

    Values within ``tol.abs_tol`` of zero count as zero. In strict mode a
    difference that is clearly positive must also stay clearly positive.
    Strict mode does not require zeros to turn positive: a difference that
    stays inside the zero band on the whole grid (``D == 0``) passes both
    modes, so an indifferent pair is never reported as a violation.

    Raises:
        ArgumentError: some pair is not ranked ``y < y2`` by ``order_cmp``.
    """
    if tol is None:
        tol = Tolerance(abs_tol=1e-9)
    eps = tol.abs_tol
    t_grid = [float(t) for t in sorted(t_grid)]
    crossings = []
    violation = None
    for index, ((y, p), (y2, p2)) in enumerate(pairs):
        if order_cmp(y, y2) is not Order.LT:
            raise ArgumentError(f"pair {index} is not ordered: {y!r} is not below {y2!r}")
        diffs = np.array([pref.evaluate(y2, p2, t) - pref.evaluate(y, p, t) for t in t_grid])
        signs = np.where(diffs > eps, 1, np.where(diffs < -eps, -1, 0))

        nonneg = np.flatnonzero(signs >= 0)
        crossings.append(t_grid[int(nonneg[0])] if nonneg.size else None)
        if violation is not None:
            continue
        if nonneg.size:
            start = int(nonneg[0])
            later_neg = np.flatnonzero(signs[start:] < 0)
            if later_neg.size:
                violation = (index, t_grid[start], t_grid[start + int(later_neg[0])])
                continue
        if strict:
            positive = np.flatnonzero(signs > 0)
            if positive.size:
                start = int(positive[0])
                later_flat = np.flatnonzero(signs[start:] <= 0)
                if later_flat.size:
                    violation = (index, t_grid[start], t_grid[start + int(later_flat[0])])
    return SingleCrossingReport(
        holds=violation is None, strict=strict, violation=violation, crossings=crossings
    )


def is_nondecreasing(Y: Allocation, transitive: bool = False) -> MonotonicityCheck:
    """
    Look for grid indices ``i < j`` with ``Y(t_j) < Y(t_i)``.

    By default every pair is scanned. With ``transitive=True`` only
    consecutive pairs are compared, which is enough when the order on
    outcomes is transitive and consecutive outcomes are comparable.

    Raises:
        ArgumentError: the allocation has no order on its outcomes.
    """
    if Y.order_cmp is None:
        raise ArgumentError(f"{Y.name} has no order on its outcomes")
    n = Y.n_points
    if transitive:
        for i in range(n - 1):
            if Y.compare(Y[i + 1], Y[i]) is Order.LT:
                return MonotonicityCheck(False, (i, i + 1))
        return MonotonicityCheck(True, None)
    for i in range(n - 1):
        for j in range(i + 1, n):
            if Y.compare(Y[j], Y[i]) is Order.LT:
                return MonotonicityCheck(False, (i, j))
    return MonotonicityCheck(True, None)


def _first_incomparable(Y: Allocation, transitive: bool):
    n = Y.n_points
    if transitive:
        candidates = ((i, i + 1) for i in range(n - 1))
    else:
        candidates = ((i, j) for i in range(n - 1) for j in range(i + 1, n))
    for i, j in candidates:
        if Y[i] != Y[j] and Y.compare(Y[i], Y[j]) is Order.INCOMPARABLE:
            return i, j
    return None


def implement_increasing(
    pref: Preference,
    Y: Allocation,
    k: float = 0.0,
    tol: Optional[Tolerance] = None,
    ic_tol: Optional[Tolerance] = None,
    transitive: bool = False,
) -> Tuple[GridFn, ICReport]:
    """
    Synthesize envelope payments for an increasing allocation and check the
    resulting mechanism for incentive compatibility.

    Raises:
        PreconditionError: ``Y`` is not non-decreasing or assigns
            incomparable outcomes to two types.
    """
    check = is_nondecreasing(Y, transitive=transitive)
    if not check.holds:
        i, j = check.pair
        raise PreconditionError(
            f"{Y.name} decreases between grid indices {i} and {j}", pair=check.pair
        )
    pair = _first_incomparable(Y, transitive)
    if pair is not None:
        raise PreconditionError(
            f"{Y.name} assigns incomparable outcomes to grid indices {pair[0]} and {pair[1]}",
            pair=pair,
        )
    P = synthesize_payments(pref, Y, k, tol)
    if ic_tol is None:
        ic_tol = ic_tolerance(pref, Y)
    report = ic_report(Mechanism(pref, Y, P), ic_tol)
    if not report.is_ic:
        logger.warning(
            f"{pref.name}/{Y.name}: synthesized mechanism violates IC by {report.worst_violation:.3g}"
        )
    return P, report


def _image_pairs(Y: Allocation, P: GridFn, max_pairs: int = 16):
    # consecutive distinct (outcome, payment) levels along the grid, plus the extremes
    levels = []
    for i in range(Y.n_points):
        item = (Y[i], float(P[i]))
        if not levels or levels[-1] != item:
            levels.append(item)
    pairs = []
    for a, b in zip(levels, levels[1:]):
        if Y.compare(a[0], b[0]) is Order.LT:
            pairs.append((a, b))
    if len(levels) > 2 and Y.compare(levels[0][0], levels[-1][0]) is Order.LT:
        pairs.append((levels[0], levels[-1]))
    if len(pairs) > max_pairs:
        stride = int(np.ceil(len(pairs) / max_pairs))
        pairs = pairs[::stride]
    return pairs


def outer_spence_mirrlees_check(
    pref: Preference,
    Y: Allocation,
    P: GridFn,
    tol: Optional[Tolerance] = None,
    strict: bool = True,
    max_pairs: int = 16,
) -> SingleCrossingReport:
    """
    Single-crossing differences on the two-level step mechanisms drawn from
    the image of ``(Y, P)``.
    """
    pairs = _image_pairs(Y, P, max_pairs)
    return single_crossing_differences_check(
        pref, pairs, Y.points, strict=strict, tol=tol, order_cmp=Y.order_cmp
    )


@dataclass
class ConverseReport:
    """``verdict`` is "OK" unless an IC mechanism has a decreasing pair."""

    verdict: str
    is_ic: bool
    nondecreasing: bool
    pair: Optional[Tuple[int, int]] = None
    single_crossing: Optional[bool] = None

    def to_dict(self) -> "OrderedDict[str, Any]":
        return OrderedDict(
            [
                ("verdict", self.verdict),
                ("is_ic", self.is_ic),
                ("nondecreasing", self.nondecreasing),
                ("pair", list(self.pair) if self.pair else None),
                ("single_crossing", self.single_crossing),
            ]
        )


def converse_check(m: Mechanism, tol: Optional[Tolerance] = None) -> ConverseReport:
    """
    Verify that an incentive-compatible mechanism has a non-decreasing
    allocation. A counterexample means a numeric artifact or a preference that
    is not strictly single-crossing; the single-crossing result is attached.
    """
    if tol is None:
        tol = ic_tolerance(m.pref, m.Y)
    report = ic_report(m, tol)
    monotone = is_nondecreasing(m.Y)
    scd = outer_spence_mirrlees_check(m.pref, m.Y, m.P)
    if not scd.holds:
        logger.warning(f"{m.pref.name}: strict single crossing fails on the mechanism's image")
    if report.is_ic and not monotone.holds:
        logger.warning(
            f"{m.pref.name}/{m.Y.name}: IC mechanism with decreasing pair {monotone.pair}"
        )
        return ConverseReport(
            "CounterexampleFound", True, False, pair=monotone.pair, single_crossing=scd.holds
        )
    return ConverseReport(
        "OK", report.is_ic, monotone.holds, pair=monotone.pair, single_crossing=scd.holds
    )


@dataclass
class PaymentSearchReport:
    """
    Best worst-case IC violation over the synthesized payments and a family
    of seeded smooth perturbations of them. ``found_ic`` False means no IC
    payments were found in this family, not that none exist.
    """

    best_violation: float
    violations: List[float]
    found_ic: bool
    best_payments: GridFn
    synthesis_error: Optional[str] = None

    def to_dict(self) -> "OrderedDict[str, Any]":
        return OrderedDict(
            [
                ("best_violation", self.best_violation),
                ("found_ic", self.found_ic),
                ("n_candidates", len(self.violations)),
                ("violations", self.violations),
                ("synthesis_error", self.synthesis_error),
            ]
        )


def search_ic_payments(
    pref: Preference,
    Y: Allocation,
    k: float = 0.0,
    tol: Optional[Tolerance] = None,
    n_perturbations: int = 50,
    seed: int = 0,
    amplitude: float = 0.25,
    n_modes: int = 4,
) -> PaymentSearchReport:
    """
    Try the synthesized payments and ``n_perturbations`` perturbations
    ``P + amplitude * sum_j c_j sin(j pi t)`` with ``c_j ~ U[-1, 1]``.
    """
    if tol is None:
        tol = ic_tolerance(pref, Y)
    points = Y.points
    synthesis_error = None
    try:
        base = synthesize_payments(pref, Y, k)
    except EnvscreenError as e:
        logger.info(f"{pref.name}/{Y.name}: synthesis failed ({e}), perturbing zero payments")
        synthesis_error = str(e)
        base = GridFn.constant(0.0, Y.n_points)

    rng = np.random.default_rng(seed)
    modes = np.array([np.sin(j * np.pi * points) for j in range(1, n_modes + 1)])
    candidates = [base]
    for _ in range(n_perturbations):
        coeffs = rng.uniform(-1.0, 1.0, size=n_modes)
        candidates.append(base + GridFn(amplitude * coeffs @ modes))

    violations = []
    best, best_P = np.inf, base
    for P in candidates:
        report = ic_report(Mechanism(pref, Y, P), tol, max_listed=0)
        violations.append(report.worst_violation)
        if report.worst_violation < best:
            best, best_P = report.worst_violation, P
    return PaymentSearchReport(
        best_violation=float(best),
        violations=violations,
        found_ic=bool(best <= tol.bound()),
        best_payments=best_P,
        synthesis_error=synthesis_error,
    )


def step_payment_search(
    pref: Preference, Y: Allocation, k: float = 0.0, lattice: Optional[Sequence[float]] = None
) -> GridFn:
    """
    Brute-force payments for a step allocation: the lowest level's payment
    is the lattice point whose payoff at ``t = 0`` is closest to ``k``; each
    further level takes the lattice point that keeps the boundary type
    (midway between the last point of one level and the first of the next)
    closest to indifference between neighbouring levels.
    """
    if lattice is None:
        lattice = np.linspace(-2.0, 2.0, 4001)
    lattice = np.asarray(lattice, dtype=float)
    points = Y.points
    levels = Y.levels()

    def closest(y, t, target):
        gaps = np.array([abs(pref.evaluate(y, p, t) - target) for p in lattice])
        return float(lattice[int(np.argmin(gaps))])

    P = np.empty(Y.n_points)
    start, stop, y = levels[0]
    p = closest(y, 0.0, k)
    P[start:stop] = p
    for start, stop, y_next in levels[1:]:
        boundary = 0.5 * (points[start - 1] + points[start])
        p = closest(y_next, boundary, pref.evaluate(y, p, boundary))
        P[start:stop] = p
        y = y_next
    return GridFn(P)
