"""
Selling information: buyers of type ``t`` value a distribution of posteriors
``y`` at ``h(y, t) = sum_i w_i V(mu_i, t)`` and pay ``p``, with preferences
``f(y, p, t) = g(h(y, t), p)``.
"""
import logging
from collections import OrderedDict
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..grid import GridFn, Tolerance
from ..mechanism import (
    Allocation,
    ICReport,
    Order,
    Preference,
    PaymentSearchReport,
    implement_increasing,
    search_ic_payments,
)
from ..utils.errors import ArgumentError, ModelViolationError, PreconditionError
from .blackwell import PosteriorDistribution, SharingProofResult, blackwell_leq, sharing_proof

__all__ = [
    "ValueOfInformation",
    "InfoPreference",
    "PosteriorCatalog",
    "MenuPricing",
    "RefutationReport",
    "scoring_rule_l2",
    "quasilinear_g",
    "power_payment_g",
    "expected_value",
    "probe_convexity",
    "build_info_preference",
    "blackwell_order",
    "price_information_menu",
    "refute_decreasing_allocation",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ValueOfInformation:
    """
    ``V(mu, t)``: the best expected payoff of type ``t`` holding belief ``mu``.
    ``V_t_partial`` is its type derivative, bounded in absolute value by ``bound``.
    """

    V: Callable[[np.ndarray, float], float]
    V_t_partial: Optional[Callable[[np.ndarray, float], float]]
    bound: float
    name: str = "voi"


def scoring_rule_l2() -> ValueOfInformation:
    """
    Value of forecasting under the spherical scoring rule scaled by ``t``:
    announcing the true belief is optimal and earns ``t * ||mu||_2``.
    """
    return ValueOfInformation(
        V=lambda mu, t: t * float(np.linalg.norm(mu)),
        V_t_partial=lambda mu, t: float(np.linalg.norm(mu)),
        bound=1.0,
        name="scoring_l2",
    )


@dataclass(frozen=True)
class InfoPreference:
    g: Callable[[float, float], float]
    g_v_partial: Optional[Callable[[float, float], float]]
    g_v_partial_bound: float
    voi: ValueOfInformation
    payment_range_hint: Tuple[float, float] = (-1.0, 1.0)
    name: str = "info_preference"


def quasilinear_g() -> Tuple[Callable, Callable, float]:
    return (lambda v, p: v - p), (lambda v, p: 1.0), 1.0


def power_payment_g() -> Tuple[Callable, Callable, float]:
    return (lambda v, p: v - p ** 3), (lambda v, p: 1.0), 1.0


def expected_value(voi: ValueOfInformation, y: PosteriorDistribution, t: float) -> float:
    return float(sum(w * voi.V(mu, t) for mu, w in zip(y.support, y.weights)))


def probe_convexity(
    voi: ValueOfInformation,
    beliefs: Sequence[np.ndarray],
    t_values: Sequence[float] = (0.0, 0.5, 1.0),
    n_mixtures: int = 32,
    seed: int = 0,
    slack: float = 1e-10,
):
    """
    Check ``V(l mu + (1 - l) nu, t) <= l V(mu, t) + (1 - l) V(nu, t)`` on
    random pairs from ``beliefs`` and random ``l``.

    Raises:
        ModelViolationError: a sampled mixture breaks convexity.
    """
    beliefs = [np.asarray(mu, dtype=float) for mu in beliefs]
    if len(beliefs) < 2:
        return
    rng = np.random.default_rng(seed)
    for _ in range(n_mixtures):
        i, j = rng.choice(len(beliefs), size=2, replace=False)
        lam = float(rng.uniform())
        mid = lam * beliefs[i] + (1 - lam) * beliefs[j]
        for t in t_values:
            chord = lam * voi.V(beliefs[i], t) + (1 - lam) * voi.V(beliefs[j], t)
            if voi.V(mid, t) > chord + slack:
                raise ModelViolationError(
                    f"{voi.name} is not convex at t={t:.6g} between "
                    f"{beliefs[i].tolist()} and {beliefs[j].tolist()}"
                )


class PosteriorCatalog:
    """
    Integer handles for distributions of posteriors. Equal distributions
    (up to support order) share a handle.
    """

    def __init__(self):
        self._items: List[PosteriorDistribution] = []

    def add(self, y: PosteriorDistribution) -> int:
        for handle, item in enumerate(self._items):
            if item.same_as(y):
                return handle
        self._items.append(y)
        return len(self._items) - 1

    def add_all(self, ys: Sequence[PosteriorDistribution]) -> List[int]:
        return [self.add(y) for y in ys]

    def __getitem__(self, handle: int) -> PosteriorDistribution:
        return self._items[handle]

    def __len__(self):
        return len(self._items)

    def __iter__(self):
        return iter(self._items)

    def resolve(self, y: Union[int, PosteriorDistribution]) -> PosteriorDistribution:
        if isinstance(y, PosteriorDistribution):
            return y
        return self._items[y]


def build_info_preference(
    ip: InfoPreference, catalog: Optional[PosteriorCatalog] = None, probe: bool = True
) -> Preference:
    """
    Assemble ``f(y, p, t) = g(h(y, t), p)``. Outcomes are catalog handles or
    distributions. ``f_3`` comes from the chain rule when both ``g_v_partial``
    and ``V_t_partial`` are supplied, else from central differences.

    Raises:
        ModelViolationError: ``g(v, .)`` is not strictly decreasing on the
            sampled payment lattice.
    """
    if catalog is None:
        catalog = PosteriorCatalog()
    voi = ip.voi

    if probe:
        lattice = np.linspace(*ip.payment_range_hint, 33)
        for v in (-voi.bound, 0.0, voi.bound):
            values = np.array([ip.g(v, p) for p in lattice])
            if np.any(np.diff(values) >= 0):
                raise ModelViolationError(f"{ip.name}: g({v:.3g}, p) is not strictly decreasing in p")

    def payoff(y, p, t):
        return ip.g(expected_value(voi, catalog.resolve(y), t), p)

    t_partial = None
    if ip.g_v_partial is not None and voi.V_t_partial is not None:

        def t_partial(y, p, t):
            dist = catalog.resolve(y)
            v = expected_value(voi, dist, t)
            dv = sum(w * voi.V_t_partial(mu, t) for mu, w in zip(dist.support, dist.weights))
            return ip.g_v_partial(v, p) * dv

    return Preference(
        payoff=payoff,
        t_partial=t_partial,
        t_partial_bound=ip.g_v_partial_bound * voi.bound,
        payment_range_hint=ip.payment_range_hint,
        name=ip.name,
    )


def blackwell_order(catalog: PosteriorCatalog, tol: Optional[Tolerance] = None) -> Callable[[int, int], Order]:
    """A memoized comparator of catalog handles by Blackwell informativeness."""
    memo: Dict[Tuple[int, int], Tuple[bool, bool]] = {}

    def directions(a: int, b: int) -> Tuple[bool, bool]:
        if (a, b) not in memo:
            if (b, a) in memo:
                down, up = memo[(b, a)]
            else:
                up = blackwell_leq(catalog[a], catalog[b], tol).feasible
                down = blackwell_leq(catalog[b], catalog[a], tol).feasible
            memo[(a, b)] = (up, down)
        return memo[(a, b)]

    def compare(a: int, b: int) -> Order:
        if a == b:
            return Order.EQ
        up, down = directions(a, b)
        if up and down:
            return Order.EQ
        if up:
            return Order.LT
        if down:
            return Order.GT
        return Order.INCOMPARABLE

    compare.directions = directions
    return compare


@dataclass
class MenuPricing:
    payments: GridFn
    ic: ICReport
    sharing: SharingProofResult
    handles: List[int]

    def to_dict(self) -> "OrderedDict[str, Any]":
        ret = OrderedDict()
        ret["payments"] = self.payments.tolist()
        ret["ic"] = self.ic.to_dict()
        ret["sharing_proof"] = self.sharing.holds
        ret["incomparable_pair"] = list(self.sharing.pair) if self.sharing.pair else None
        ret["handles"] = self.handles
        return ret


def _menu_setup(ip: InfoPreference, alloc: Sequence[PosteriorDistribution]):
    if len(alloc) < 3:
        raise ArgumentError(f"an allocation needs at least 3 grid points, got {len(alloc)}")
    catalog = PosteriorCatalog()
    handles = catalog.add_all(alloc)
    compare = blackwell_order(catalog)
    probe_convexity(ip.voi, [mu for y in catalog for mu in y.support])
    pref = build_info_preference(ip, catalog)
    return catalog, handles, compare, pref


def price_information_menu(
    ip: InfoPreference,
    alloc: Sequence[PosteriorDistribution],
    k: float = 0.0,
    tol: Optional[Tolerance] = None,
    ic_tol: Optional[Tolerance] = None,
) -> MenuPricing:
    """
    Price a Blackwell-increasing information allocation given on the type grid.

    Raises:
        PreconditionError: two consecutive types receive decreasing or
            incomparable information; ``pair`` names their grid indices.
    """
    catalog, handles, compare, pref = _menu_setup(ip, alloc)
    for i in range(len(handles) - 1):
        order = compare(handles[i], handles[i + 1])
        if order is Order.GT or order is Order.INCOMPARABLE:
            what = "less" if order is Order.GT else "incomparable"
            raise PreconditionError(
                f"type index {i + 1} receives {what} information than type index {i}",
                pair=(i, i + 1),
            )
    Y = Allocation(handles, order_cmp=compare, name="information")
    P, report = implement_increasing(pref, Y, k, tol, ic_tol, transitive=True)

    def directions(i, j):
        return compare.directions(handles[i], handles[j])

    sharing = sharing_proof(list(alloc), comparator=directions)
    logger.info(
        f"{ip.name}: priced {len(catalog)} distinct experiments, "
        f"IC={report.is_ic} sharing-proof={sharing.holds}"
    )
    return MenuPricing(payments=P, ic=report, sharing=sharing, handles=handles)


@dataclass
class RefutationReport:
    """
    Evidence against implementing an allocation with a comparable decreasing
    pair. ``verdict`` is "NoICPaymentsFound" when neither the synthesized
    payments nor any perturbation is IC; this is evidence, not impossibility.
    """

    verdict: str
    decreasing_pair: Tuple[int, int]
    search: PaymentSearchReport

    def to_dict(self) -> "OrderedDict[str, Any]":
        ret = OrderedDict()
        ret["verdict"] = self.verdict
        ret["decreasing_pair"] = list(self.decreasing_pair)
        ret["search"] = self.search.to_dict()
        return ret


def refute_decreasing_allocation(
    ip: InfoPreference,
    alloc: Sequence[PosteriorDistribution],
    k: float = 0.0,
    tol: Optional[Tolerance] = None,
    n_perturbations: int = 50,
    seed: int = 0,
) -> RefutationReport:
    """
    Search for IC payments for an allocation that gives some type strictly
    less information than a lower type.

    Raises:
        PreconditionError: no comparable decreasing pair exists.
    """
    catalog, handles, compare, pref = _menu_setup(ip, alloc)
    pair = None
    for i in range(len(handles) - 1):
        for j in range(i + 1, len(handles)):
            if compare(handles[j], handles[i]) is Order.LT:
                pair = (i, j)
                break
        if pair is not None:
            break
    if pair is None:
        raise PreconditionError("allocation has no comparable decreasing pair")
    Y = Allocation(handles, order_cmp=compare, name="information")
    search = search_ic_payments(pref, Y, k, tol, n_perturbations=n_perturbations, seed=seed)
    verdict = "ICPaymentsFound" if search.found_ic else "NoICPaymentsFound"
    logger.info(f"{ip.name}: decreasing pair {pair}, best IC violation {search.best_violation:.3g}")
    return RefutationReport(verdict=verdict, decreasing_pair=pair, search=search)
