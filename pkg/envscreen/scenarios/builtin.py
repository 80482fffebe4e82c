"""
Builtin objectives, decision rules, preferences, allocations and
information-market ingredients that scenario configs refer to by name.

Every builder takes the free-form ``*_PARAMS`` node of the config.
"""
from collections import namedtuple

import numpy as np
from fvcore.common.registry import Registry

from ..envelope import DecisionProblem
from ..information import (
    PosteriorDistribution,
    power_payment_g,
    quasilinear_g,
    scoring_rule_l2,
    symmetric_experiment,
    point_mass,
)
from ..mechanism import Allocation, Preference, natural_order
from ..utils.errors import ArgumentError, ConfigError

OBJECTIVE_REGISTRY = Registry("OBJECTIVE")
OBJECTIVE_REGISTRY.__doc__ = """
Registry for objectives f(x, t), i.e. :class:`DecisionProblem` builders.
"""

RULE_REGISTRY = Registry("RULE")
RULE_REGISTRY.__doc__ = """
Registry for decision rules t -> action, returning a :class:`RuleSpec`.
"""

PREFERENCE_REGISTRY = Registry("PREFERENCE")
PREFERENCE_REGISTRY.__doc__ = """
Registry for preferences f(y, p, t) over real outcomes.
"""

ALLOCATION_REGISTRY = Registry("ALLOCATION")
ALLOCATION_REGISTRY.__doc__ = """
Registry for real-valued allocations t -> y, returning a callable.
"""

VALUE_REGISTRY = Registry("VALUE")
PAYMENT_G_REGISTRY = Registry("PAYMENT_G")
INFO_ALLOCATION_REGISTRY = Registry("INFO_ALLOCATION")

RuleSpec = namedtuple("RuleSpec", ["fn", "lipschitz", "lipschitz_constant"])


def _get(params, key, default):
    return params[key] if key in params else default


def _poly_coeffs(params, default):
    coeffs = np.array(_get(params, "COEFFS", default), dtype=float)
    if coeffs.ndim == 1:
        coeffs = coeffs[:, None]
    return coeffs


def _bivariate(coeffs):
    """``(value, d/dt)`` of ``sum_ij c_ij a^i t^j``."""
    n_i, n_j = coeffs.shape
    di = np.arange(n_i)
    dj = np.arange(n_j)

    def value(a, t):
        return float(np.power(float(a), di) @ coeffs @ np.power(t, dj))

    def d_t(a, t):
        powers = np.array([j * t ** (j - 1) if j else 0.0 for j in dj])
        return float(np.power(float(a), di) @ coeffs @ powers)

    # |d/dt| on [0, 1]^2
    bound = float(np.sum(np.abs(coeffs) * dj[None, :]))
    return value, d_t, bound


# ---------------------------------------------------------------- objectives


@OBJECTIVE_REGISTRY.register()
def linear_product(params):
    """f(x, t) = x t over actions in [-B, B]."""
    bound = float(_get(params, "ACTION_BOUND", 1.0))
    return DecisionProblem(
        objective=lambda x, t: x * t, t_partial=lambda x, t: x, t_partial_bound=bound, name="linear_product"
    )


@OBJECTIVE_REGISTRY.register()
def quadratic_loss(params):
    """f(x, t) = -(x - t)^2 over actions in [0, 1]."""
    return DecisionProblem(
        objective=lambda x, t: -((x - t) ** 2),
        t_partial=lambda x, t: 2.0 * (x - t),
        t_partial_bound=2.0,
        name="quadratic_loss",
    )


@OBJECTIVE_REGISTRY.register()
def square_plus_type(params):
    """f(x, t) = x^2 + t."""
    return DecisionProblem(
        objective=lambda x, t: x * x + t, t_partial=lambda x, t: 1.0, t_partial_bound=1.0, name="square_plus_type"
    )


@OBJECTIVE_REGISTRY.register()
def polynomial(params):
    """f(x, t) = sum_ij COEFFS[i][j] x^i t^j for x in [0, 1]."""
    value, d_t, bound = _bivariate(_poly_coeffs(params, [[0.0, 0.0], [0.0, 1.0]]))
    return DecisionProblem(objective=value, t_partial=d_t, t_partial_bound=bound, name="polynomial")


# ---------------------------------------------------------------- decision rules


@RULE_REGISTRY.register()
def constant(params):
    value = float(_get(params, "VALUE", 0.0))
    return RuleSpec(lambda t: value, True, 0.0)


@RULE_REGISTRY.register()
def identity(params):
    return RuleSpec(lambda t: float(t), True, 1.0)


@RULE_REGISTRY.register()
def step(params):
    """LOW below THRESHOLD, HIGH from THRESHOLD on."""
    threshold = float(_get(params, "THRESHOLD", 0.5))
    low, high = float(_get(params, "LOW", 0.0)), float(_get(params, "HIGH", 1.0))
    return RuleSpec(lambda t: high if t >= threshold else low, False, None)


@RULE_REGISTRY.register()
def positive_indicator(params):
    """1 for t > 0, 0 at t = 0."""
    return RuleSpec(lambda t: 1.0 if t > 0 else 0.0, False, None)


@RULE_REGISTRY.register()
def polynomial_rule(params):
    coeffs = np.array(_get(params, "COEFFS", [0.0, 1.0]), dtype=float)
    slope = float(np.sum(np.abs(coeffs[1:]) * np.arange(1, coeffs.size)))
    return RuleSpec(lambda t: float(np.polyval(coeffs[::-1], t)), True, slope)


# ---------------------------------------------------------------- preferences


@PREFERENCE_REGISTRY.register()
def quasilinear_product(params):
    """f(y, p, t) = y t - p for outcomes y in [-B, B]."""
    bound = float(_get(params, "OUTCOME_BOUND", 1.0))
    return Preference(
        payoff=lambda y, p, t: y * t - p,
        t_partial=lambda y, p, t: y,
        t_partial_bound=bound,
        name="quasilinear_product",
    )


@PREFERENCE_REGISTRY.register()
def power_payment_product(params):
    """f(y, p, t) = y t - p^3."""
    bound = float(_get(params, "OUTCOME_BOUND", 1.0))
    return Preference(
        payoff=lambda y, p, t: y * t - p ** 3,
        t_partial=lambda y, p, t: y,
        t_partial_bound=bound,
        name="power_payment_product",
    )


@PREFERENCE_REGISTRY.register()
def quasilinear_polynomial(params):
    """f(y, p, t) = h(y, t) - p with h(y, t) = sum_ij COEFFS[i][j] y^i t^j."""
    value, d_t, bound = _bivariate(_poly_coeffs(params, [[0.0, 0.0], [0.0, 1.0]]))
    return Preference(
        payoff=lambda y, p, t: value(y, t) - p,
        t_partial=lambda y, p, t: d_t(y, t),
        t_partial_bound=bound,
        name="quasilinear_polynomial",
    )


@PREFERENCE_REGISTRY.register()
def oscillating(params):
    """f(y, p, t) = y sin(F t) - p; not single crossing for F large enough."""
    freq = float(_get(params, "FREQUENCY", 6.0))
    return Preference(
        payoff=lambda y, p, t: y * np.sin(freq * t) - p,
        t_partial=lambda y, p, t: y * freq * np.cos(freq * t),
        t_partial_bound=freq,
        name="oscillating",
    )


def quasilinear_parts(name, params):
    """``(h, h_t)`` of a quasilinear builtin, or None."""
    if name == "quasilinear_product":
        return (lambda y, t: y * t), (lambda y, t: y)
    if name == "quasilinear_polynomial":
        value, d_t, _ = _bivariate(_poly_coeffs(params, [[0.0, 0.0], [0.0, 1.0]]))
        return value, d_t
    return None


# ---------------------------------------------------------------- allocations


@ALLOCATION_REGISTRY.register()
def identity_allocation(params):
    return lambda t: float(t)


@ALLOCATION_REGISTRY.register()
def constant_allocation(params):
    value = float(_get(params, "VALUE", 0.5))
    return lambda t: value


@ALLOCATION_REGISTRY.register()
def reversed_allocation(params):
    """1 - t."""
    return lambda t: 1.0 - float(t)


@ALLOCATION_REGISTRY.register()
def levels(params):
    """
    VALUES[j] on [THRESHOLDS[j-1], THRESHOLDS[j]); defaults to an 8-level
    staircase.
    """
    thresholds = [float(v) for v in _get(params, "THRESHOLDS", [j / 8 for j in range(1, 8)])]
    values = [float(v) for v in _get(params, "VALUES", [j / 7 for j in range(8)])]
    assert len(values) == len(thresholds) + 1, "levels need one more value than thresholds"

    def fn(t):
        return values[int(np.searchsorted(thresholds, t, side="right"))]

    return fn


@ALLOCATION_REGISTRY.register()
def drop(params):
    """t below THRESHOLD, then LOW: a comparable decreasing pair."""
    threshold = float(_get(params, "THRESHOLD", 0.5))
    low = float(_get(params, "LOW", 0.0))
    return lambda t: float(t) if t < threshold else low


@ALLOCATION_REGISTRY.register()
def polynomial_allocation(params):
    coeffs = np.array(_get(params, "COEFFS", [0.0, 1.0]), dtype=float)
    return lambda t: float(np.polyval(coeffs[::-1], t))


# aliases so configs can say "identity" / "constant" for allocations too
ALLOCATION_ALIASES = {"identity": "identity_allocation", "constant": "constant_allocation", "reversed": "reversed_allocation"}


def build_allocation(name, params, n_points) -> Allocation:
    fn = ALLOCATION_REGISTRY.get(ALLOCATION_ALIASES.get(name, name))(params)
    return Allocation.from_callable(fn, n_points, order_cmp=natural_order, name=name)


# ---------------------------------------------------------------- information market


@VALUE_REGISTRY.register()
def scoring_l2(params):
    return scoring_rule_l2()


@PAYMENT_G_REGISTRY.register()
def quasilinear(params):
    return quasilinear_g()


@PAYMENT_G_REGISTRY.register()
def power_payment(params):
    return power_payment_g()


def _insert(alloc, params, n_points):
    if "INSERT" not in params:
        return alloc
    insert = params["INSERT"]
    t = float(insert["T"])
    index = int(round(t * (n_points - 1)))
    alloc[index] = PosteriorDistribution(insert["SUPPORT"], insert["WEIGHTS"])
    return alloc


@INFO_ALLOCATION_REGISTRY.register()
def symmetric_chain(params, mu0, n_points):
    """
    Type t gets a symmetric experiment with accuracy Q0 + Q1 t; optional
    INSERT {T, SUPPORT, WEIGHTS} replaces the experiment at one type.
    """
    q0, q1 = float(_get(params, "Q0", 0.5)), float(_get(params, "Q1", 0.4))
    alloc = [symmetric_experiment(q0 + q1 * t, mu0) for t in np.linspace(0.0, 1.0, n_points)]
    return _insert(alloc, params, n_points)


@INFO_ALLOCATION_REGISTRY.register()
def reversed_chain(params, mu0, n_points):
    """Accuracy Q0 + Q1 (1 - t): information decreasing in type."""
    q0, q1 = float(_get(params, "Q0", 0.5)), float(_get(params, "Q1", 0.4))
    return [symmetric_experiment(q0 + q1 * (1.0 - t), mu0) for t in np.linspace(0.0, 1.0, n_points)]


@INFO_ALLOCATION_REGISTRY.register()
def uninformative(params, mu0, n_points):
    return [point_mass(mu0) for _ in range(n_points)]


@INFO_ALLOCATION_REGISTRY.register()
def explicit(params, mu0, n_points):
    """
    MENU lists ``{support, weights}`` distributions. With one entry per grid
    point each type gets its own; otherwise entry ``j`` of ``K`` serves the
    ``j``-th of ``K`` equal blocks of types, the last block including t = 1.
    """
    menu = list(_get(params, "MENU", []))
    if not menu:
        raise ConfigError(
            "the explicit allocation needs a non-empty MENU", field="INFO_MARKET.ALLOCATION_PARAMS.MENU"
        )
    entries = []
    for j, entry in enumerate(menu):
        try:
            entries.append(PosteriorDistribution.from_dict(dict(entry, mu0=list(mu0))))
        except ArgumentError as e:
            raise ConfigError(f"menu entry {j}: {e}", field="INFO_MARKET.ALLOCATION_PARAMS.MENU") from e
    size = len(entries)
    if size == n_points:
        return entries
    return [entries[min(i * size // (n_points - 1), size - 1)] for i in range(n_points)]
