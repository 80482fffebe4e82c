"""
Turn a frozen scenario config into the objects the evaluators consume.
"""
import dataclasses
import logging
from collections import OrderedDict

from ..envelope import DecisionRule
from ..grid import Tolerance
from ..information import (
    InfoPreference,
    PosteriorDistribution,
    full_information,
    point_mass,
    symmetric_experiment,
)
from ..config import scenario_mode
from ..utils.errors import ConfigError
from . import builtin

__all__ = [
    "build_tolerance",
    "build_decision_problem",
    "build_decision_rule",
    "build_preference",
    "build_distribution",
    "build_distributions",
    "build_info_preference_from_cfg",
    "build_info_allocation",
    "build_scenario_inputs",
]

logger = logging.getLogger(__name__)


def build_tolerance(cfg):
    """The configured tolerance, or None when both parts are 0 (calibrate later)."""
    abs_tol, rel_tol = float(cfg.TOLERANCE.ABS_TOL), float(cfg.TOLERANCE.REL_TOL)
    if abs_tol == 0.0 and rel_tol == 0.0:
        return None
    return Tolerance(abs_tol=abs_tol, rel_tol=rel_tol)


def build_decision_problem(cfg):
    p = builtin.OBJECTIVE_REGISTRY.get(cfg.ENVELOPE.OBJECTIVE)(cfg.ENVELOPE.OBJECTIVE_PARAMS)
    if cfg.ENVELOPE.FINITE_DIFFERENCE:
        p = dataclasses.replace(p, t_partial=None, fd_step=float(cfg.TOLERANCE.FD_STEP))
    return p


def build_decision_rule(cfg, rule=None):
    if rule is None:
        rule = builtin.RULE_REGISTRY.get(cfg.ENVELOPE.RULE)(cfg.ENVELOPE.RULE_PARAMS)
    lipschitz = bool(cfg.ENVELOPE.LIPSCHITZ) or rule.lipschitz
    return DecisionRule.from_callable(
        rule.fn,
        cfg.GRID.N_POINTS,
        lipschitz=lipschitz,
        lipschitz_constant=rule.lipschitz_constant if lipschitz else None,
        name=cfg.ENVELOPE.RULE,
    )


def build_preference(node):
    return builtin.PREFERENCE_REGISTRY.get(node.PREFERENCE)(node.PREFERENCE_PARAMS)


def build_distribution(entry, mu0, merge_tol, index=0) -> PosteriorDistribution:
    """
    One ``BLACKWELL.DISTRIBUTIONS`` entry: ``{"support", "weights"}``,
    ``{"symmetric": q}``, ``{"point_mass": true}`` or ``{"full_information": true}``.
    """
    if "support" in entry:
        if "weights" not in entry:
            raise ConfigError(f"distribution {index} has a support but no weights", field="BLACKWELL.DISTRIBUTIONS")
        return PosteriorDistribution(entry["support"], entry["weights"], merge_tol=merge_tol)
    if "symmetric" in entry:
        return symmetric_experiment(float(entry["symmetric"]), mu0)
    if entry.get("point_mass"):
        return point_mass(mu0)
    if entry.get("full_information"):
        return full_information(mu0)
    raise ConfigError(
        f"distribution {index} has none of support/symmetric/point_mass/full_information",
        field="BLACKWELL.DISTRIBUTIONS",
    )


def build_distributions(cfg):
    mu0 = list(cfg.BLACKWELL.MU0)
    merge_tol = float(cfg.TOLERANCE.MERGE)
    return [build_distribution(entry, mu0, merge_tol, i) for i, entry in enumerate(cfg.BLACKWELL.DISTRIBUTIONS)]


def build_info_preference_from_cfg(cfg) -> InfoPreference:
    node = cfg.INFO_MARKET
    voi = builtin.VALUE_REGISTRY.get(node.VALUE)(node.VALUE_PARAMS)
    g, g_v, bound = builtin.PAYMENT_G_REGISTRY.get(node.G)(node.G_PARAMS)
    return InfoPreference(g=g, g_v_partial=g_v, g_v_partial_bound=bound, voi=voi, name=f"{node.VALUE}/{node.G}")


def build_info_allocation(cfg):
    node = cfg.INFO_MARKET
    builder = builtin.INFO_ALLOCATION_REGISTRY.get(node.ALLOCATION)
    return builder(node.ALLOCATION_PARAMS, list(node.MU0), cfg.GRID.N_POINTS)


def build_scenario_inputs(cfg) -> "OrderedDict[str, object]":
    """
    Everything the scenario's evaluator needs, keyed by role. Builders run
    here so config problems surface before any checking starts.
    """
    kind = cfg.SCENARIO.KIND
    inputs = OrderedDict(kind=kind, mode=scenario_mode(cfg), tol=build_tolerance(cfg))
    n = cfg.GRID.N_POINTS

    if kind == "envelope":
        inputs["problem"] = build_decision_problem(cfg)
        rule = builtin.RULE_REGISTRY.get(cfg.ENVELOPE.RULE)(cfg.ENVELOPE.RULE_PARAMS)
        inputs["maximizer"] = rule.fn
        inputs["rule"] = build_decision_rule(cfg, rule)
        inputs["mesh"] = tuple(float(v) for v in cfg.ENVELOPE.MESH)
        inputs["candidates"] = list(cfg.ENVELOPE.CANDIDATES) or None
    elif kind in ("synthesis", "screening"):
        node = cfg.SYNTHESIS if kind == "synthesis" else cfg.SCREENING
        inputs["preference"] = build_preference(node)
        inputs["allocation"] = builtin.build_allocation(node.ALLOCATION, node.ALLOCATION_PARAMS, n)
        inputs["k"] = float(node.K)
        if kind == "synthesis" and cfg.SYNTHESIS.ORACLE:
            inputs["oracle"] = builtin.quasilinear_parts(node.PREFERENCE, node.PREFERENCE_PARAMS)
            if inputs["oracle"] is None:
                logger.warning(f"{node.PREFERENCE} has no closed-form payments, skipping the oracle")
        if kind == "screening":
            inputs["pairs"] = [tuple((pair[0], float(pair[1])) for pair in entry) for entry in node.PAIRS]
    elif kind == "blackwell":
        inputs["mu0"] = list(cfg.BLACKWELL.MU0)
        inputs["distributions"] = build_distributions(cfg)
    elif kind == "info_market":
        inputs["info_preference"] = build_info_preference_from_cfg(cfg)
        inputs["allocation"] = build_info_allocation(cfg)
        inputs["k"] = float(cfg.INFO_MARKET.K)
    return inputs
