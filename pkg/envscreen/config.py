# -*- coding: utf-8 -*-
import re

import yaml
from fvcore.common.config import CfgNode as CN

from .utils.errors import ConfigError

__all__ = ["get_cfg", "add_envscreen_config", "load_config", "validate_config", "scenario_mode", "SCENARIO_KINDS"]

SCENARIO_KINDS = ("envelope", "synthesis", "screening", "blackwell", "info_market")

_MODES = {
    "envelope": ("main", "necessity", "classical"),
    "synthesis": ("solve",),
    "screening": ("implement", "converse", "search", "single_crossing"),
    "blackwell": ("compare", "sharing", "sanity"),
    "info_market": ("price", "refute"),
}


def scenario_mode(cfg) -> str:
    """The configured mode, or the first mode of the scenario kind."""
    return cfg.SCENARIO.MODE or _MODES[cfg.SCENARIO.KIND][0]


def add_envscreen_config(cfg):
    cfg.SCENARIO = CN()
    cfg.SCENARIO.NAME = ""
    cfg.SCENARIO.KIND = "envelope"
    cfg.SCENARIO.MODE = ""
    cfg.SCENARIO.DESCRIPTION = ""
    # short topic shown by `run_scenarios.py list`
    cfg.SCENARIO.TOPIC = ""
    # the result the scenario exercises, shown next to the topic
    cfg.SCENARIO.ANCHOR = ""
    # expected verdict; an exception class name means the run must raise it
    cfg.SCENARIO.EXPECT = ""

    cfg.GRID = CN()
    cfg.GRID.N_POINTS = 101

    cfg.TOLERANCE = CN()
    # 0.0 selects the calibrated tolerance CALIBRATION * h * bound
    cfg.TOLERANCE.ABS_TOL = 0.0
    cfg.TOLERANCE.REL_TOL = 0.0
    cfg.TOLERANCE.CALIBRATION = 10.0
    # finite-difference step for missing type derivatives
    cfg.TOLERANCE.FD_STEP = 1e-5
    cfg.TOLERANCE.LP_FEASIBILITY = 1e-8
    cfg.TOLERANCE.MERGE = 1e-10

    cfg.ENVELOPE = CN()
    cfg.ENVELOPE.OBJECTIVE = "linear_product"
    cfg.ENVELOPE.OBJECTIVE_PARAMS = CN(new_allowed=True)
    # decision rule, or the maximizer in necessity mode
    cfg.ENVELOPE.RULE = "constant"
    cfg.ENVELOPE.RULE_PARAMS = CN(new_allowed=True)
    cfg.ENVELOPE.LIPSCHITZ = False
    cfg.ENVELOPE.MESH = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
    cfg.ENVELOPE.RICHARDSON = False
    # finite candidate actions for the necessity spot check
    cfg.ENVELOPE.CANDIDATES = []
    # drop the analytic type derivative and use finite differences
    cfg.ENVELOPE.FINITE_DIFFERENCE = False

    cfg.SYNTHESIS = CN()
    cfg.SYNTHESIS.PREFERENCE = "quasilinear_product"
    cfg.SYNTHESIS.PREFERENCE_PARAMS = CN(new_allowed=True)
    cfg.SYNTHESIS.ALLOCATION = "identity"
    cfg.SYNTHESIS.ALLOCATION_PARAMS = CN(new_allowed=True)
    # value of the lowest type, V(0)
    cfg.SYNTHESIS.K = 0.0
    # compare against the closed form when the preference is quasilinear
    cfg.SYNTHESIS.ORACLE = False
    cfg.SYNTHESIS.PROBE_LATTICE = 33

    cfg.SCREENING = CN()
    cfg.SCREENING.PREFERENCE = "quasilinear_product"
    cfg.SCREENING.PREFERENCE_PARAMS = CN(new_allowed=True)
    cfg.SCREENING.ALLOCATION = "identity"
    cfg.SCREENING.ALLOCATION_PARAMS = CN(new_allowed=True)
    cfg.SCREENING.K = 0.0
    # payments for converse mode: "synthesized" or "zero"
    cfg.SCREENING.PAYMENTS = "synthesized"
    cfg.SCREENING.N_PERTURBATIONS = 50
    cfg.SCREENING.PERTURBATION_AMPLITUDE = 0.25
    # pairs [[y, p], [y2, p2]] for single-crossing mode
    cfg.SCREENING.PAIRS = []
    cfg.SCREENING.STRICT = False

    cfg.BLACKWELL = CN()
    cfg.BLACKWELL.MU0 = [0.5, 0.5]
    # each entry: {"support": [...], "weights": [...]} or {"symmetric": q}
    # or {"point_mass": true} or {"full_information": true}
    cfg.BLACKWELL.DISTRIBUTIONS = []
    # indices compared in compare mode
    cfg.BLACKWELL.LEFT = 0
    cfg.BLACKWELL.RIGHT = 1
    cfg.BLACKWELL.N_ORACLE_TESTS = 100

    cfg.INFO_MARKET = CN()
    cfg.INFO_MARKET.MU0 = [0.5, 0.5]
    cfg.INFO_MARKET.VALUE = "scoring_l2"
    cfg.INFO_MARKET.VALUE_PARAMS = CN(new_allowed=True)
    # g(v, p) combining the value of information v with the payment p
    cfg.INFO_MARKET.G = "quasilinear"
    cfg.INFO_MARKET.G_PARAMS = CN(new_allowed=True)
    cfg.INFO_MARKET.ALLOCATION = "symmetric_chain"
    cfg.INFO_MARKET.ALLOCATION_PARAMS = CN(new_allowed=True)
    cfg.INFO_MARKET.K = 0.0
    cfg.INFO_MARKET.N_PERTURBATIONS = 50

    cfg.OUTPUT_DIR = "./output"
    # json, csv or both
    cfg.OUTPUT_FORMAT = "both"
    cfg.SEED = 0


def get_cfg() -> CN:
    """A fresh config with all envscreen defaults."""
    cfg = CN()
    add_envscreen_config(cfg)
    return cfg.clone()


_KEY_PATTERN = re.compile(r"config key:?\s*([A-Za-z0-9_.]+)")


def load_config(path, opts=None, freeze=True) -> CN:
    """
    Merge a scenario file and ``KEY VALUE`` overrides into the defaults.

    Raises:
        ConfigError: the file does not parse, names an unknown key or gives
            a value of the wrong type.
    """
    cfg = get_cfg()
    try:
        cfg.merge_from_file(path)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        raise ConfigError(f"{path}: {e}", line=None if mark is None else mark.line + 1) from e
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e}") from e
    except (KeyError, ValueError, AssertionError) as e:
        match = _KEY_PATTERN.search(str(e))
        raise ConfigError(f"{path}: {e}", field=match.group(1) if match else None) from e
    if opts:
        try:
            cfg.merge_from_list(list(opts))
        except (KeyError, ValueError, AssertionError) as e:
            match = _KEY_PATTERN.search(str(e))
            raise ConfigError(f"override: {e}", field=match.group(1) if match else None) from e
    if freeze:
        cfg.freeze()
    return cfg


def _require(cond, message, field):
    if not cond:
        raise ConfigError(message, field=field)


def validate_config(cfg):
    """
    Check the scenario's kind-specific payload before anything is computed.

    Raises:
        ConfigError: naming the offending field.
    """
    # local import: the registries import this module's siblings
    from .scenarios import builtin

    kind = cfg.SCENARIO.KIND
    _require(kind in SCENARIO_KINDS, f"unknown scenario kind {kind!r}", "SCENARIO.KIND")
    _require(bool(cfg.SCENARIO.NAME), "scenario has no name", "SCENARIO.NAME")
    mode = scenario_mode(cfg)
    _require(mode in _MODES[kind], f"unknown {kind} mode {mode!r}", "SCENARIO.MODE")
    _require(cfg.GRID.N_POINTS >= 3, f"a grid needs at least 3 points, got {cfg.GRID.N_POINTS}", "GRID.N_POINTS")
    _require(cfg.TOLERANCE.ABS_TOL >= 0, "tolerance must be non-negative", "TOLERANCE.ABS_TOL")
    _require(cfg.TOLERANCE.REL_TOL >= 0, "tolerance must be non-negative", "TOLERANCE.REL_TOL")
    _require(cfg.TOLERANCE.CALIBRATION > 0, "calibration constant must be positive", "TOLERANCE.CALIBRATION")
    _require(cfg.TOLERANCE.FD_STEP > 0, "finite-difference step must be positive", "TOLERANCE.FD_STEP")
    _require(
        cfg.OUTPUT_FORMAT in ("json", "csv", "both"),
        f"unknown output format {cfg.OUTPUT_FORMAT!r}",
        "OUTPUT_FORMAT",
    )

    if kind == "envelope":
        _registered(builtin.OBJECTIVE_REGISTRY, cfg.ENVELOPE.OBJECTIVE, "ENVELOPE.OBJECTIVE")
        _registered(builtin.RULE_REGISTRY, cfg.ENVELOPE.RULE, "ENVELOPE.RULE")
        mesh = list(cfg.ENVELOPE.MESH)
        _require(len(mesh) > 0, "mesh is empty", "ENVELOPE.MESH")
        _require(all(0.0 < float(v) < 1.0 for v in mesh), "mesh points must lie in (0, 1)", "ENVELOPE.MESH")
    elif kind in ("synthesis", "screening"):
        node = cfg.SYNTHESIS if kind == "synthesis" else cfg.SCREENING
        prefix = kind.upper()
        _registered(builtin.PREFERENCE_REGISTRY, node.PREFERENCE, f"{prefix}.PREFERENCE")
        _registered(
            builtin.ALLOCATION_REGISTRY,
            builtin.ALLOCATION_ALIASES.get(node.ALLOCATION, node.ALLOCATION),
            f"{prefix}.ALLOCATION",
        )
        if kind == "screening":
            _require(
                node.PAYMENTS in ("synthesized", "zero"),
                f"unknown payments {node.PAYMENTS!r}",
                "SCREENING.PAYMENTS",
            )
            if mode == "single_crossing":
                _require(len(node.PAIRS) > 0, "single-crossing mode needs pairs", "SCREENING.PAIRS")
    elif kind == "blackwell":
        _require(len(cfg.BLACKWELL.DISTRIBUTIONS) > 0, "no distributions given", "BLACKWELL.DISTRIBUTIONS")
        for i, entry in enumerate(cfg.BLACKWELL.DISTRIBUTIONS):
            _require(isinstance(entry, dict), f"entry {i} is not a mapping", "BLACKWELL.DISTRIBUTIONS")
        if mode == "compare":
            n = len(cfg.BLACKWELL.DISTRIBUTIONS)
            for key in ("LEFT", "RIGHT"):
                _require(0 <= cfg.BLACKWELL[key] < n, f"index out of range 0..{n - 1}", f"BLACKWELL.{key}")
    elif kind == "info_market":
        _registered(builtin.VALUE_REGISTRY, cfg.INFO_MARKET.VALUE, "INFO_MARKET.VALUE")
        _registered(builtin.PAYMENT_G_REGISTRY, cfg.INFO_MARKET.G, "INFO_MARKET.G")
        _registered(builtin.INFO_ALLOCATION_REGISTRY, cfg.INFO_MARKET.ALLOCATION, "INFO_MARKET.ALLOCATION")


def _registered(registry, name, field):
    _require(name in registry, f"no builtin named {name!r}", field)
