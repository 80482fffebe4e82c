from . import builtin
from .builtin import (
    ALLOCATION_REGISTRY,
    INFO_ALLOCATION_REGISTRY,
    OBJECTIVE_REGISTRY,
    PAYMENT_G_REGISTRY,
    PREFERENCE_REGISTRY,
    RULE_REGISTRY,
    VALUE_REGISTRY,
    RuleSpec,
    build_allocation,
    quasilinear_parts,
)
from .build import build_scenario_inputs, build_tolerance
from .catalog import ScenarioCatalog, ScenarioEntry, default_config_root
