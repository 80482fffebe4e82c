from .problem import DecisionProblem, DecisionRule, central_difference
from .residuals import (
    MimicPayoffs,
    OuterFOCEstimate,
    value_function,
    partial_path,
    envelope_residual,
    outer_foc_estimates,
    outer_foc_residual,
    outer_foc_richardson,
    classical_foc_residual,
    identity_residual,
    housekeeping_residual,
    differentiation_identity_residual,
)
from .theorem import (
    DEFAULT_MESH,
    ClassicalReport,
    EnvelopeReport,
    Verdict,
    calibrated_tolerance,
    check_classical_theorem,
    check_main_theorem,
    check_necessity,
    usable_mesh,
)
