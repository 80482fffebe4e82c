from .preference import Allocation, Order, Preference, natural_order
from .synthesis import (
    SynthesisResult,
    invert_in_payment,
    probe_preference,
    quasilinear_payments,
    run_synthesis,
    synthesize_payments,
    verify_envelope_consistency,
)
from .screening import (
    ConverseReport,
    ICReport,
    Mechanism,
    MonotonicityCheck,
    PaymentSearchReport,
    SingleCrossingReport,
    converse_check,
    ic_report,
    ic_tolerance,
    implement_increasing,
    is_nondecreasing,
    outer_spence_mirrlees_check,
    search_ic_payments,
    single_crossing_differences_check,
    step_payment_search,
)
