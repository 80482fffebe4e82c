from .simplex import PhaseOneResult, phase_one
from .blackwell import (
    Belief,
    GarblingCertificate,
    OrderSanityReport,
    PosteriorDistribution,
    SharingProofResult,
    bayes_plausible,
    blackwell_leq,
    certificate_residuals,
    convex_oracle_leq,
    full_information,
    mixture,
    order_sanity_suite,
    point_mass,
    posteriors_from_signal,
    sharing_proof,
    signal_from_posteriors,
    symmetric_experiment,
)
from .market import (
    InfoPreference,
    MenuPricing,
    PosteriorCatalog,
    RefutationReport,
    ValueOfInformation,
    blackwell_order,
    build_info_preference,
    expected_value,
    power_payment_g,
    price_information_menu,
    probe_convexity,
    quasilinear_g,
    refute_decreasing_allocation,
    scoring_rule_l2,
)
