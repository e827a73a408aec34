"""Muntz systems on a sector: exponent sequences, canonical products, biorthogonal functionals."""

from .errors import (
    DomainViolation,
    EmptyGrid,
    HorizonExceeded,
    HorizonTooSmall,
    IllConditioned,
    InsufficientSamples,
    KernelOverflow,
    MuntzError,
    NonConvergent,
    NonPositiveGap,
    PoleError,
    PreconditionViolation,
    SieveViolation,
    TruncationInsufficient,
)
from .fuchs import (
    FuchsReport,
    GrowthProfile,
    Kernel,
    SieveRegion,
    TruncatedProduct,
    certify_fuchs_bounds,
    evaluate_G,
    evaluate_g,
    evaluate_g0,
    evaluate_psi_k,
    g0_derivative_at_exponent,
    g0_kernel,
    g_kernel,
    growth_profile,
    psi_kernel,
    sieve_membership,
    suggest_A,
)
from .functionals import (
    BoundarySamples,
    DivergenceRiskWarning,
    MuntzExpansion,
    OperatorTable,
    WitnessReport,
    biorthogonal_target,
    build_operator_table,
    default_g_kernel,
    functional_T,
    functional_T_k_delta,
    half_line_transform,
    incompleteness_witness,
    least_squares_residual,
    monomial,
    reconstruct,
    reconstruct_with_bound,
    recover_coefficients,
    representation_crosscheck,
)
from .sequences import (
    Density,
    ExponentSequence,
    StepAccumulator,
    StepTable,
    arithmetic,
    arithmetic_progression,
    characteristic_logarithm,
    check_condition3,
    counting_function,
    from_values,
    gap,
    log_asymptote,
    muntz_density_test,
    parse_sequence,
    power,
)
from .special import digamma, epsilon3, gamma, gamma_asymptotic_residual, log_gamma, malliavin_psi, psi_root
from .surgery import (
    AdjustmentResult,
    ComparisonFunction,
    SurgeryResult,
    adjust_double_points,
    build_lambda_star,
    comparison_phi,
    lambda_star_pipeline,
    minimal_epsilon,
)
from .transforms import FunctionalResult, QuadratureSpec

__version__ = "0.1.0"
