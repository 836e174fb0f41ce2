"""stitlab: simulation and verification toolkit for planar random tessellations."""

from .distributions import (
    TruncationPolicy,
    cowan_count_pmf,
    cowan_sum_cdf,
    discrete_jump_pmf,
    discrete_waiting_pmf,
    mecke_jump_tail,
    nu_pmf,
    stit_jump_cdf,
    stit_jump_pdf,
    verify_binomial_gamma_identity,
    verify_lagrange_gamma_identity,
    verify_lagrange_identity,
    verify_telescoping_identity,
)
from .errors import (
    ConfigError,
    DegenerateBins,
    DegenerateSplit,
    DomainError,
    GeometryError,
    IllConditioned,
    LCollision,
    SamplerStall,
    StitlabError,
    TooFewSamples,
    TruncationFailure,
)
from .geometry import ConvexPolygon, Line, SplitResult, contains_line_hit, split, width
from .line_measure import (
    DirectionMixture,
    IsotropicMeasure,
    LineMeasureSpec,
    hitting_measure,
    sample_hitting_line,
)
from .processes import (
    LSequence,
    ModelTag,
    ProcessTrace,
    QuasiCellState,
    TraceEvent,
    cowan_el_simulate,
    cowan_jump_count,
    l_sequence,
    mecke_continuous_simulate,
    mecke_discrete_simulate,
    mecke_discrete_step,
    replica_rng,
    stit_simulate,
)
from .stats import (
    EquivalenceConfig,
    VerificationReport,
    chi_square_gof,
    ks_test,
    run_equivalence_suite,
    run_identity_suite,
    two_sample_chi_square,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ConvexPolygon",
    "DegenerateBins",
    "DegenerateSplit",
    "DirectionMixture",
    "DomainError",
    "EquivalenceConfig",
    "GeometryError",
    "IllConditioned",
    "IsotropicMeasure",
    "LCollision",
    "LSequence",
    "Line",
    "LineMeasureSpec",
    "ModelTag",
    "ProcessTrace",
    "QuasiCellState",
    "SamplerStall",
    "SplitResult",
    "StitlabError",
    "TooFewSamples",
    "TraceEvent",
    "TruncationFailure",
    "TruncationPolicy",
    "VerificationReport",
    "chi_square_gof",
    "contains_line_hit",
    "cowan_count_pmf",
    "cowan_el_simulate",
    "cowan_jump_count",
    "cowan_sum_cdf",
    "discrete_jump_pmf",
    "discrete_waiting_pmf",
    "hitting_measure",
    "ks_test",
    "l_sequence",
    "mecke_continuous_simulate",
    "mecke_discrete_simulate",
    "mecke_discrete_step",
    "mecke_jump_tail",
    "nu_pmf",
    "replica_rng",
    "run_equivalence_suite",
    "run_identity_suite",
    "sample_hitting_line",
    "split",
    "stit_jump_cdf",
    "stit_jump_pdf",
    "stit_simulate",
    "two_sample_chi_square",
    "verify_binomial_gamma_identity",
    "verify_lagrange_gamma_identity",
    "verify_lagrange_identity",
    "verify_telescoping_identity",
    "width",
]
