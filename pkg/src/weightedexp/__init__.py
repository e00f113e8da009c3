"""Closed-form estimation for the weighted exponential family with power generators."""

__version__ = "0.1.0"

from .bootstrap import BiasReducedEstimate, BootstrapConfig, bootstrap_bias_reduce
from .estimator import HStatistics, WeightedExpFamily
from .estimators import (
    EstimateReport,
    SampleHStats,
    asymptotic_covariance,
    estimate,
    g1,
    g2,
    log_likelihood,
    mle_numeric,
    point_estimate,
    summary_stats,
)
from .exceptions import (
    BootstrapDegenerate,
    DomainError,
    EmptySample,
    EstimationFailed,
    MomentUndefined,
    NamedMismatch,
    NonPositiveData,
    OptimizationFailed,
    UnknownModel,
    WeightedExpError,
)
from .family import (
    NAMED_MODELS,
    FamilySpec,
    NamedModel,
    Params,
    component_density,
    density,
    from_named,
    log_density,
    mixture_weights,
    named_spec,
    to_named,
)
from .moments import HVector, digamma, moment, neg_power_log_moment, population_h, weighted_log_moment
from .sampling import SeededStream, sample, sample_gamma
from .simulation import MetricRow, Scenario, run_monte_carlo
