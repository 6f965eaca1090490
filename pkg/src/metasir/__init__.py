"""SIR meta distribution of uplink machine-type-communication networks with
data aggregation, under random (RRS) and channel-aware (CRS) resource
scheduling: closed-form analytics, semi-analytic order-statistics evaluation,
and Monte Carlo simulation of clustered deployments."""

from ._version import __version__
from .config import DEFAULT_SYSTEM, ExperimentConfig, db_to_linear, load_config, parse_config_text
from .estimator import (
    CondSuccessSample,
    CrsEvalSettings,
    CrsPrecisionError,
    MetaCurve,
    Provenance,
    crs_conditional_success,
    crs_fading_oracle,
    curve_from_success_values,
    empirical_success_probability,
    estimate_meta_curve,
    rrs_conditional_success,
    sample_beta,
    simulate_conditional_success,
)
from .network import (
    Interferer,
    InterferenceModel,
    SystemParams,
    TypicalLinkSample,
    build_typical_link_full,
    build_typical_link_thinned,
    realization_rng,
    sample_offspring_distance,
    sample_parents,
)
from .rrs import (
    MetaQuery,
    RrsAnalyticParams,
    beta_laplace,
    beta_pdf,
    derive_params,
    rrs_max_threshold,
    rrs_meta,
    rrs_success_probability,
)
from .scheduling import (
    ScheduleOutcome,
    Scheme,
    crs_assign,
    occupation_probability,
    order_statistic_cdf,
    rrs_assign,
)
from .specialfn import HalfIntegerOrder, erfc, erfc_inv, log_binomial, upper_incomplete_gamma

__all__ = [
    "__version__",
    "DEFAULT_SYSTEM",
    "ExperimentConfig",
    "db_to_linear",
    "load_config",
    "parse_config_text",
    "CondSuccessSample",
    "CrsEvalSettings",
    "CrsPrecisionError",
    "MetaCurve",
    "Provenance",
    "crs_conditional_success",
    "crs_fading_oracle",
    "curve_from_success_values",
    "empirical_success_probability",
    "estimate_meta_curve",
    "rrs_conditional_success",
    "sample_beta",
    "simulate_conditional_success",
    "Interferer",
    "InterferenceModel",
    "SystemParams",
    "TypicalLinkSample",
    "build_typical_link_full",
    "build_typical_link_thinned",
    "realization_rng",
    "sample_offspring_distance",
    "sample_parents",
    "MetaQuery",
    "RrsAnalyticParams",
    "beta_laplace",
    "beta_pdf",
    "derive_params",
    "rrs_max_threshold",
    "rrs_meta",
    "rrs_success_probability",
    "ScheduleOutcome",
    "Scheme",
    "crs_assign",
    "occupation_probability",
    "order_statistic_cdf",
    "rrs_assign",
    "HalfIntegerOrder",
    "erfc",
    "erfc_inv",
    "log_binomial",
    "upper_incomplete_gamma",
]
