"""Bi-fractional Brownian motion in the critical regime 2HK = 1.

Exact Gaussian sampling, finite-epsilon pathwise estimators (quadratic
covariation, forward/backward/Skorohod integrals, local time) and residuals
of the Ito, Tanaka and Bouleau-Yor identities.
"""

from ._bifbm import (
    ConfigError,
    DomainError,
    EstimateReport,
    FactorizationError,
    IoError,
    LocalTimeField,
    ModelParams,
    PathBatch,
    StepFunction,
    TimeGrid,
    backward_integral,
    bouleau_yor_residual,
    canonical_config,
    covariance,
    elementary_inequality_check,
    forward_integral,
    heat_kernel,
    hnorm,
    increment_covariance,
    integral_wrt_localtime,
    ito_residual,
    lemma_scan,
    local_time,
    moments,
    mollifier_constant,
    mollifier_gap,
    mollify,
    occupation_check,
    quadratic_covariation,
    quadratic_variation,
    run_experiment,
    sample_paths,
    skorohod_integral,
    smooth_reference,
    tanaka_residual,
)

__all__ = [name for name in dir() if not name.startswith("_")]
