"""Products of independent Ginibre matrices and their finite-time exponents.

The package simulates Y(t) = X_t ... X_1 for rectangular real, complex,
or quaternionic Gaussian factors, extracts Lyapunov/stability exponents
and eigenvalue phases with controlled numerical error, and evaluates
the closed-form finite-time and asymptotic laws they converge to.
"""

from .ensemble import (
    DimensionProfile,
    DysonIndex,
    GinibreFactor,
    as_dyson,
    sample_factor,
    sample_factor_chain,
    symplectic_defect,
)
from .engine import RunResult, TracePoint, convergence_trace, rep_rng, run_reps
from .errors import (
    AccuracyError,
    CapabilityError,
    DegenerateSampleError,
    DimensionError,
    DomainError,
    GinprodError,
    PrecisionError,
)
from .product import (
    ProductSpec,
    SpectralSample,
    classify_real,
    eigen_exponents,
    resolve_precision,
    scaled_product,
    singular_exponents,
    spectral_sample,
)
from .specfun import (
    LogGammaSumDensity,
    MeijerParams,
    check_moment_identity,
    digamma,
    erfc,
    log_gamma,
    loggamma_sum_density,
    meijer_g,
    polygamma,
    trigamma,
)
from .theory import (
    TheoryPrediction,
    cumulant,
    decoupling_coefficient,
    exponent_joint_density,
    finite_t_marginal,
    gaussian_limit_distance,
    joint_density_exact,
    log_normalization,
    log_weight,
    lyapunov_mean,
    lyapunov_variance,
    ordering_probability,
    pair_coefficient,
    permanental_joint,
    phase_cdf,
    predict,
)

__version__ = "0.1.0"

__all__ = [
    "AccuracyError",
    "CapabilityError",
    "DegenerateSampleError",
    "DimensionError",
    "DimensionProfile",
    "DomainError",
    "DysonIndex",
    "GinibreFactor",
    "GinprodError",
    "LogGammaSumDensity",
    "MeijerParams",
    "PrecisionError",
    "ProductSpec",
    "RunResult",
    "SpectralSample",
    "TheoryPrediction",
    "TracePoint",
    "as_dyson",
    "check_moment_identity",
    "classify_real",
    "convergence_trace",
    "cumulant",
    "decoupling_coefficient",
    "digamma",
    "eigen_exponents",
    "erfc",
    "exponent_joint_density",
    "finite_t_marginal",
    "gaussian_limit_distance",
    "joint_density_exact",
    "log_gamma",
    "log_normalization",
    "log_weight",
    "loggamma_sum_density",
    "lyapunov_mean",
    "lyapunov_variance",
    "meijer_g",
    "ordering_probability",
    "pair_coefficient",
    "permanental_joint",
    "phase_cdf",
    "polygamma",
    "predict",
    "rep_rng",
    "resolve_precision",
    "run_reps",
    "sample_factor",
    "sample_factor_chain",
    "scaled_product",
    "singular_exponents",
    "spectral_sample",
    "symplectic_defect",
    "trigamma",
]
