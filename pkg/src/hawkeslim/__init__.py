"""Near-critical two-sided Hawkes price models and their scaling limits.

A simulation library for a price built from mutually exciting streams of
upward and downward unit moves, together with the diffusion (square-root
volatility with leverage) and rough-diffusion limits it converges to over
long horizons, plus the estimators needed to check those limits on
simulated data.
"""

__version__ = "0.1.0"

from hawkeslim.engine import (
    CompensatorSplit,
    EmbeddedBrownians,
    EventStream,
    HeavyIntensity,
    HeavyPrice,
    PowerLawApproximation,
    approximate_power_law,
    compensator_martingale,
    embedded_brownians,
    microscopic_price,
    rescale_heavy,
    rescale_light,
    rescaled_intensity,
    simulate,
)
from hawkeslim.estimators import (
    EstimateWithCI,
    KsResult,
    estimate_record,
    hurst_moment_scaling,
    ks_distance,
    leverage_correlation,
    quadratic_covariation,
    realized_variance,
)
from hawkeslim.experiment import (
    ConfigError,
    EstimatorSettings,
    ExperimentConfig,
    LimitSettings,
    ModelConfig,
    RunManifest,
    Tolerances,
    run_estimate,
    run_limit,
    run_ml_eval,
    run_simulate,
    run_verify,
)
from hawkeslim.grids import PathGrid
from hawkeslim.kernels import (
    AssumptionReport,
    CombinedKernel,
    KernelFunction,
    KernelMatrixSpec,
    ScalingRegime,
    SpectralData,
    build_kernel_matrix,
    eigen_structure,
    exponential_resolvent,
    l1_norm,
    resolvent_matrix,
    scalar_resolvent,
    validate_assumptions,
    wiener_hopf_residual,
)
from hawkeslim.limits import (
    HestonParams,
    HestonPaths,
    RoughCirParams,
    RoughHestonParams,
    RoughHestonPaths,
    generic_rough_cir_params,
    heston_params_from_micro,
    heston_terminal_sample,
    rough_heston_batch,
    rough_params_from_micro,
    simulate_cir,
    simulate_heston,
    simulate_rough_cir,
    simulate_rough_heston,
)
from hawkeslim.specfun import (
    MittagLefflerParams,
    fractional_derivative,
    fractional_integral,
    ml_cdf,
    ml_density,
    ml_laplace_residuals,
    ml_total_mass,
    mittag_leffler,
    simulate_fbm,
)

__all__ = [
    "AssumptionReport",
    "CombinedKernel",
    "CompensatorSplit",
    "ConfigError",
    "EmbeddedBrownians",
    "EstimateWithCI",
    "EstimatorSettings",
    "EventStream",
    "ExperimentConfig",
    "HeavyIntensity",
    "HeavyPrice",
    "HestonParams",
    "HestonPaths",
    "KernelFunction",
    "KernelMatrixSpec",
    "KsResult",
    "LimitSettings",
    "MittagLefflerParams",
    "ModelConfig",
    "PathGrid",
    "PowerLawApproximation",
    "RoughCirParams",
    "RoughHestonParams",
    "RoughHestonPaths",
    "RunManifest",
    "ScalingRegime",
    "SpectralData",
    "Tolerances",
    "approximate_power_law",
    "build_kernel_matrix",
    "compensator_martingale",
    "eigen_structure",
    "embedded_brownians",
    "estimate_record",
    "exponential_resolvent",
    "fractional_derivative",
    "fractional_integral",
    "generic_rough_cir_params",
    "heston_params_from_micro",
    "heston_terminal_sample",
    "hurst_moment_scaling",
    "ks_distance",
    "l1_norm",
    "leverage_correlation",
    "microscopic_price",
    "mittag_leffler",
    "ml_cdf",
    "ml_density",
    "ml_laplace_residuals",
    "ml_total_mass",
    "quadratic_covariation",
    "realized_variance",
    "rescale_heavy",
    "rescale_light",
    "rescaled_intensity",
    "resolvent_matrix",
    "rough_heston_batch",
    "rough_params_from_micro",
    "run_estimate",
    "run_limit",
    "run_ml_eval",
    "run_simulate",
    "run_verify",
    "scalar_resolvent",
    "simulate",
    "simulate_cir",
    "simulate_fbm",
    "simulate_heston",
    "simulate_rough_cir",
    "simulate_rough_heston",
    "validate_assumptions",
    "wiener_hopf_residual",
]
