"""Orthogonal series density estimation for complex survey samples."""

__version__ = "0.1.0"

from .basis import DomainError, ScalingTransform, fit_scaling, phi
from .design import (
    SRSWOR,
    Poisson,
    StratifiedOversample,
    StratifiedProportional,
    SystematicPPS,
    WeightedSample,
    delta,
    draw_sample,
    first_order_pi,
    oversample_pi,
)
from .estimator import (
    DensityEstimate,
    FourierCoefficients,
    ValidDensity,
    b_hat,
    combined_variance,
    design_variance_hat,
    evaluate,
    ht_coefficients,
    iid_baseline_estimator,
    oracle_estimator,
    project_to_density,
    select_J,
    smoothed_estimator,
    truncated_estimator,
)
from .superpop import Superpopulation, sample_population, true_density_on_unit

__all__ = [
    "DomainError", "ScalingTransform", "fit_scaling", "phi",
    "SRSWOR", "Poisson", "StratifiedOversample", "StratifiedProportional",
    "SystematicPPS", "WeightedSample", "delta", "draw_sample", "first_order_pi",
    "oversample_pi",
    "DensityEstimate", "FourierCoefficients", "ValidDensity", "b_hat",
    "combined_variance", "design_variance_hat", "evaluate", "ht_coefficients",
    "iid_baseline_estimator", "oracle_estimator", "project_to_density",
    "select_J", "smoothed_estimator", "truncated_estimator",
    "Superpopulation", "sample_population", "true_density_on_unit",
]
