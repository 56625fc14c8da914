"""Clipped variable bandwidth kernel density estimation.

Estimators, kernel moments, asymptotic constants and Monte Carlo experiments
for the square-root-law estimator with a smooth bandwidth clip, together with
the classical, Abramson, Hall-Marron and windowed variants.
"""

from .asymptotics import (
    EvaluationRegion,
    bias_constant,
    confidence_interval,
    ideal_variance_coeffs,
    imse,
    optimal_bandwidth,
    rate_diagnostic_U,
    sigma_t2,
)
from .clipping import ClippingSpec, alpha, auto_clip_constant, make_clipping
from .densities import DensityModel, get_model
from .errors import DataError, DomainError, KernelRegularityWarning, VKDEError
from .estimators import (
    BandwidthPair,
    DensityEstimate,
    Sample,
    abramson,
    auto_bandwidths,
    classical_kde,
    hall_marron,
    hhm,
    ideal_vkde,
    plugin_vkde,
    silverman_bandwidth,
)
from .kernels import Kernel, KernelMoments, compute_moments, get_kernel
from .simlab import ExperimentConfig, ExperimentResult, run_experiment

__all__ = [
    "BandwidthPair", "ClippingSpec", "DataError", "DensityEstimate", "DensityModel", "DomainError",
    "EvaluationRegion", "ExperimentConfig", "ExperimentResult", "Kernel", "KernelMoments",
    "KernelRegularityWarning", "Sample", "VKDEError", "abramson", "alpha", "auto_bandwidths",
    "auto_clip_constant", "bias_constant", "classical_kde", "compute_moments", "confidence_interval",
    "get_kernel", "get_model", "hall_marron", "hhm", "ideal_variance_coeffs", "ideal_vkde", "imse",
    "make_clipping", "optimal_bandwidth", "plugin_vkde", "rate_diagnostic_U", "run_experiment",
    "sigma_t2", "silverman_bandwidth",
]
