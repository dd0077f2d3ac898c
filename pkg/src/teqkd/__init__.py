"""Secret key rates for time-entanglement QKD with imperfect detectors.

Analytic models for timing jitter, detector dead time and dark counts,
an event-level Monte Carlo simulator that cross-validates each of them,
and a pipeline that assembles the end-to-end secret key rate.
"""

from . import csvio, darkcounts, downtime, jitter, params, pipeline, simulate
from .params import (
    DerivedParams,
    ParameterError,
    SystemParams,
    binary_entropy,
    bin_occupancy_prob,
    derive_params,
    fwhm_to_sigma,
    sigma_to_fwhm,
    validate_params,
)
from .pipeline import RateReport, assemble_rates, optimize_bins, sweep

__all__ = [
    "csvio",
    "darkcounts",
    "downtime",
    "jitter",
    "params",
    "pipeline",
    "simulate",
    "DerivedParams",
    "ParameterError",
    "SystemParams",
    "binary_entropy",
    "bin_occupancy_prob",
    "derive_params",
    "fwhm_to_sigma",
    "sigma_to_fwhm",
    "validate_params",
    "RateReport",
    "assemble_rates",
    "optimize_bins",
    "sweep",
]

__version__ = "0.1.0"
