"""System configuration, unit conventions and small shared math helpers.

Unit conventions used throughout the package:

* every time quantity is stored in seconds,
* every rate is stored in events per second (Hz),
* every information quantity is reported in bits (logarithms base 2).

Detector downtime appears in two unit systems: the frame-chain analysis
works in whole bins (``downtime_bins``) while the event simulator works in
seconds (``downtime_seconds``).  Both views live on :class:`SystemParams`;
when the seconds view is given explicitly it must agree with
``downtime_bins * bin_width``.

The pump coherence time constrains how large a frame can usefully be, but
it never enters any rate formula, so it is deliberately not a field here.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields

import numpy as np

__all__ = [
    "GAUSS_FWHM_FACTOR",
    "ParameterError",
    "SystemParams",
    "DerivedParams",
    "validate_params",
    "derive_params",
    "fwhm_to_sigma",
    "sigma_to_fwhm",
    "bin_occupancy_prob",
    "binary_entropy",
    "params_to_json",
    "params_from_json",
    "load_params",
    "save_params",
]

# FWHM of a Gaussian = 2 sqrt(2 ln 2) * sigma
GAUSS_FWHM_FACTOR = 2.0 * math.sqrt(2.0 * math.log(2.0))


class ParameterError(ValueError):
    """Invalid system parameters.  ``violations`` lists every failed rule."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class SystemParams:
    """Physical and design configuration of one parameter point.

    lambda_p         photon-pair generation rate, pairs/second
    lambda_dc        dark count rate per detector, counts/second
    frame_width      frame duration in seconds
    bins_per_frame   number of time bins per frame
    sigma_d          per-detector timing jitter standard deviation, seconds
    downtime_bins    detector dead time in whole bins
    downtime_seconds detector dead time in seconds; derived from
                     ``downtime_bins`` when omitted
    """

    lambda_p: float
    frame_width: float
    bins_per_frame: int
    lambda_dc: float = 0.0
    sigma_d: float = 0.0
    downtime_bins: int = 0
    downtime_seconds: float | None = None

    @property
    def bin_width(self) -> float:
        return self.frame_width / self.bins_per_frame

    @property
    def dead_time(self) -> float:
        """Dead time in seconds, whichever view was configured."""
        if self.downtime_seconds is not None:
            return self.downtime_seconds
        return self.downtime_bins * self.bin_width

    @property
    def jitter_ratio(self) -> float:
        return self.sigma_d / self.frame_width


@dataclass(frozen=True)
class DerivedParams:
    """Quantities derived from a validated :class:`SystemParams`."""

    bin_width: float
    p_occupy: float
    jitter_ratio: float


def validate_params(params: SystemParams) -> SystemParams:
    """Return ``params`` unchanged if every invariant holds.

    Raises :class:`ParameterError` carrying *every* violated rule, not just
    the first one found.
    """
    v = []
    if not params.lambda_p > 0:
        v.append(f"lambda_p must be > 0 (got {params.lambda_p!r})")
    if params.lambda_dc < 0:
        v.append(f"lambda_dc must be >= 0 (got {params.lambda_dc!r})")
    if not params.frame_width > 0:
        v.append(f"frame_width must be > 0 (got {params.frame_width!r})")
    if not (isinstance(params.bins_per_frame, (int, np.integer)) and params.bins_per_frame >= 1):
        v.append(f"bins_per_frame must be an integer >= 1 (got {params.bins_per_frame!r})")
    if params.sigma_d < 0:
        v.append(f"sigma_d must be >= 0 (got {params.sigma_d!r})")
    if not (isinstance(params.downtime_bins, (int, np.integer)) and params.downtime_bins >= 0):
        v.append(f"downtime_bins must be an integer >= 0 (got {params.downtime_bins!r})")
    elif isinstance(params.bins_per_frame, (int, np.integer)) and params.bins_per_frame >= 1:
        if params.downtime_bins > params.bins_per_frame:
            v.append(
                "downtime_bins must not exceed bins_per_frame "
                f"(got d={params.downtime_bins}, n={params.bins_per_frame})"
            )
        if params.downtime_seconds is not None:
            if params.downtime_seconds < 0:
                v.append(f"downtime_seconds must be >= 0 (got {params.downtime_seconds!r})")
            elif params.frame_width > 0:
                expect = params.downtime_bins * params.frame_width / params.bins_per_frame
                if abs(params.downtime_seconds - expect) > 1e-9 * params.frame_width:
                    v.append(
                        "downtime_seconds inconsistent with downtime_bins * bin_width "
                        f"(got {params.downtime_seconds!r}, expected {expect!r})"
                    )
    if v:
        raise ParameterError(v)
    return params


def derive_params(params: SystemParams) -> DerivedParams:
    validate_params(params)
    tau_b = params.bin_width
    return DerivedParams(
        bin_width=tau_b,
        p_occupy=bin_occupancy_prob(params.lambda_p, tau_b),
        jitter_ratio=params.jitter_ratio,
    )


def fwhm_to_sigma(fwhm: float) -> float:
    """Convert a Gaussian full width at half maximum to a standard deviation."""
    if fwhm < 0:
        raise ValueError(f"fwhm must be >= 0 (got {fwhm!r})")
    return fwhm / GAUSS_FWHM_FACTOR


def sigma_to_fwhm(sigma: float) -> float:
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0 (got {sigma!r})")
    return sigma * GAUSS_FWHM_FACTOR


def bin_occupancy_prob(lambda_p: float, bin_width: float) -> float:
    """Probability that a bin registers at least one arrival: 1 - exp(-rate * width)."""
    if not lambda_p > 0:
        raise ValueError(f"lambda_p must be > 0 (got {lambda_p!r})")
    if not bin_width > 0:
        raise ValueError(f"bin_width must be > 0 (got {bin_width!r})")
    return -math.expm1(-lambda_p * bin_width)


def binary_entropy(p):
    """Binary entropy in bits, with h(0) = h(1) = 0 by continuity.

    Accepts a scalar or a numpy array of probabilities in [0, 1].
    """
    arr = np.asarray(p, dtype=float)
    if np.any(arr < 0) or np.any(arr > 1):
        raise ValueError("binary_entropy requires probabilities in [0, 1]")
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -np.where(arr > 0, arr * np.log2(np.where(arr > 0, arr, 1.0)), 0.0)
        h -= np.where(arr < 1, (1 - arr) * np.log2(np.where(arr < 1, 1 - arr, 1.0)), 0.0)
    if np.isscalar(p) or arr.ndim == 0:
        return float(h)
    return h


_FIELD_NAMES = tuple(f.name for f in fields(SystemParams))
_REQUIRED = ("lambda_p", "frame_width", "bins_per_frame")


def params_to_json(params: SystemParams) -> str:
    data = {name: getattr(params, name) for name in _FIELD_NAMES}
    return json.dumps(data, indent=2)


def params_from_json(text: str) -> SystemParams:
    """Parse a flat JSON object into validated :class:`SystemParams`.

    Keys are exactly the field names; unknown keys are an error.
    """
    data = json.loads(text)
    if not isinstance(data, dict):
        raise ParameterError(["config must be a JSON object of parameter fields"])
    unknown = sorted(set(data) - set(_FIELD_NAMES))
    if unknown:
        raise ParameterError([f"unknown config key {k!r}" for k in unknown])
    missing = [k for k in _REQUIRED if k not in data]
    if missing:
        raise ParameterError([f"missing required config key {k!r}" for k in missing])
    if "bins_per_frame" in data and isinstance(data["bins_per_frame"], float):
        if data["bins_per_frame"] == int(data["bins_per_frame"]):
            data["bins_per_frame"] = int(data["bins_per_frame"])
    if "downtime_bins" in data and isinstance(data["downtime_bins"], float):
        if data["downtime_bins"] == int(data["downtime_bins"]):
            data["downtime_bins"] = int(data["downtime_bins"])
    return validate_params(SystemParams(**data))


def load_params(path) -> SystemParams:
    with open(path, "r", encoding="utf-8") as fh:
        return params_from_json(fh.read())


def save_params(params: SystemParams, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(params_to_json(params))
        fh.write("\n")
