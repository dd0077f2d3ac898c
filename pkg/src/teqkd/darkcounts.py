"""Dark-count impact on PPM frame retention and on the observed jitter.

Dark counts hurt twice.  A dark count landing in a frame that already
holds a photon invalidates the frame (a type-one error, the frame's bits
are lost).  Coincident dark counts at both stations fabricate a frame
that looks valid but carries uncorrelated arrivals (a type-two error);
those frames cannot be told apart from real ones, so reconciling them
leaks extra information.

Both effects follow from Poisson frame statistics.  The type-two frames
are folded into the channel model by replacing the double-jitter Gaussian
with a mixture: with weight c the offset is genuine detector jitter, with
weight 1-c it is the difference of two independent uniform positions,
which is triangular over one frame width either side of zero.

This analysis assumes no dead time; downtime and dark counts are treated
as separate impairments and composed at the rate-pipeline level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .csvio import render_csv
from .jitter import IntegerPmf
from .jitter import transition_pmf as _jitter_transition_pmf

__all__ = [
    "DarkCountScenario",
    "MixturePdf",
    "frame_event_probs",
    "ppm_valid_prob",
    "spdc_weight",
    "observed_jitter_pdf",
    "dc_transition_pmf",
    "reconciled_rate_time",
    "sweep_rows",
    "sweep_csv",
    "SWEEP_HEADER",
]

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class DarkCountScenario:
    """One dark-count analysis point: rates, frame geometry and jitter."""

    lambda_p: float
    lambda_dc: float
    frame_width: float
    bins_per_frame: int
    sigma_d: float = 0.0

    def __post_init__(self):
        if not self.lambda_p > 0:
            raise ValueError("lambda_p must be > 0")
        if self.lambda_dc < 0:
            raise ValueError("lambda_dc must be >= 0")
        if not self.frame_width > 0:
            raise ValueError("frame_width must be > 0")
        if self.bins_per_frame < 1:
            raise ValueError("bins_per_frame must be >= 1")
        if self.sigma_d < 0:
            raise ValueError("sigma_d must be >= 0")

    @property
    def bin_width(self) -> float:
        return self.frame_width / self.bins_per_frame


def frame_event_probs(rate: float, frame_width: float):
    """Poisson probabilities of exactly one and exactly zero events per frame."""
    if rate < 0:
        raise ValueError("rate must be >= 0")
    if not frame_width > 0:
        raise ValueError("frame_width must be > 0")
    mu = rate * frame_width
    p0 = math.exp(-mu)
    return mu * p0, p0


def ppm_valid_prob(scenario: DarkCountScenario) -> float:
    """Probability that both stations retain a frame.

    Either one pair arrives and neither detector adds a dark count, or no
    pair arrives and each detector registers exactly one dark count.  The
    dark-count factors are squared because the stations dark-count
    independently; a single pair event supplies both photons at once.
    """
    p_s1, p_s0 = frame_event_probs(scenario.lambda_p, scenario.frame_width)
    p_d1, p_d0 = frame_event_probs(scenario.lambda_dc, scenario.frame_width)
    return p_s1 * p_d0**2 + p_s0 * p_d1**2


def spdc_weight(scenario: DarkCountScenario) -> float:
    """Fraction of retained frames whose arrivals are a genuine pair."""
    p_s1, p_s0 = frame_event_probs(scenario.lambda_p, scenario.frame_width)
    p_d1, p_d0 = frame_event_probs(scenario.lambda_dc, scenario.frame_width)
    genuine = p_s1 * p_d0**2
    total = genuine + p_s0 * p_d1**2
    if total == 0:
        raise ValueError("no frame is ever retained at these rates; weight undefined")
    return genuine / total


@dataclass(frozen=True)
class MixturePdf:
    """Observed jitter density: Gaussian with weight c, triangular with 1-c.

    The Gaussian carries variance 2 sigma_d^2 (difference of two detector
    jitters); the triangle is the difference of two uniform positions in
    one frame, peaking at zero and vanishing at +-frame_width.
    """

    weight_spdc: float
    sigma_sum: float
    half_width: float

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.sigma_sum > 0:
            gauss = np.exp(-0.5 * (t / self.sigma_sum) ** 2) / (self.sigma_sum * math.sqrt(2 * math.pi))
        else:
            gauss = np.where(t == 0.0, np.inf, 0.0)
        tri = np.maximum(0.0, 1.0 / self.half_width - np.abs(t) / self.half_width**2)
        out = self.weight_spdc * gauss + (1.0 - self.weight_spdc) * tri
        return float(out) if out.ndim == 0 else out

    def tail_mass_beyond(self, x0: float) -> float:
        """Probability of |offset| > x0, in closed form."""
        if x0 < 0:
            raise ValueError("x0 must be >= 0")
        if self.sigma_sum > 0:
            gauss_tail = math.erfc(x0 / (self.sigma_sum * _SQRT2))
        else:
            gauss_tail = 0.0
        frac = min(1.0, x0 / self.half_width)
        tri_tail = (1.0 - frac) ** 2
        return self.weight_spdc * gauss_tail + (1.0 - self.weight_spdc) * tri_tail


def observed_jitter_pdf(scenario: DarkCountScenario) -> MixturePdf:
    return MixturePdf(
        weight_spdc=spdc_weight(scenario),
        sigma_sum=_SQRT2 * scenario.sigma_d,
        half_width=scenario.frame_width,
    )


def _triangle_bin_pmf(n: int) -> IntegerPmf:
    """Triangle over [-T, T] integrated over the n bins per frame width.

    Exact closed form from the antiderivative x/T - x|x|/(2 T^2), computed
    for non-negative offsets and mirrored.  Offsets run to +-n because the
    support spans a full frame either side.
    """

    def cdf_from_zero(x):
        # integral of the triangle density from 0 to x, for |x| <= T, T = 1
        x = max(-1.0, min(1.0, x))
        return x - x * abs(x) / 2.0

    tau = 1.0 / n
    probs_pos = []
    for k in range(0, n + 1):
        lo = (k - 0.5) * tau
        hi = (k + 0.5) * tau
        probs_pos.append(cdf_from_zero(hi) - cdf_from_zero(max(0.0, lo) if k == 0 else lo))
    center = 2.0 * probs_pos[0]  # bin 0 straddles zero symmetrically
    positive = np.array(probs_pos[1:])
    probs = np.concatenate([positive[::-1], [center], positive])
    offsets = np.arange(-n, n + 1)
    return IntegerPmf(offsets, probs, 0.0)


def dc_transition_pmf(scenario: DarkCountScenario) -> IntegerPmf:
    """Bin-offset PMF under the Gaussian/triangle mixture.

    The Gaussian part is built with the error function exactly as the pure
    jitter channel builds its transition PMF; the triangular part has an
    exact closed form.  With no dark counts this is the pure jitter
    transition PMF, identically.
    """
    n = scenario.bins_per_frame
    sigma_ratio = scenario.sigma_d / scenario.frame_width
    gauss = _jitter_transition_pmf(n, sigma_ratio)
    if scenario.lambda_dc == 0:
        return gauss
    c = spdc_weight(scenario)
    tri = _triangle_bin_pmf(n)
    bound = max(gauss.truncation_bound, tri.truncation_bound)
    probs = np.zeros(2 * bound + 1)
    gb = gauss.truncation_bound
    probs[bound - gb : bound + gb + 1] += c * gauss.probs
    tb = tri.truncation_bound
    probs[bound - tb : bound + tb + 1] += (1.0 - c) * tri.probs
    offsets = np.arange(-bound, bound + 1)
    return IntegerPmf(offsets, probs, c * gauss.tail_mass)


def reconciled_rate_time(scenario: DarkCountScenario) -> float:
    """Post-reconciliation key rate in bits per second.

    Valid frames arrive at rate p_valid / frame_width and each one yields
    at most log2(n) minus the mixture conditional entropy; heavy mixtures
    can drive that difference negative, in which case the rate floors at
    zero.
    """
    n = scenario.bins_per_frame
    per_frame = max(0.0, math.log2(n) - dc_transition_pmf(scenario).entropy_bits())
    return ppm_valid_prob(scenario) / scenario.frame_width * per_frame


SWEEP_HEADER = ("dc_ratio", "frame_width_s", "p_ppm", "c_weight", "reconciled_bits_per_s")


def sweep_rows(base: DarkCountScenario, dc_ratios):
    rows = []
    for ratio in dc_ratios:
        sc = DarkCountScenario(
            lambda_p=base.lambda_p,
            lambda_dc=ratio * base.lambda_p,
            frame_width=base.frame_width,
            bins_per_frame=base.bins_per_frame,
            sigma_d=base.sigma_d,
        )
        rows.append(
            (
                float(ratio),
                float(sc.frame_width),
                ppm_valid_prob(sc),
                spdc_weight(sc),
                reconciled_rate_time(sc),
            )
        )
    return rows


def sweep_csv(base: DarkCountScenario, dc_ratios) -> str:
    return render_csv(SWEEP_HEADER, sweep_rows(base, dc_ratios))
