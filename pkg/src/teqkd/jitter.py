"""Discrete memoryless channel induced by detector timing jitter.

Alice and Bob bin the same arrival into integer bin indices; independent
Gaussian jitter at each station turns the shared index into two noisy
observations.  With n bins per frame and per-detector jitter sigma_d, the
single-detector bin offset follows the Gaussian integrated over bin-wide
intervals, and what Bob sees relative to Alice follows the same
construction with twice the variance (the difference of two independent
jitters).

All probabilities here are computed with the Gaussian error function, so
they are exact to machine precision; no quadrature is involved.  PMFs are
truncated at ten standard deviations (plus two bins of slack) and the
discarded tail mass is reported rather than renormalized away.

The channel is treated as translation invariant: offsets that would fall
outside the frame are kept on the integer line instead of being folded
back, which preserves the exact identity

    mutual information = log2(n) - conditional entropy.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import erf

from .csvio import render_csv

__all__ = [
    "IntegerPmf",
    "JitterChannel",
    "offset_pmf",
    "transition_pmf",
    "rod",
    "conditional_entropy",
    "mutual_information",
    "UltimateRate",
    "ultimate_rate",
    "heuristic_bin_count",
    "build_channel",
    "sweep_rows",
    "sweep_csv",
    "SWEEP_HEADER",
]

# Tail kept beyond +-10 sigma is below 1e-22; report it, never hide it.
TRUNCATION_SIGMAS = 10.0
_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class IntegerPmf:
    """A symmetric PMF over the integer offsets -bound..+bound.

    ``probs[i]`` is the probability of offset ``offsets[i]``; ``tail_mass``
    is the probability excluded by truncation (reported, not folded in).
    """

    offsets: np.ndarray
    probs: np.ndarray
    tail_mass: float

    @property
    def truncation_bound(self) -> int:
        return int(self.offsets[-1])

    def prob(self, k: int) -> float:
        b = self.truncation_bound
        if -b <= k <= b:
            return float(self.probs[k + b])
        return 0.0

    def as_dict(self) -> dict:
        return {int(k): float(p) for k, p in zip(self.offsets, self.probs)}

    def total(self) -> float:
        return float(self.probs.sum())

    def variance(self) -> float:
        """Second moment about zero, in squared bin widths."""
        return float((self.probs * self.offsets.astype(float) ** 2).sum())

    def entropy_bits(self) -> float:
        p = self.probs[self.probs > 0]
        return float(-(p * np.log2(p)).sum()) + 0.0  # normalize -0.0


def _gaussian_bin_pmf(sigma_bins: float) -> IntegerPmf:
    """Gaussian with std ``sigma_bins`` integrated over unit bins around integers.

    Computed for k >= 0 and mirrored, so symmetry is exact by construction.
    """
    if sigma_bins < 0:
        raise ValueError("sigma must be >= 0")
    if sigma_bins == 0:
        return IntegerPmf(np.array([0]), np.array([1.0]), 0.0)
    bound = int(math.ceil(TRUNCATION_SIGMAS * sigma_bins)) + 2
    k = np.arange(1, bound + 1, dtype=float)
    scale = sigma_bins * _SQRT2
    upper = erf((k + 0.5) / scale)
    lower = erf((k - 0.5) / scale)
    positive = 0.5 * (upper - lower)
    center = erf(0.5 / scale)
    probs = np.concatenate([positive[::-1], [center], positive])
    offsets = np.arange(-bound, bound + 1)
    tail = 1.0 - float(probs.sum())
    return IntegerPmf(offsets, probs, tail)


def offset_pmf(n: int, sigma_ratio: float) -> IntegerPmf:
    """Single-detector bin-offset PMF for n bins and jitter ratio sigma_d/T_f."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if sigma_ratio < 0:
        raise ValueError("sigma_ratio must be >= 0")
    return _gaussian_bin_pmf(n * sigma_ratio)


def _self_convolution(pmf: IntegerPmf) -> IntegerPmf:
    probs = np.convolve(pmf.probs, pmf.probs)
    probs = 0.5 * (probs + probs[::-1])  # keep symmetry exact in floats
    bound = 2 * pmf.truncation_bound
    offsets = np.arange(-bound, bound + 1)
    tail = 1.0 - float(probs.sum())
    return IntegerPmf(offsets, probs, tail)


def transition_pmf(n: int, sigma_ratio: float) -> IntegerPmf:
    """Bob-given-Alice offset PMF: the difference of the two stations' offsets.

    Both stations bin the same arrival with independent jitters, so what
    Bob sees relative to Alice is the difference of two i.i.d. binned
    offsets; its PMF is the discrete self-convolution of the offset PMF
    (the double-jitter Gaussian with variance 2 sigma_d^2, carried through
    the binning).  This keeps rod = 1 - transition_pmf(0) up to rounding.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if sigma_ratio < 0:
        raise ValueError("sigma_ratio must be >= 0")
    return _self_convolution(_gaussian_bin_pmf(n * sigma_ratio))


def rod(n: int, sigma_ratio: float) -> float:
    """Rate of disagreement between the stations' symbols.

    One minus the collision probability of two i.i.d. single-detector
    offsets: 1 - sum_k P[k]^2.
    """
    pmf = offset_pmf(n, sigma_ratio)
    return 1.0 - float((pmf.probs * pmf.probs).sum())


def conditional_entropy(n: int, sigma_ratio: float) -> float:
    """Entropy in bits of Bob's bin given Alice's, independent of the bin."""
    return transition_pmf(n, sigma_ratio).entropy_bits()


def mutual_information(n: int, sigma_ratio: float) -> float:
    """Bits per retained frame shared by the stations: log2(n) - H(Y|x).

    Clamped at zero (with a warning) if the translation-invariant
    approximation drives the difference negative under very heavy noise.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    value = math.log2(n) - conditional_entropy(n, sigma_ratio)
    if value < 0:
        warnings.warn(
            f"mutual information clamped to 0 at n={n}, sigma_ratio={sigma_ratio}",
            RuntimeWarning,
            stacklevel=2,
        )
        return 0.0
    return value


@dataclass(frozen=True)
class UltimateRate:
    bits: float
    n_reached: int
    converged: bool


def ultimate_rate(sigma_ratio: float, tolerance: float = 0.01, n_cap: int = 2**20) -> UltimateRate:
    """Large-n limit of the mutual information, by doubling n until it stalls.

    Doubles n until successive values differ by less than ``tolerance``.
    With zero jitter the sequence grows without bound; that is reported as
    ``converged=False`` at the cap rather than looping forever.
    """
    if tolerance <= 0:
        raise ValueError("tolerance must be > 0")
    n = 2
    previous = mutual_information(n, sigma_ratio)
    while n < n_cap:
        n *= 2
        current = mutual_information(n, sigma_ratio)
        if abs(current - previous) < tolerance:
            return UltimateRate(current, n, True)
        previous = current
    return UltimateRate(previous, n, False)


def heuristic_bin_count(frame_width: float, sigma_d: float) -> int:
    """Bin count whose bin width spans one jitter sigma either side of center.

    ceil(2 * frame_width / sigma_d), evaluated in exact rational arithmetic
    so the ceiling is never perturbed by a rounded quotient.
    """
    if sigma_d <= 0:
        raise ValueError("sigma_d must be > 0 for the bin-count heuristic")
    if frame_width <= 0:
        raise ValueError("frame_width must be > 0")
    return int(math.ceil(Fraction(2) * Fraction(frame_width) / Fraction(sigma_d)))


@dataclass(frozen=True)
class JitterChannel:
    """Fully evaluated jitter channel at one (n, sigma_ratio) point."""

    n: int
    jitter_ratio: float
    offset_pmf: IntegerPmf
    transition_pmf: IntegerPmf

    @property
    def truncation_bound(self) -> int:
        return self.transition_pmf.truncation_bound

    @property
    def tail_mass(self) -> float:
        return self.transition_pmf.tail_mass

    @property
    def rod(self) -> float:
        return 1.0 - float((self.offset_pmf.probs * self.offset_pmf.probs).sum())

    @property
    def conditional_entropy_bits(self) -> float:
        return self.transition_pmf.entropy_bits()

    @property
    def raw_bits(self) -> float:
        return math.log2(self.n)

    @property
    def mutual_information_bits(self) -> float:
        return max(0.0, self.raw_bits - self.conditional_entropy_bits)


def build_channel(n: int, sigma_ratio: float) -> JitterChannel:
    return JitterChannel(
        n=int(n),
        jitter_ratio=float(sigma_ratio),
        offset_pmf=offset_pmf(n, sigma_ratio),
        transition_pmf=transition_pmf(n, sigma_ratio),
    )


SWEEP_HEADER = ("n", "sigma_ratio", "rod", "mi_bits", "raw_bits")


def sweep_rows(ns, sigma_ratios):
    rows = []
    for n in ns:
        for sr in sigma_ratios:
            ch = build_channel(n, sr)
            rows.append((int(n), float(sr), ch.rod, ch.mutual_information_bits, ch.raw_bits))
    return rows


def sweep_csv(ns, sigma_ratios) -> str:
    return render_csv(SWEEP_HEADER, sweep_rows(ns, sigma_ratios))
