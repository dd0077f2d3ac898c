"""Event-level Monte Carlo of the two-station experiment.

Pair creation times are a Poisson stream shared by the stations; each
station independently adds Gaussian time-tagging jitter, loses events to
dead time, and picks up uniform dark counts.  Frames and bins are cut by
floor division and PPM retains frames with exactly one occupied bin.

The simulator is the independent check on every analytic module, so its
conventions are spelled out:

* Jitter can reorder nearby events; dead time acts on the jittered
  (observed) order, so streams are re-sorted before the dead-time pass.
* Dead time is enforced once, on the merged photon + dark-count stream: a
  dark count blinds the detector exactly like a real photon.  An optional
  pre-pass restricted to the photon stream exists for diagnostics.
* Events jittered to negative times are dropped (boundary artifact).
* Randomness comes from numpy's seedable generator; a (seed, station)
  pair fully determines every draw, so identical inputs give identical
  outputs on every run.

``source_model`` selects where pair times sit inside their bin.  The
physical model is ``"continuous"``.  ``"bin_center"`` snaps each pair
time to the centre of its bin before jitter is added, which reproduces
the integer-offset channel abstraction exactly; the channel
cross-validation tests use it because the analytic rate of disagreement
is defined against that abstraction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import SystemParams, validate_params

__all__ = [
    "SPDC",
    "DARK",
    "ORIGIN_NAMES",
    "DetectionRecord",
    "FrameOccupancy",
    "PpmExtraction",
    "EmpiricalStats",
    "generate_pair_stream",
    "detect",
    "bin_frames",
    "ppm_extract",
    "empirical_stats",
    "matched_pair_deltas",
    "record_to_text",
    "record_from_text",
    "extraction_to_csv",
]

SPDC = 0
DARK = 1
ORIGIN_NAMES = {SPDC: "SPDC", DARK: "DarkCount"}
_ORIGIN_CODES = {name: code for code, name in ORIGIN_NAMES.items()}
_STATION_INDEX = {"Alice": 0, "Bob": 1}


@dataclass(frozen=True)
class DetectionRecord:
    """Accepted detections at one station, in time order.

    ``origins`` and ``pair_index`` are simulator ground truth (which pair
    produced each event, -1 for dark counts); extraction logic never looks
    at them.
    """

    station: str
    timestamps: np.ndarray
    origins: np.ndarray
    pair_index: np.ndarray
    dead_time: float
    duration: float

    def validate(self) -> "DetectionRecord":
        t = self.timestamps
        if len(t) > 1:
            gaps = np.diff(t)
            if np.any(gaps <= 0):
                raise AssertionError("timestamps are not strictly increasing")
            if self.dead_time > 0 and np.any(gaps <= self.dead_time):
                raise AssertionError("dead time violated between accepted events")
        return self


@dataclass(frozen=True)
class FrameOccupancy:
    frame_index: int
    occupied_bins: frozenset


@dataclass(frozen=True)
class PpmExtraction:
    """Retained (frame, symbol) pairs plus bookkeeping for the estimators."""

    n: int
    retained: tuple
    discarded: int
    frames_total: int
    occupied_bins_total: int
    bits: str | None
    bits_omitted: bool


@dataclass(frozen=True)
class EmpiricalStats:
    rod_estimate: float
    rod_se: float
    rod_defined: bool
    coincident_retained_rate: float
    coincident_retained_se: float
    occupancy_estimate: float
    occupancy_se: float
    co_retained_count: int
    frames_total: int


def generate_pair_stream(lambda_p: float, duration: float, seed: int) -> np.ndarray:
    """Pair creation times on [0, duration): exponential gaps at rate lambda_p."""
    if not duration > 0:
        return np.empty(0)
    if not lambda_p > 0:
        raise ValueError("lambda_p must be > 0")
    rng = np.random.default_rng(seed)
    times = []
    t = 0.0
    chunk = max(1024, int(lambda_p * duration * 1.1))
    while True:
        gaps = rng.exponential(1.0 / lambda_p, size=chunk)
        arrivals = t + np.cumsum(gaps)
        inside = arrivals[arrivals < duration]
        times.append(inside)
        if len(inside) < len(arrivals):
            break
        t = float(arrivals[-1])
        chunk = max(1024, chunk // 4)
    return np.concatenate(times)


def _dead_time_pass(times: np.ndarray, dead: float) -> np.ndarray:
    """Indices of events accepted by a non-paralyzable dead-time scan."""
    if len(times) == 0:
        return np.empty(0, dtype=int)
    if dead <= 0:
        # only exact ties can be rejected, so no sequential state is needed
        keep = np.concatenate([[True], np.diff(times) > 0])
        return np.nonzero(keep)[0]
    keep = []
    last = -math.inf
    for i, t in enumerate(times):
        if t - last > dead:
            keep.append(i)
            last = t
    return np.asarray(keep, dtype=int)


def detect(
    pairs: np.ndarray,
    params: SystemParams,
    station: str,
    seed: int,
    duration: float | None = None,
    source_model: str = "continuous",
    spdc_predrop: bool = False,
) -> DetectionRecord:
    """Simulate one station's detector over a shared pair stream.

    With jitter, dead time and dark counts all switched off this is the
    identity on the input times.  ``spdc_predrop`` additionally applies a
    dead-time pass to the photon stream before dark counts are merged;
    the merged stream always gets the final pass either way.
    """
    validate_params(params)
    if station not in _STATION_INDEX:
        raise ValueError(f"station must be one of {sorted(_STATION_INDEX)}")
    if source_model not in ("continuous", "bin_center"):
        raise ValueError(f"unknown source_model {source_model!r}")
    pairs = np.asarray(pairs, dtype=float)
    if duration is None:
        duration = float(pairs[-1]) if len(pairs) else 0.0
    rng = np.random.default_rng([int(seed), _STATION_INDEX[station]])

    u = pairs
    if source_model == "bin_center":
        tau = params.bin_width
        u = (np.floor(u / tau) + 0.5) * tau
    if params.sigma_d > 0:
        t = u + rng.normal(0.0, params.sigma_d, size=len(u))
    else:
        t = u.copy()
    index = np.arange(len(t))
    positive = t >= 0
    t, index = t[positive], index[positive]
    order = np.argsort(t, kind="stable")
    t, index = t[order], index[order]

    dead = params.dead_time
    if spdc_predrop and dead > 0:
        kept = _dead_time_pass(t, dead)
        t, index = t[kept], index[kept]

    if params.lambda_dc > 0:
        n_dark = rng.poisson(params.lambda_dc * duration)
        dark_times = np.sort(rng.uniform(0.0, duration, size=n_dark))
        times = np.concatenate([t, dark_times])
        origins = np.concatenate([np.full(len(t), SPDC, np.uint8), np.full(n_dark, DARK, np.uint8)])
        pair_idx = np.concatenate([index, np.full(n_dark, -1, dtype=int)])
        order = np.argsort(times, kind="stable")
        times, origins, pair_idx = times[order], origins[order], pair_idx[order]
    else:
        times, origins, pair_idx = t, np.full(len(t), SPDC, np.uint8), index

    kept = _dead_time_pass(times, dead)
    times, origins, pair_idx = times[kept], origins[kept], pair_idx[kept]

    return DetectionRecord(
        station=station,
        timestamps=times,
        origins=origins,
        pair_index=pair_idx,
        dead_time=dead,
        duration=duration,
    ).validate()


def bin_frames(record: DetectionRecord, frame_width: float, bins_per_frame: int):
    """Cut a record into frames; empty frames are emitted, not skipped.

    Frame count covers the record duration (rounded up, so a trailing
    partial frame is included when the duration is not a whole number of
    frames).
    """
    if not frame_width > 0 or bins_per_frame < 1:
        raise ValueError("need frame_width > 0 and bins_per_frame >= 1")
    t = record.timestamps
    n = bins_per_frame
    n_frames = int(math.ceil(record.duration / frame_width)) if record.duration > 0 else 0
    if len(t):
        frame_idx = np.floor_divide(t, frame_width).astype(int)
        n_frames = max(n_frames, int(frame_idx.max()) + 1)
        within = t - frame_idx * frame_width
        bin_idx = np.minimum((within / (frame_width / n)).astype(int), n - 1)
    else:
        frame_idx = np.empty(0, dtype=int)
        bin_idx = np.empty(0, dtype=int)
    buckets = [[] for _ in range(n_frames)]
    for f, b in zip(frame_idx, bin_idx):
        buckets[f].append(b)
    return [FrameOccupancy(i, frozenset(bins)) for i, bins in enumerate(buckets)]


def ppm_extract(frames, n: int) -> PpmExtraction:
    """Keep frames with exactly one occupied bin; the bin index is the symbol.

    Symbols expand to bits most-significant first when n is a power of
    two; otherwise the bit string is omitted and flagged.
    """
    retained = []
    occupied_total = 0
    for frame in frames:
        occ = frame.occupied_bins
        occupied_total += len(occ)
        if len(occ) == 1:
            (symbol,) = occ
            retained.append((frame.frame_index, symbol))
    power_of_two = n >= 2 and (n & (n - 1)) == 0
    if power_of_two:
        width = n.bit_length() - 1
        bits = "".join(format(sym, f"0{width}b") for _, sym in retained)
        omitted = False
    else:
        bits = None
        omitted = True
    return PpmExtraction(
        n=n,
        retained=tuple(retained),
        discarded=len(frames) - len(retained),
        frames_total=len(frames),
        occupied_bins_total=occupied_total,
        bits=bits,
        bits_omitted=omitted,
    )


def _binomial_se(p: float, count: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / count) if count > 0 else math.nan


def empirical_stats(alice: PpmExtraction, bob: PpmExtraction) -> EmpiricalStats:
    """Estimators over frames both stations retained.

    Frame retention indices are treated as public, so the disagreement
    rate is measured only where both stations kept the frame.
    """
    if alice.n != bob.n or alice.frames_total != bob.frames_total:
        raise ValueError("stations were framed with different parameters")
    total = alice.frames_total
    alice_symbols = dict(alice.retained)
    co = [(alice_symbols[f], s) for f, s in bob.retained if f in alice_symbols]
    co_count = len(co)
    disagreements = sum(1 for a_sym, b_sym in co if a_sym != b_sym)
    if co_count > 0:
        rod = disagreements / co_count
        rod_se = _binomial_se(rod, co_count)
        rod_defined = True
    else:
        rod, rod_se, rod_defined = math.nan, math.nan, False
    co_rate = co_count / total if total else math.nan
    occ_bins = alice.occupied_bins_total + bob.occupied_bins_total
    occ_slots = 2 * total * alice.n
    occupancy = occ_bins / occ_slots if occ_slots else math.nan
    return EmpiricalStats(
        rod_estimate=rod,
        rod_se=rod_se,
        rod_defined=rod_defined,
        coincident_retained_rate=co_rate,
        coincident_retained_se=_binomial_se(co_rate, total) if total else math.nan,
        occupancy_estimate=occupancy,
        occupancy_se=_binomial_se(occupancy, occ_slots) if occ_slots else math.nan,
        co_retained_count=co_count,
        frames_total=total,
    )


def matched_pair_deltas(alice: DetectionRecord, bob: DetectionRecord) -> np.ndarray:
    """t_Bob - t_Alice over pairs whose photons were accepted at both stations."""
    a_mask = alice.pair_index >= 0
    b_mask = bob.pair_index >= 0
    a_map = dict(zip(alice.pair_index[a_mask].tolist(), alice.timestamps[a_mask].tolist()))
    deltas = [
        t_b - a_map[idx]
        for idx, t_b in zip(bob.pair_index[b_mask].tolist(), bob.timestamps[b_mask].tolist())
        if idx in a_map
    ]
    return np.asarray(deltas)


def record_to_text(record: DetectionRecord) -> str:
    lines = [
        f"{float(t)!r} {ORIGIN_NAMES[int(o)]}"
        for t, o in zip(record.timestamps, record.origins)
    ]
    return "\n".join(lines) + ("\n" if lines else "")


def record_from_text(text: str, station: str = "Alice", dead_time: float = 0.0,
                     duration: float | None = None) -> DetectionRecord:
    times, origins = [], []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        stamp, tag = line.split()
        times.append(float(stamp))
        origins.append(_ORIGIN_CODES[tag])
    timestamps = np.asarray(times)
    if duration is None:
        duration = float(timestamps[-1]) if len(timestamps) else 0.0
    return DetectionRecord(
        station=station,
        timestamps=timestamps,
        origins=np.asarray(origins, dtype=np.uint8),
        pair_index=np.full(len(times), -1, dtype=int),
        dead_time=dead_time,
        duration=duration,
    )


def extraction_to_csv(extraction: PpmExtraction) -> str:
    lines = ["frame_index,symbol"]
    lines += [f"{f},{s}" for f, s in extraction.retained]
    return "\n".join(lines) + "\n"
