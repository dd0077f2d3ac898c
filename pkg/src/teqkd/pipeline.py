"""End-to-end secret key rate assembly, sweeps, and bin-count optimization.

The per-frame secret rate composes the three impairment analyses:

    k_reconciled = k_raw - beta_r          (reconciliation spend)
    k_uniform    = c_dr * k_raw            (compression to uniformity)
    k_secret     = c_dr * (k_raw - beta_r)

and the time-averaged rate multiplies by the probability that a frame is
retained at all.  Jitter and downtime are analyzed in isolation, so their
multiplicative composition here is a separable approximation; reports
carry the numbers, not a promise that the impairments never interact.

beta_r defaults to its information-theoretic floor (the channel's
conditional entropy); a reconciliation efficiency factor >= 1 scales it
for real codes.

For the retention probability two views are reported: the independent-bin
value n p (1-p)^(n-1) and the downtime-chain stationary value.  The
chain value feeds r_secret whenever downtime is active, since dead time
changes how often single-occupancy frames occur.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict

from . import darkcounts, downtime, jitter
from .csvio import render_csv
from .params import SystemParams, derive_params, validate_params

__all__ = [
    "RateReport",
    "SweepPoint",
    "SWEEP_AXES",
    "SWEEP_HEADER",
    "assemble_rates",
    "sweep",
    "sweep_rows",
    "sweep_csv",
    "optimize_bins",
    "report_to_dict",
]

SWEEP_AXES = ("n", "p", "d", "sigma_ratio", "dc_ratio")


@dataclass(frozen=True)
class RateReport:
    """All rate quantities for one parameter point, in bits per frame
    (``r_secret_time`` in bits per second)."""

    params: SystemParams
    p_occupy: float
    k_raw: float
    rod: float
    beta_r: float
    k_reconciled: float
    c_dr: float
    k_uniform: float
    k_secret: float
    valid_prob_iid: float
    valid_prob_chain: float
    r_raw: float
    r_adjusted: float
    r_secret: float
    r_secret_time: float
    clamped: bool


def assemble_rates(params: SystemParams, reconciliation_efficiency: float = 1.0) -> RateReport:
    """Evaluate the full rate stack at one parameter point.

    With ideal detectors (no jitter, no downtime, no dark counts) this
    returns k_secret = log2(n) and the independent-bin retention rate.
    A negative reconciled rate (possible when the conditional entropy
    exceeds the raw bits under heavy mixtures) clamps to zero and flags
    the report.
    """
    validate_params(params)
    if reconciliation_efficiency < 1.0:
        raise ValueError("reconciliation efficiency is >= 1 by definition")
    derived = derive_params(params)
    n = params.bins_per_frame
    d = params.downtime_bins
    p = derived.p_occupy
    if p >= 1.0:
        raise ValueError(
            "bin occupancy saturates to 1 in floating point at "
            f"lambda_p*bin_width = {params.lambda_p * derived.bin_width:.3g}; "
            "reduce the rate or the bin width"
        )

    k_raw = math.log2(n)

    if params.lambda_dc > 0:
        scenario = darkcounts.DarkCountScenario(
            lambda_p=params.lambda_p,
            lambda_dc=params.lambda_dc,
            frame_width=params.frame_width,
            bins_per_frame=n,
            sigma_d=params.sigma_d,
        )
        conditional_entropy = darkcounts.dc_transition_pmf(scenario).entropy_bits()
    else:
        conditional_entropy = jitter.conditional_entropy(n, derived.jitter_ratio)
    beta_r = reconciliation_efficiency * conditional_entropy

    if d == 0:
        c_dr = 1.0
    else:
        c_dr = downtime.compression_ratio(downtime.build_omc(n, d, p))

    raw_minus_beta = k_raw - beta_r
    clamped = raw_minus_beta < 0
    k_reconciled = 0.0 if clamped else raw_minus_beta
    k_uniform = c_dr * k_raw
    k_secret = c_dr * k_reconciled

    valid_iid = downtime.valid_frame_prob(n, 0, p)
    valid_chain = downtime.valid_frame_prob(n, d, p)
    valid_used = valid_chain if d > 0 else valid_iid
    r_raw = valid_used * k_raw
    r_secret = valid_used * k_secret
    return RateReport(
        params=params,
        p_occupy=p,
        k_raw=k_raw,
        rod=jitter.rod(n, derived.jitter_ratio),
        beta_r=beta_r,
        k_reconciled=k_reconciled,
        c_dr=c_dr,
        k_uniform=k_uniform,
        k_secret=k_secret,
        valid_prob_iid=valid_iid,
        valid_prob_chain=valid_chain,
        r_raw=r_raw,
        r_adjusted=c_dr * r_raw,
        r_secret=r_secret,
        r_secret_time=r_secret / params.frame_width,
        clamped=clamped,
    )


@dataclass(frozen=True)
class SweepPoint:
    axis: str
    value: float
    report: RateReport | None
    error: str | None


def _params_at(axis: str, value, base: SystemParams) -> SystemParams:
    if axis == "n":
        n = int(value)
        if n != value:
            raise ValueError(f"bins_per_frame must be an integer (got {value!r})")
        repl = {"bins_per_frame": n}
        if base.downtime_seconds is not None:
            # dead time is a detector property: hold it fixed in seconds and
            # rebin it (to the nearest whole bin) as the bin width changes
            tau = base.frame_width / n
            dbins = int(round(base.downtime_seconds / tau))
            repl["downtime_bins"] = dbins
            repl["downtime_seconds"] = dbins * tau
        return SystemParams(**{**_fields(base), **repl})
    if axis == "p":
        if not 0 < value < 1:
            raise ValueError("occupancy p must be inside (0, 1)")
        tau = base.bin_width
        return SystemParams(**{**_fields(base), "lambda_p": -math.log(1.0 - value) / tau})
    if axis == "d":
        dbins = int(value)
        if dbins != value:
            raise ValueError(f"downtime_bins must be an integer (got {value!r})")
        repl = {"downtime_bins": dbins}
        if base.downtime_seconds is not None:
            repl["downtime_seconds"] = dbins * base.bin_width
        return SystemParams(**{**_fields(base), **repl})
    if axis == "sigma_ratio":
        return SystemParams(**{**_fields(base), "sigma_d": value * base.frame_width})
    if axis == "dc_ratio":
        return SystemParams(**{**_fields(base), "lambda_dc": value * base.lambda_p})
    raise ValueError(f"unknown sweep axis {axis!r}; expected one of {SWEEP_AXES}")


def _fields(params: SystemParams) -> dict:
    return {
        "lambda_p": params.lambda_p,
        "lambda_dc": params.lambda_dc,
        "frame_width": params.frame_width,
        "bins_per_frame": params.bins_per_frame,
        "sigma_d": params.sigma_d,
        "downtime_bins": params.downtime_bins,
        "downtime_seconds": params.downtime_seconds,
    }


def sweep(axis: str, values, base: SystemParams, reconciliation_efficiency: float = 1.0):
    """One report per grid value, in grid order; failures recorded inline."""
    if axis not in SWEEP_AXES:
        raise ValueError(f"unknown sweep axis {axis!r}; expected one of {SWEEP_AXES}")
    values = list(values)
    if not values:
        raise ValueError("sweep grid is empty")
    points = []
    for value in values:
        try:
            report = assemble_rates(_params_at(axis, value, base), reconciliation_efficiency)
            points.append(SweepPoint(axis, float(value), report, None))
        except Exception as exc:  # per-point failure must not kill the sweep
            points.append(SweepPoint(axis, float(value), None, str(exc)))
    return points


SWEEP_HEADER = (
    "axis",
    "axis_value",
    "lambda_p",
    "lambda_dc",
    "frame_width",
    "bins_per_frame",
    "sigma_d",
    "downtime_bins",
    "p_occupy",
    "k_raw",
    "rod",
    "beta_r",
    "k_reconciled",
    "c_dr",
    "k_uniform",
    "k_secret",
    "valid_prob_iid",
    "valid_prob_chain",
    "r_raw",
    "r_adjusted",
    "r_secret",
    "r_secret_time",
    "clamped",
    "error",
)


def sweep_rows(points):
    rows = []
    for pt in points:
        if pt.report is None:
            rows.append((pt.axis, pt.value) + ("",) * (len(SWEEP_HEADER) - 3) + (pt.error,))
            continue
        r = pt.report
        prm = r.params
        rows.append(
            (
                pt.axis,
                pt.value,
                prm.lambda_p,
                prm.lambda_dc,
                prm.frame_width,
                int(prm.bins_per_frame),
                prm.sigma_d,
                int(prm.downtime_bins),
                r.p_occupy,
                r.k_raw,
                r.rod,
                r.beta_r,
                r.k_reconciled,
                r.c_dr,
                r.k_uniform,
                r.k_secret,
                r.valid_prob_iid,
                r.valid_prob_chain,
                r.r_raw,
                r.r_adjusted,
                r.r_secret,
                r.r_secret_time,
                r.clamped,
                "",
            )
        )
    return rows


def sweep_csv(points) -> str:
    return render_csv(SWEEP_HEADER, sweep_rows(points))


def optimize_bins(base: SystemParams, n_max: int, reconciliation_efficiency: float = 1.0):
    """Exhaustive search for the best power-of-two bin count by r_secret.

    The bin count in ``base`` is ignored; every power of two from 2 up to
    n_max is evaluated and the argmax returned, ties going to the smaller
    count.  Dead time in seconds is held fixed (the bin view rescales).
    """
    if n_max < 2:
        raise ValueError("n_max must be >= 2")
    candidates = []
    n = 2
    while n <= n_max:
        candidates.append(n)
        n *= 2
    dead_seconds = base.dead_time
    best = None
    for n in candidates:
        tau = base.frame_width / n
        dbins = int(round(dead_seconds / tau)) if dead_seconds > 0 else 0
        if dbins > n:
            continue  # dead time longer than a whole frame at this n
        params = SystemParams(
            **{
                **_fields(base),
                "bins_per_frame": n,
                "downtime_bins": dbins,
                "downtime_seconds": dbins * tau if dead_seconds > 0 else None,
            }
        )
        report = assemble_rates(params, reconciliation_efficiency)
        if best is None or report.r_secret > best[1].r_secret:
            best = (n, report)
    if best is None:
        raise ValueError("no feasible bin count: dead time exceeds the frame everywhere")
    return best


def report_to_dict(report: RateReport) -> dict:
    data = asdict(report)
    data["params"] = {k: v for k, v in data["params"].items()}
    return data
