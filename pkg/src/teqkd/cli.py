"""Command line interface.

Subcommands: ``rates`` (one point, JSON), ``sweep`` (CSV), ``simulate``
(empirical vs analytic table), ``chain`` (Markov chain dump),
``optimize`` (best bin count), ``serve`` (HTTP endpoint for the
explorer).  Every parameter can come from a JSON config file via
``--config``; flags given on the command line override the file.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from . import downtime, jitter, simulate
from .csvio import fmt_float
from .params import ParameterError, SystemParams, load_params, validate_params
from .pipeline import assemble_rates, optimize_bins, report_to_dict, sweep, sweep_csv
from .server import serve_forever


def _add_param_flags(parser):
    parser.add_argument("--config", help="JSON config file with parameter fields")
    parser.add_argument("--lambda-p", type=float, dest="lambda_p", help="pair rate, 1/s")
    parser.add_argument("--lambda-dc", type=float, dest="lambda_dc", help="dark count rate, 1/s")
    parser.add_argument("--frame-width", type=float, dest="frame_width", help="frame width, s")
    parser.add_argument("--bins", type=int, dest="bins_per_frame", help="bins per frame")
    parser.add_argument("--sigma-d", type=float, dest="sigma_d", help="jitter std dev, s")
    parser.add_argument("--downtime-bins", type=int, dest="downtime_bins", help="dead time, bins")
    parser.add_argument("--downtime-seconds", type=float, dest="downtime_seconds", help="dead time, s")


def _build_params(args) -> SystemParams:
    fields = {}
    if args.config:
        fields.update(json.loads(json.dumps(load_params(args.config).__dict__)))
    for name in ("lambda_p", "lambda_dc", "frame_width", "bins_per_frame",
                 "sigma_d", "downtime_bins", "downtime_seconds"):
        value = getattr(args, name, None)
        if value is not None:
            fields[name] = value
    missing = [k for k in ("lambda_p", "frame_width", "bins_per_frame") if k not in fields]
    if missing:
        raise ParameterError([f"missing required parameter {k!r}" for k in missing])
    return validate_params(SystemParams(**fields))


def _cmd_rates(args) -> int:
    report = assemble_rates(_build_params(args), args.efficiency)
    json.dump(report_to_dict(report), sys.stdout, indent=2)
    print()
    return 0


def _cmd_sweep(args) -> int:
    base = _build_params(args)
    if args.points < 1:
        raise ValueError("--points must be >= 1")
    if args.points == 1:
        values = [args.start]
    elif args.log:
        step = (math.log(args.stop) - math.log(args.start)) / (args.points - 1)
        values = [math.exp(math.log(args.start) + i * step) for i in range(args.points)]
    else:
        step = (args.stop - args.start) / (args.points - 1)
        values = [args.start + i * step for i in range(args.points)]
    if args.axis in ("n", "d"):
        values = list(dict.fromkeys(int(round(v)) for v in values))
    text = sweep_csv(sweep(args.axis, values, base, args.efficiency))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _table(rows) -> str:
    widths = [max(len(str(r[i])) for r in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(str(c).ljust(w) for c, w in zip(r, widths)) for r in rows)


def _cmd_simulate(args) -> int:
    params = _build_params(args)
    n = params.bins_per_frame
    duration = args.frames * params.frame_width
    pairs = simulate.generate_pair_stream(params.lambda_p, duration, args.seed)
    rec_a = simulate.detect(pairs, params, "Alice", args.seed, duration, args.source_model)
    rec_b = simulate.detect(pairs, params, "Bob", args.seed, duration, args.source_model)
    ext_a = simulate.ppm_extract(simulate.bin_frames(rec_a, params.frame_width, n), n)
    ext_b = simulate.ppm_extract(simulate.bin_frames(rec_b, params.frame_width, n), n)
    stats = simulate.empirical_stats(ext_a, ext_b)

    from .params import bin_occupancy_prob

    p = bin_occupancy_prob(params.lambda_p, params.bin_width)
    rows = [("quantity", "empirical", "analytic", "std err")]
    rows.append(("bin occupancy", f"{stats.occupancy_estimate:.6f}", f"{p:.6f}",
                 f"{stats.occupancy_se:.2e}"))
    rows.append(("co-retained fraction", f"{stats.coincident_retained_rate:.6f}",
                 f"{downtime.valid_frame_prob(n, params.downtime_bins, p):.6f}",
                 f"{stats.coincident_retained_se:.2e}"))
    rod_analytic = jitter.rod(n, params.jitter_ratio)
    rows.append(("rate of disagreement", f"{stats.rod_estimate:.6f}", f"{rod_analytic:.6f}",
                 f"{stats.rod_se:.2e}"))
    if params.lambda_dc > 0:
        from .darkcounts import DarkCountScenario, ppm_valid_prob

        sc = DarkCountScenario(params.lambda_p, params.lambda_dc, params.frame_width,
                               n, params.sigma_d)
        rows.append(("retention incl. dark counts", f"{stats.coincident_retained_rate:.6f}",
                     f"{ppm_valid_prob(sc):.6f}", f"{stats.coincident_retained_se:.2e}"))
    print(f"simulated {args.frames} frames at seed {args.seed} ({args.source_model} source)")
    print(_table(rows))
    if args.source_model == "continuous" and params.sigma_d > 0:
        print("note: the analytic disagreement rate assumes bin-centred arrivals; "
              "use --source-model bin_center to compare against it directly")
    return 0


def _cmd_chain(args) -> int:
    if args.kind == "detector":
        chain = downtime.build_detector_chain(args.p, args.d)
    elif args.kind == "omc":
        chain = downtime.build_omc(args.n, args.d, args.p)
    else:
        chain = downtime.build_imc(args.n, args.d, args.p, args.kind)
    text = downtime.dump_chain(chain)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_optimize(args) -> int:
    best_n, report = optimize_bins(_build_params(args), args.n_max, args.efficiency)
    print(f"best bins_per_frame: {best_n}  (r_secret = {fmt_float(report.r_secret)} bits/frame)")
    json.dump(report_to_dict(report), sys.stdout, indent=2)
    print()
    return 0


def _cmd_serve(args) -> int:
    serve_forever(args.host, args.port, args.static_dir)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="teqkd",
                                     description="secret key rates for time-entanglement QKD")
    sub = parser.add_subparsers(dest="command", required=True)

    p_rates = sub.add_parser("rates", help="rates at one parameter point, JSON to stdout")
    _add_param_flags(p_rates)
    p_rates.add_argument("--efficiency", type=float, default=1.0)
    p_rates.set_defaults(func=_cmd_rates)

    p_sweep = sub.add_parser("sweep", help="rate sweep along one axis, CSV")
    _add_param_flags(p_sweep)
    p_sweep.add_argument("--axis", required=True, choices=("n", "p", "d", "sigma_ratio", "dc_ratio"))
    p_sweep.add_argument("--from", dest="start", type=float, required=True)
    p_sweep.add_argument("--to", dest="stop", type=float, required=True)
    p_sweep.add_argument("--points", type=int, required=True)
    p_sweep.add_argument("--log", action="store_true", help="log-spaced grid")
    p_sweep.add_argument("--efficiency", type=float, default=1.0)
    p_sweep.add_argument("--out", help="output file (default stdout)")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_sim = sub.add_parser("simulate", help="Monte Carlo run with empirical-vs-analytic table")
    _add_param_flags(p_sim)
    p_sim.add_argument("--frames", type=int, default=20000)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--source-model", choices=("continuous", "bin_center"),
                       default="continuous", dest="source_model")
    p_sim.set_defaults(func=_cmd_simulate)

    p_chain = sub.add_parser("chain", help="dump a Markov chain as text")
    p_chain.add_argument("--kind", required=True, choices=("bmcm", "rmcm", "omc", "detector"))
    p_chain.add_argument("--n", type=int, default=4)
    p_chain.add_argument("--d", type=int, default=1)
    p_chain.add_argument("--p", type=float, required=True)
    p_chain.add_argument("--out")
    p_chain.set_defaults(func=_cmd_chain)

    p_opt = sub.add_parser("optimize", help="best power-of-two bin count")
    _add_param_flags(p_opt)
    p_opt.add_argument("--n-max", dest="n_max", type=int, required=True)
    p_opt.add_argument("--efficiency", type=float, default=1.0)
    p_opt.set_defaults(func=_cmd_optimize)

    p_serve = sub.add_parser("serve", help="start the local JSON rates endpoint")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8787)
    p_serve.add_argument("--static-dir", dest="static_dir",
                         help="also serve explorer static files from this directory")
    p_serve.set_defaults(func=_cmd_serve)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParameterError as exc:
        for violation in exc.violations:
            print(f"parameter error: {violation}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
