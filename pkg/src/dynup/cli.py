"""Command-line front end.

Subcommands: simulate, regret, diagnostics, oracle-check, calibrate,
hotel-study.  Every run is deterministic given its flags and --seed; reports
are written atomically (CSV + JSON, with PNG figures alongside unless
--no-figures is passed).  Exit codes: 0 success, 1 internal invariant or
dominance violation, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import experiments as xp
from .domain import Instance, instance_from_dict, load_instance
from .oracle import (
    dp_optimal_value,
    dp_policy_value,
    enumerate_hindsight_bound,
    offer_value_lipschitz,
)
from .policy import DynUp2Policy, make_policy
from .reporting import (
    diagnostics_csv_rows,
    fmt9,
    hotel_csv_rows,
    regret_csv_rows,
    write_csv,
    write_json,
)
from .sim import check_trace, run_episode, trace_summary, trace_to_csv

DEFAULT_SEED = 1729
OUT_DIR_ENV = "DYNUP_OUT_DIR"

_DEFAULT_ORACLE_INSTANCE = {
    "horizon": 24,
    "capacities": [8, 7],
    "base_prices": [1.0, 2.0],
    "arrival_rates": [0.5, 0.2],
    "curves": [{"family": "exp_power", "a": 2.33, "b": 1.0}],
}

_DEFAULT_TEMPLATE = {
    "rates": [0.5, 0.2],
    "capacity_ratios": [0.45, 0.30],
    "base_prices": [1.0, 2.0],
    "curves": [{"family": "exp_power", "a": 2.33, "b": 1.0}],
}


class ConfigError(Exception):
    pass


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except AssertionError as exc:
        print(f"internal invariant violated: {exc}", file=sys.stderr)
        return 1


def _add_common(parser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument(
        "--out-dir",
        default=d(os.environ.get(OUT_DIR_ENV, "dynup-out")),
        help=f"output directory (env {OUT_DIR_ENV}; default dynup-out)",
    )
    parser.add_argument("--seed", type=int, default=d(DEFAULT_SEED),
                        help=f"base seed (default {DEFAULT_SEED})")
    parser.add_argument("--jobs", type=int, default=d(os.cpu_count() or 1),
                        help="parallel-map width for per-episode work "
                             "(vectorized estimators are single-process and ignore it)")
    parser.add_argument("--no-figures", action="store_true",
                        default=d(False), help="skip PNG rendering on report paths")
    parser.add_argument("--plot-data", action="store_true",
                        default=d(False), help="also emit plot-ready columns")


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="dynup",
        description="Online upgrade pricing: simulation, benchmarks, and experiments.",
    )
    _add_common(p, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _add_common(common, suppress=True)
    sub = p.add_subparsers(required=True)

    ps = sub.add_parser("simulate", help="run episodes and write traces", parents=[common])
    ps.add_argument("--instance", required=True, help="instance config (JSON)")
    ps.add_argument("--policy", default="dynup2",
                    help="dynup2 | dynupn | static:<proportion>")
    ps.add_argument("--reps", type=int, default=1)
    ps.set_defaults(handler=cmd_simulate)

    pr = sub.add_parser("regret", parents=[common], help="regret sweep over horizons")
    pr.add_argument("--template", help="scaling template (JSON); built-in default")
    pr.add_argument("--horizons", default="100,200,400,800,1600,3200")
    pr.add_argument("--reps", type=int, default=10000)
    pr.add_argument("--policy", default="dynup2")
    pr.set_defaults(handler=cmd_regret)

    pd = sub.add_parser("diagnostics", parents=[common], help="process and stopping-time diagnostics")
    pd.add_argument("--kind", default="all",
                    choices=["upper", "lower", "alpha", "stopping", "pricing-loss", "all"])
    pd.add_argument("--horizon", type=int, default=1000)
    pd.add_argument("--reps", type=int, default=10000)
    pd.add_argument("--instance", help="override the built-in diagnostic instances")
    pd.set_defaults(handler=cmd_diagnostics)

    po = sub.add_parser("oracle-check", parents=[common], help="exact dominance checks on a small instance")
    po.add_argument("--instance", help="instance config (JSON); built-in default")
    po.add_argument("--grid-step", type=float, default=0.005)
    po.add_argument("--dump-table", action="store_true",
                    help="also write the full value/action table as CSV")
    po.set_defaults(handler=cmd_oracle_check)

    pc = sub.add_parser("calibrate", parents=[common], help="fit an acceptance curve from offer outcomes")
    pc.add_argument("--samples", help="CSV with columns proportion,accepted")
    pc.add_argument("--demo", help="a,b,n: synthesize n samples from exp(-a x^b)")
    pc.add_argument("--bins", type=int, default=20)
    pc.set_defaults(handler=cmd_calibrate)

    ph = sub.add_parser("hotel-study", parents=[common], help="paired static-vs-dynamic day study")
    ph.add_argument("--profiles", help="JSON list of per-day request counts")
    ph.add_argument("--days", type=int, default=10,
                    help="synthesize this many day profiles if none given")
    ph.add_argument("--mean-requests", default="45,18,2",
                    help="per-type mean counts for synthesized profiles")
    ph.add_argument("--permutations", type=int, default=100)
    ph.add_argument("--static-price", type=float, default=0.6)
    ph.add_argument("--multiplier", type=float, default=2.0)
    ph.set_defaults(handler=cmd_hotel)

    return p


def _out(args, name: str) -> str:
    os.makedirs(args.out_dir, exist_ok=True)
    return os.path.join(args.out_dir, name)


def _load_instance_arg(path: str) -> Instance:
    if not os.path.exists(path):
        raise ConfigError(f"instance file not found: {path}")
    try:
        return load_instance(path)
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        raise ConfigError(f"bad instance config {path}: {exc}") from exc


def _episode_job(payload):
    inst_dict, spec, seed = payload
    inst = instance_from_dict(inst_dict)
    policy = make_policy(spec, inst)
    trace = run_episode(inst, policy, seed)
    check_trace(trace, inst)
    return seed, trace_to_csv(trace), trace_summary(trace)


def cmd_simulate(args) -> int:
    inst = _load_instance_arg(args.instance)
    try:
        make_policy(args.policy, inst)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    from .domain import instance_to_dict

    jobs = [
        (instance_to_dict(inst), args.policy, args.seed + k) for k in range(args.reps)
    ]
    if args.jobs > 1 and args.reps > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_episode_job, jobs))
    else:
        results = [_episode_job(j) for j in jobs]
    from .reporting import atomic_write_text

    for seed, csv_text, summary in results:
        atomic_write_text(_out(args, f"trace-{seed}.csv"), csv_text)
        write_json(_out(args, f"trace-{seed}.json"), summary)
        print(f"seed {seed}: revenue {fmt9(summary['total_revenue'])} -> trace-{seed}.csv")
    return 0


def _load_template(path: str | None) -> xp.ScalingTemplate:
    spec = _DEFAULT_TEMPLATE if path is None else None
    if spec is None:
        if not os.path.exists(path):
            raise ConfigError(f"template file not found: {path}")
        with open(path, "r", encoding="utf-8") as fh:
            spec = json.load(fh)
    from .domain import _curve_from_dict

    try:
        return xp.ScalingTemplate(
            rates=tuple(float(x) for x in spec["rates"]),
            capacity_ratios=tuple(float(x) for x in spec["capacity_ratios"]),
            base_prices=tuple(float(x) for x in spec["base_prices"]),
            curves=tuple(_curve_from_dict(c) for c in spec["curves"]),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"bad template: {exc}") from exc


def cmd_regret(args) -> int:
    template = _load_template(args.template)
    try:
        horizons = [int(x) for x in args.horizons.split(",") if x]
    except ValueError as exc:
        raise ConfigError(f"bad horizon list: {args.horizons!r}") from exc
    report = xp.regret_sweep(template, horizons, args.reps, args.seed, args.policy)
    stem = f"regret-{args.policy.replace(':', '_')}"
    write_csv(_out(args, stem + ".csv"), "dynup.regret.v1",
              ["experiment", "T", "metric", "value"], regret_csv_rows(report))
    write_json(_out(args, stem + ".json"), report.to_json_dict())
    if args.plot_data:
        cols = ["T mean_regret se"] + [
            f"{e.horizon} {fmt9(e.mean)} {fmt9(e.se)}" for e in report.entries
        ]
        from .reporting import atomic_write_text

        atomic_write_text(_out(args, stem + ".dat"), "\n".join(cols) + "\n")
    if not args.no_figures:
        from .plots import plot_regret

        plot_regret(report, _out(args, stem + ".png"))
    for e in report.entries:
        print(f"T={e.horizon}: regret {fmt9(e.mean)} +- {fmt9(e.se)}")
    print(
        f"fit: intercept {fmt9(report.fit_intercept)} slope {fmt9(report.fit_slope)} "
        f"R2 {fmt9(report.fit_r2)} sublinear {report.sublinear()}"
    )
    return 0


def cmd_diagnostics(args) -> int:
    T = args.horizon
    reports = []
    kinds = (
        ["upper", "lower", "alpha", "stopping", "pricing-loss"]
        if args.kind == "all"
        else [args.kind]
    )
    override = _load_instance_arg(args.instance) if args.instance else None
    for kind in kinds:
        if kind in ("upper", "lower", "alpha"):
            if override is not None:
                inst = override
            elif kind == "upper":
                inst = xp.abundance_upper_instance(T)
            elif kind == "lower":
                inst = xp.abundance_lower_instance(T)
            else:
                inst = xp.scarcity_drift_free_instance(T)
            reports.append(
                xp.martingale_diagnostics(inst, kind, args.reps, args.seed)
            )
        elif kind == "stopping":
            inst = override or xp.scarcity_instance(T)
            reports.append(xp.stopping_time_diagnostics(inst, args.reps, args.seed))
        else:
            inst = override or xp.scarcity_drift_free_instance(T)
            reports.append(xp.pricing_loss_diagnostics(inst, args.reps, args.seed))
    rows = []
    for rep in reports:
        rows.extend(diagnostics_csv_rows(rep))
    write_csv(_out(args, "diagnostics.csv"), "dynup.diagnostics.v1",
              ["experiment", "checkpoint", "metric", "value"], rows)
    write_json(
        _out(args, "diagnostics.json"),
        {"schema": "dynup.diagnostics.v1", "reports": [r.to_json_dict() for r in reports]},
    )
    if args.plot_data:
        from .reporting import atomic_write_text

        for rep in reports:
            lines = ["t mean se"] + [
                f"{int(t)} {fmt9(m)} {fmt9(s)}"
                for t, m, s in zip(rep.checkpoints, rep.means, rep.ses)
            ]
            atomic_write_text(_out(args, f"diag-{rep.name}.dat"), "\n".join(lines) + "\n")
    if not args.no_figures:
        from .plots import plot_diagnostics, plot_stopping_time

        for rep in reports:
            if rep.name == "stopping_time":
                plot_stopping_time(rep, _out(args, f"diag-{rep.name}.png"))
            elif rep.name.startswith("martingale"):
                plot_diagnostics(rep, _out(args, f"diag-{rep.name}.png"))
    for rep in reports:
        if rep.name.startswith("martingale"):
            status = "zero-drift ok" if rep.zero_drift_ok() else "DRIFT DETECTED"
        else:
            status = "done"
        print(f"{rep.name}: {status}; "
              + ", ".join(f"{k}={fmt9(v)}" for k, v in sorted(rep.extras.items())
                          if isinstance(v, (int, float))))
    return 0


def cmd_oracle_check(args) -> int:
    if args.instance:
        inst = _load_instance_arg(args.instance)
    else:
        inst = instance_from_dict(_DEFAULT_ORACLE_INSTANCE)
    table = dp_optimal_value(inst, args.grid_step)
    if args.dump_table:
        from .oracle import dump_table_csv

        dump_table_csv(table, _out(args, "oracle-table.csv"))
    bound = enumerate_hindsight_bound(inst)
    policy_value = dp_policy_value(inst, DynUp2Policy(inst))
    slack = offer_value_lipschitz(inst) * args.grid_step * inst.horizon / 2.0
    print(f"hindsight_bound   {fmt9(bound)}")
    print(f"optimal_value     {fmt9(table.optimal_value)}")
    print(f"dynup2_value      {fmt9(policy_value)}")
    ok1 = bound >= table.optimal_value - 1e-9
    ok2 = table.optimal_value >= policy_value - slack
    print(f"bound >= optimal  {'PASS' if ok1 else 'FAIL'}")
    print(f"optimal >= policy {'PASS' if ok2 else 'FAIL'} (grid slack {fmt9(slack)})")
    write_json(
        _out(args, "oracle-check.json"),
        {
            "schema": "dynup.oracle.v1",
            "hindsight_bound": bound,
            "optimal_value": table.optimal_value,
            "dynup2_value": policy_value,
            "grid_step": args.grid_step,
            "grid_slack": slack,
            "dominance_ok": bool(ok1 and ok2),
        },
    )
    return 0 if (ok1 and ok2) else 1


def cmd_calibrate(args) -> int:
    true_params = None
    if args.demo:
        try:
            a, b, n = args.demo.split(",")
            a, b, n = float(a), float(b), int(n)
        except ValueError as exc:
            raise ConfigError(f"bad --demo spec {args.demo!r}; want a,b,n") from exc
        from .domain import ExponentialPowerCurve

        samples = xp.synthesize_acceptance_samples(ExponentialPowerCurve(a=a, b=b), n, args.seed)
        true_params = (a, b)
    elif args.samples:
        if not os.path.exists(args.samples):
            raise ConfigError(f"samples file not found: {args.samples}")
        samples = np.loadtxt(args.samples, delimiter=",", comments="#", skiprows=0)
    else:
        raise ConfigError("calibrate needs --samples or --demo")
    try:
        fit = xp.fit_acceptance_curve(samples, bins=args.bins)
    except xp.InsufficientDataError as exc:
        raise ConfigError(str(exc)) from exc
    print(f"a {fmt9(fit.a)}")
    print(f"b {fmt9(fit.b)}")
    print(f"rss {fmt9(fit.rss)} over {fit.n_samples} samples")
    write_json(_out(args, "calibration.json"), fit.to_json_dict())
    write_csv(
        _out(args, "calibration.csv"),
        "dynup.calibration.v1",
        ["bin_mid", "acceptance_freq", "count"],
        zip(fit.bin_mids, fit.bin_freqs, fit.bin_counts),
    )
    if not args.no_figures:
        from .plots import plot_calibration

        plot_calibration(
            fit.bin_mids, fit.bin_freqs, fit.bin_counts, fit,
            _out(args, "calibration.png"), true_params=true_params,
        )
    return 0


def cmd_hotel(args) -> int:
    if args.profiles:
        if not os.path.exists(args.profiles):
            raise ConfigError(f"profiles file not found: {args.profiles}")
        with open(args.profiles, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        profiles = tuple(tuple(int(x) for x in day) for day in raw)
    else:
        try:
            means = [float(x) for x in args.mean_requests.split(",")]
        except ValueError as exc:
            raise ConfigError(f"bad --mean-requests: {args.mean_requests!r}") from exc
        profiles = xp.synthetic_day_profiles(args.days, means, args.seed)
    config = xp.HotelStudyConfig(
        day_profiles=profiles,
        permutations=args.permutations,
        horizon_multiplier=args.multiplier,
        static_price=args.static_price,
        base_seed=args.seed,
    )
    report = xp.hotel_study(config)
    write_csv(_out(args, "hotel-study.csv"), "dynup.hotel.v1",
              ["experiment", "checkpoint", "metric", "value"], hotel_csv_rows(report))
    write_json(_out(args, "hotel-study.json"), report.to_json_dict())
    if args.plot_data:
        from .reporting import atomic_write_text

        lines = ["day static_mean dynamic_mean"] + [
            f"{d.day} {fmt9(d.static_mean)} {fmt9(d.dynamic_mean)}" for d in report.days
        ]
        atomic_write_text(_out(args, "hotel-study.dat"), "\n".join(lines) + "\n")
    if not args.no_figures:
        from .plots import plot_hotel_study

        plot_hotel_study(report, _out(args, "hotel-study.png"))
    for d in report.days:
        impr = "n/a" if d.improvement_pct is None else f"{d.improvement_pct:+.2f}%"
        print(f"day {d.day} {d.requests}: static {fmt9(d.static_mean)} "
              f"dynamic {fmt9(d.dynamic_mean)} improvement {impr}")
    if report.aggregate_improvement_pct is None:
        print("aggregate improvement: n/a")
    else:
        print(
            f"aggregate improvement {report.aggregate_improvement_pct:+.2f}% "
            f"(pooled one-sided p {fmt9(report.pooled_p_value)})"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
