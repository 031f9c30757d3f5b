"""Command-line front end.

Every subcommand reads and writes the CSV layouts in :mod:`kmjump.io`;
``pipeline`` chains them all and ``report`` merges per-series outputs into
combined tables.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import io as kio
from .binning import RULES, ZoneTargets, classical_bin_count
from .config import PipelineConfig, from_ini, sim_from_mapping
from .dist_fit import fit_cross_section
from .errors import KMJumpError
from .jumps import global_infinitesimal_moments, jump_params_or_limit
from .km import km_analysis
from .markov import markov_report
from .pipeline import PipelineError, analysis_grid, run_pipeline
from .preprocess import detrend, moving_average_detrend
from .simulate import SimConfig, jump_log, simulate
from .stationarity import stationarity_report

log = logging.getLogger("kmjump")

OUT_DIR_ENV = "KMJUMP_OUT_DIR"
DIFFUSIVE_MAJORITY = 0.9


def _ints(text):
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _floats(text):
    try:
        return tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _auto_int(text):
    if text == "auto":
        return text
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'auto' or an integer, got {text!r}")


# --- shared flag groups --------------------------------------------------------

def _add_config_flags(p, *groups):
    p.add_argument("--config", help="INI configuration file; flags override it")
    if "input" in groups:
        p.add_argument("--input", "-i", help="input CSV")
        p.add_argument("--dt", type=float, help="sampling interval in model time units")
        p.add_argument("--label", help="series label used in reports")
        p.add_argument("--points-per-day", type=int)
        p.add_argument("--parameter", choices=("phi", "theta"))
    if "fit" in groups:
        p.add_argument("--family", help="Gamma, InvGamma, Weibull or LogNormal")
    if "detrend" in groups:
        p.add_argument("--window-days", type=int)
        p.add_argument("--detrend-order", choices=("intraday_first", "ma_first", "intraday_only",
                                                   "ma_only", "none"))
    if "stationarity" in groups:
        p.add_argument("--adf-lags", type=_auto_int)
        p.add_argument("--kpss-bandwidth", type=_auto_int)
    if "markov" in groups:
        p.add_argument("--entropy-bins", type=int)
        p.add_argument("--entropy-threshold", type=float)
        p.add_argument("--tau-max", type=int)
        p.add_argument("--pacf-lags", type=int)
    if "bins" in groups:
        p.add_argument("--zone-preset", choices=("main", "appendix"))
        p.add_argument("--zone-targets", type=_ints,
                       help="core_min,core_max,shoulder_min,shoulder_max,tail_min,tail_max")
    if "km" in groups:
        p.add_argument("--lags", type=_ints)
        p.add_argument("--orders", type=_ints)
        p.add_argument("--min-occupancy", type=int)
        p.add_argument("--jump-floor", type=float)
    p.add_argument("--workers", type=int, default=1, help="threads for independent work items")


def _resolve_config(args) -> PipelineConfig:
    cfg = PipelineConfig(out_dir=os.environ.get(OUT_DIR_ENV, "kmjump_out"))
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.is_file():
            raise KMJumpError(f"configuration file not found: {path}")
        cfg = from_ini(path.read_text(), cfg)
    names = ["input", "dt", "label", "points_per_day", "parameter", "family", "window_days",
             "detrend_order", "adf_lags", "kpss_bandwidth", "entropy_bins", "entropy_threshold",
             "tau_max", "pacf_lags", "lags", "orders", "min_occupancy", "jump_floor", "out_dir"]
    kw = {n: getattr(args, n) for n in names if getattr(args, n, None) is not None}
    if getattr(args, "zone_preset", None):
        kw["zone_targets"] = ZoneTargets.preset(args.zone_preset)
    if getattr(args, "zone_targets", None):
        if len(args.zone_targets) != 6:
            raise KMJumpError("--zone-targets needs six integers")
        kw["zone_targets"] = ZoneTargets(*args.zone_targets)
    return cfg.with_overrides(**kw)


def _sim_from_args(args, base: SimConfig | None = None) -> SimConfig:
    mapping = {}
    for flag, key in (("kind", "kind"), ("drift_theta", "drift_theta"), ("b", "b"),
                      ("lam", "lambda"), ("sigma_xi", "sigma_xi"), ("sim_dt", "dt"), ("n", "n"),
                      ("seed", "seed"), ("x0", "x0"), ("ar_coef", "ar_coef"),
                      ("sim_points_per_day", "points_per_day")):
        v = getattr(args, flag, None)
        if v is not None:
            mapping[key] = str(v)
    if getattr(args, "profile", None) is not None:
        mapping["profile"] = ",".join(repr(v) for v in args.profile)
    return sim_from_mapping(mapping, base)


def _add_sim_flags(p):
    p.add_argument("--kind", help="JumpDiffusion, OU, AR1, RandomWalk, WhiteNoise, ProfilePlusNoise")
    p.add_argument("--seed", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--sim-dt", type=float)
    p.add_argument("--drift-theta", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--lam", "--lambda", dest="lam", type=float)
    p.add_argument("--sigma-xi", type=float)
    p.add_argument("--x0", type=float)
    p.add_argument("--ar-coef", type=float)
    p.add_argument("--profile", type=_floats, help="cubic coefficients a0,a1,a2,a3")
    p.add_argument("--sim-points-per-day", type=int)


# --- subcommands ---------------------------------------------------------------

def cmd_simulate(args):
    sim = _sim_from_args(args, SimConfig(kind="OU", dt=0.01, n=38 * 500))
    ts = simulate(sim)
    kio.write_series(args.out, ts)
    if args.jump_log:
        kio.write_jump_log(args.jump_log, jump_log(sim))
    return 0


def cmd_fit(args):
    cfg = _resolve_config(args)
    _, _, panel = kio.read_panel(cfg.input)
    ps = fit_cross_section(panel, cfg.family, cfg.points_per_day, args.workers)
    kio.write_params(args.out, ps)
    failed = int((~ps.converged).sum())
    if failed:
        log.warning("%d of %d rows did not converge and were interpolated", failed, ps.converged.size)
    return 0


def _series(cfg):
    if cfg.input is None:
        raise KMJumpError("--input is required")
    return kio.read_any_series(cfg.input, cfg.dt, cfg.label, cfg.parameter, cfg.points_per_day)


def cmd_detrend(args):
    cfg = _resolve_config(args)
    ts = _series(cfg)
    fluct = detrend(ts, cfg.window_days, cfg.detrend_order)
    kio.write_series(args.out, fluct)
    if args.trend_out:
        trend, _ = moving_average_detrend(ts, cfg.window_days)
        kio.write_series(args.trend_out, trend)
    return 0


def cmd_stationarity(args):
    cfg = _resolve_config(args)
    kb = None if cfg.kpss_bandwidth == "auto" else cfg.kpss_bandwidth
    kio.write_stationarity(args.out, [stationarity_report(_series(cfg), cfg.adf_lags, kb)])
    return 0


def cmd_markov(args):
    cfg = _resolve_config(args)
    rep = markov_report(_series(cfg), cfg.entropy_threshold, cfg.entropy_bins, cfg.tau_max,
                        cfg.pacf_lags, args.workers)
    kio.write_markov(args.out, rep)
    return 0


def cmd_bins(args):
    cfg = _resolve_config(args)
    ts = _series(cfg)
    kio.write_bins(args.out, analysis_grid(ts, cfg))
    if args.classical_out:
        counts = []
        for rule in RULES:
            try:
                counts.append(classical_bin_count(ts, rule))
            except KMJumpError:
                counts.append("")
        kio.write_rows(args.classical_out, kio.CLASSICAL_HEADER, [[ts.label, *counts]])
    return 0


def cmd_km(args):
    cfg = _resolve_config(args)
    ts = _series(cfg)
    grid = analysis_grid(ts, cfg, args.bins)
    res = km_analysis(ts, grid, cfg.lags, cfg.orders, cfg.min_occupancy, cfg.jump_floor)
    kio.write_km(args.out, res)
    if args.moments_out:
        kio.write_moments_long(args.moments_out, res.table)
    return 0


def cmd_jumps(args):
    cfg = _resolve_config(args)
    ts = _series(cfg)
    jp = jump_params_or_limit(global_infinitesimal_moments(ts, cfg.lags))
    if "negative_b2" in jp.flags:
        log.warning("jump inversion gave a negative continuous part (b^2 < 0)")
    kio.write_jumps(args.out, [kio.jumps_row(ts.label, jp)])
    return 0


def cmd_pipeline(args):
    cfg = _resolve_config(args)
    if args.out_dir:
        cfg = cfg.with_overrides(out_dir=args.out_dir)
    if args.simulate or cfg.input is None:
        sim = _sim_from_args(args, cfg.sim or SimConfig(kind="OU", dt=0.01, n=38 * 500))
        cfg = cfg.with_overrides(sim=sim)
        cfg = PipelineConfig(**{**cfg.__dict__, "input": None})
    res = run_pipeline(cfg, args.workers)
    for w in res.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return 0


def _km_summary(label, path):
    _, rows = kio.read_dicts(path)
    d2, d4, diff = [], [], []
    for r in rows:
        if r["classification"] in ("diffusive", "jump"):
            d2.append(float(r["D2"]))
            d4.append(float(r["D4"]))
            diff.append(r["classification"] == "diffusive")
    if not d2:
        return [label, np.nan, np.nan, np.nan, np.nan, "undetermined"]
    frac = float(np.mean(diff))
    regime = "diffusive" if frac >= DIFFUSIVE_MAJORITY else "jump"
    return [label, float(np.percentile(d2, 5)), float(np.percentile(d2, 95)),
            float(np.percentile(d4, 95)), frac, regime]


def _report_label(path: Path) -> str:
    return path.parent.name if path.stem in ("km", "jumps", "stationarity") else path.stem


def cmd_report(args):
    paths = [Path(p) for p in args.inputs]
    kinds = {kio.sniff_kind(p) for p in paths}
    if len(kinds) != 1:
        raise KMJumpError(f"report inputs mix file kinds: {sorted(kinds)}")
    kind = kinds.pop()
    labels = args.labels.split(",") if args.labels else [_report_label(p) for p in paths]
    if len(labels) != len(paths):
        raise KMJumpError("--labels must name every input")
    if kind in ("stationarity", "jumps", "classical"):
        header, rows = None, []
        for path in paths:
            header, part = kio.read_table(path)
            rows.extend(r for _, r in part)
        kio.write_rows(args.out, header, rows)
    elif kind == "km":
        kio.write_rows(args.out, kio.REGIME_HEADER,
                       [_km_summary(lb, p) for lb, p in zip(labels, paths)])
    else:
        raise KMJumpError(f"report does not aggregate {kind} files")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kmjump", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="write a seeded synthetic series")
    _add_sim_flags(p)
    p.add_argument("--out", "-o", required=True)
    p.add_argument("--jump-log", help="also write the (step, size) jump log")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="fit a distribution family to every panel row")
    _add_config_flags(p, "input", "fit")
    p.add_argument("--out", "-o", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("detrend", help="remove intraday cycle and moving average")
    _add_config_flags(p, "input", "detrend")
    p.add_argument("--out", "-o", required=True)
    p.add_argument("--trend-out", help="also write the moving-average trend")
    p.set_defaults(func=cmd_detrend)

    p = sub.add_parser("stationarity", help="ADF and KPSS tests")
    _add_config_flags(p, "input", "stationarity")
    p.add_argument("--out", "-o", required=True)
    p.set_defaults(func=cmd_stationarity)

    p = sub.add_parser("markov", help="entropy and PACF Markov times")
    _add_config_flags(p, "input", "markov")
    p.add_argument("--out", "-o", required=True)
    p.set_defaults(func=cmd_markov)

    p = sub.add_parser("bins", help="zone-adaptive state-space bins")
    _add_config_flags(p, "input", "bins")
    p.add_argument("--out", "-o", required=True)
    p.add_argument("--classical-out", help="also write classical-rule bin counts")
    p.set_defaults(func=cmd_bins)

    p = sub.add_parser("km", help="Kramers-Moyal coefficients per bin")
    _add_config_flags(p, "input", "bins", "km")
    p.add_argument("--bins", help="reuse the edges of a bins CSV")
    p.add_argument("--out", "-o", required=True)
    p.add_argument("--moments-out", help="long-format raw moments for surface plots")
    p.set_defaults(func=cmd_km)

    p = sub.add_parser("jumps", help="global jump-parameter inversion")
    _add_config_flags(p, "input", "km")
    p.add_argument("--out", "-o", required=True)
    p.set_defaults(func=cmd_jumps)

    p = sub.add_parser("pipeline", help="run every stage and write a report bundle")
    _add_config_flags(p, "input", "fit", "detrend", "stationarity", "markov", "bins", "km")
    p.add_argument("--out-dir", help=f"output directory (default ${OUT_DIR_ENV} or kmjump_out)")
    p.add_argument("--simulate", action="store_true", help="analyse a simulated series")
    _add_sim_flags(p)
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("report", help="combine per-series CSVs into one table")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--labels", help="comma-separated labels, one per input")
    p.add_argument("--out", "-o", required=True)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except PipelineError as exc:
        print(f"kmjump: error: {exc}", file=sys.stderr)
        return 1
    except (KMJumpError, ValueError, OSError) as exc:
        print(f"kmjump {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
