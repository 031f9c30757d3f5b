"""End-to-end run: acquire -> detrend -> stationarity -> Markov -> bins -> KM -> jumps."""
from __future__ import annotations

import logging
import platform
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from . import io as kio
from .binning import adaptive_bins, grid_from_edges
from .config import PipelineConfig, to_ini
from .dist_fit import fit_cross_section
from .errors import KMJumpError
from .jumps import global_infinitesimal_moments, jump_params_or_limit
from .km import km_analysis
from .markov import markov_report
from .preprocess import detrend
from .series import TimeSeries
from .simulate import simulate
from .stationarity import stationarity_report

log = logging.getLogger(__name__)

OUTPUT_FILES = ("params.csv", "detrended.csv", "stationarity.csv", "markov.csv", "bins.csv",
                "km.csv", "moments_long.csv", "jumps.csv", "run_manifest.txt")


class PipelineError(KMJumpError):
    def __init__(self, module: str, label: str, cause: Exception):
        self.module, self.label, self.cause = module, label, cause
        super().__init__(f"[{module}] series {label!r}: {cause}")


@dataclass
class PipelineResult:
    out_dir: Path
    files: list = field(default_factory=list)
    series: TimeSeries | None = None
    detrended: TimeSeries | None = None
    km: object = None
    jumps: object = None
    markov: object = None
    warnings: list = field(default_factory=list)


def acquire(cfg: PipelineConfig, workers: int = 1):
    """The series to analyse, plus the fitted ParamSeries for panel input."""
    if cfg.input is None:
        if cfg.sim is None:
            raise KMJumpError("no input: give an input CSV or a [simulate] section")
        ts = simulate(cfg.sim)
        return TimeSeries(ts.values, ts.dt, cfg.points_per_day, cfg.label or ts.label), None
    kind = kio.sniff_kind(cfg.input)
    if kind == "panel":
        _, _, panel = kio.read_panel(cfg.input)
        ps = fit_cross_section(panel, cfg.family, cfg.points_per_day, workers)
        values = ps.phi if cfg.parameter == "phi" else ps.theta
        label = cfg.label or f"{ps.family.value}_{cfg.parameter}"
        return TimeSeries(values, cfg.dt, cfg.points_per_day, label), ps
    ts = kio.read_any_series(cfg.input, cfg.dt, cfg.label, cfg.parameter, cfg.points_per_day)
    return ts, None


def analysis_grid(series: TimeSeries, cfg: PipelineConfig, bins_path=None):
    if bins_path is not None:
        return grid_from_edges(series.values, kio.read_bin_edges(bins_path))
    return adaptive_bins(series, cfg.zone_targets)


def manifest_text(cfg: PipelineConfig) -> str:
    lines = ["# kmjump run manifest", to_ini(cfg).rstrip(), "", "[versions]",
             f"kmjump = {__version__}", f"python = {platform.python_version()}",
             f"numpy = {np.__version__}", f"scipy = {scipy.__version__}",
             "", "[defaults_flagged]",
             "moving_average = centred, symmetric shrinking window",
             f"adf_lag_rule = {'schwert' if cfg.adf_lags == 'auto' else 'fixed'}",
             f"kpss_bandwidth_rule = {'newey_west' if cfg.kpss_bandwidth == 'auto' else 'fixed'}",
             ""]
    return "\n".join(lines)


def run_pipeline(cfg: PipelineConfig, workers: int = 1) -> PipelineResult:
    """Run every stage and write the report bundle into ``cfg.out_dir``.

    On any failure the files written so far are removed and a
    :class:`PipelineError` naming the stage is raised.
    """
    out = Path(cfg.out_dir)
    created = not out.exists()
    res = PipelineResult(out)
    stage, label = "input", cfg.label or "series"
    try:
        series, params = acquire(cfg, workers)
        label = series.label
        res.series = series
        out.mkdir(parents=True, exist_ok=True)

        def emit(name, writer, *args):
            path = out / name
            res.files.append(path)
            writer(path, *args)

        if params is not None:
            stage = "dist_fit"
            emit("params.csv", kio.write_params, params)

        stage = "preprocess"
        fluct = detrend(series, cfg.window_days, cfg.detrend_order)
        res.detrended = fluct
        emit("detrended.csv", kio.write_series, fluct)

        stage = "stationarity"
        adf_lags = cfg.adf_lags
        kb = None if cfg.kpss_bandwidth == "auto" else cfg.kpss_bandwidth
        emit("stationarity.csv", kio.write_stationarity, [stationarity_report(fluct, adf_lags, kb)])

        stage = "markov"
        mrep = markov_report(fluct, cfg.entropy_threshold, cfg.entropy_bins, cfg.tau_max,
                             cfg.pacf_lags, workers)
        res.markov = mrep
        emit("markov.csv", kio.write_markov, mrep)
        if max(cfg.lags) >= mrep.tau_m:
            msg = (f"largest moment lag {max(cfg.lags)} is not below the Markov time "
                   f"{mrep.tau_m} (entropy {mrep.tau_m_entropy}, PACF {mrep.tau_m_pacf})")
            res.warnings.append(msg)
            log.warning(msg)

        stage = "binning"
        grid = analysis_grid(fluct, cfg)
        emit("bins.csv", kio.write_bins, grid)

        stage = "km"
        kmres = km_analysis(fluct, grid, cfg.lags, cfg.orders, cfg.min_occupancy, cfg.jump_floor)
        res.km = kmres
        emit("km.csv", kio.write_km, kmres)
        emit("moments_long.csv", kio.write_moments_long, kmres.table)

        stage = "jumps"
        jp = jump_params_or_limit(global_infinitesimal_moments(fluct, cfg.lags))
        res.jumps = jp
        if "negative_b2" in jp.flags:
            res.warnings.append("jump inversion gave a negative continuous part (b^2 < 0)")
            log.warning(res.warnings[-1])
        emit("jumps.csv", kio.write_jumps, [kio.jumps_row(label, jp)])

        stage = "manifest"
        emit("run_manifest.txt", lambda p: Path(p).write_text(manifest_text(cfg)))
    except (KMJumpError, ValueError, OSError, np.linalg.LinAlgError) as exc:
        kio.remove_quietly(res.files)
        if created and out.exists():
            try:
                out.rmdir()
            except OSError:
                pass
        if isinstance(exc, PipelineError):
            raise
        raise PipelineError(stage, label, exc) from exc
    return res
