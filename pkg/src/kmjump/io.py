"""CSV readers and writers for every file the pipeline consumes or emits.

Floats are written with 17 significant digits so that every value
round-trips exactly.
"""
from __future__ import annotations

import csv
import os
from pathlib import Path

import numpy as np

from .errors import CSVFormatError
from .series import TimeSeries

SERIES_HEADER = ["day", "idx", "value"]
PARAMS_HEADER = ["t", "phi", "theta", "converged"]
BINS_HEADER = ["bin_index", "left_edge", "right_edge", "center", "count", "zone"]
STATIONARITY_HEADER = ["label", "adf_t", "adf_p", "kpss_stat", "kpss_p",
                       "adf_lags", "adf_p_floored", "kpss_bandwidth", "kpss_p_flag", "verdict"]
MARKOV_HEADER = ["record", "tau", "H", "dH", "pacf", "acf",
                 "tau_m_entropy", "tau_m_pacf", "pacf_bound", "entropy_saturated", "pacf_saturated"]
JUMPS_HEADER = ["label", "lambda", "sigma_xi", "M2", "D_jump", "D_continuous", "f_jump", "flags"]
MOMENTS_HEADER = ["bin", "order", "lag", "K", "occupancy"]
KM_HEADER = (["bin", "center", "occupancy"] + [f"M{n}" for n in range(1, 7)]
             + [f"F{n}" for n in range(1, 7)] + [f"D{n}" for n in range(1, 7)]
             + [f"sigma_w{n}" for n in range(1, 7)] + ["ratio", "classification"])
CLASSICAL_HEADER = ["label", "FreedmanDiaconis", "Scott", "Sturges", "Doane"]
REGIME_HEADER = ["label", "D2_p05", "D2_p95", "D4_p95", "diffusive_fraction", "regime"]


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if np.isnan(v):
            return "nan"
        return format(v, ".17g")
    return str(value)


def write_rows(path, header, rows) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def read_table(path):
    """Header and rows of a CSV file, each row tagged with its line number."""
    path = Path(path)
    if not path.is_file():
        raise CSVFormatError("file not found", path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CSVFormatError("empty file, header row required", path, 1) from None
        header = [h.strip() for h in header]
        rows = [(reader.line_num, row) for row in reader if row]
    for line, row in rows:
        if len(row) != len(header):
            raise CSVFormatError(f"expected {len(header)} fields, found {len(row)}", path, line)
    return header, rows


def _float(cell, path, line, allow_empty=False):
    cell = cell.strip()
    if cell == "":
        if allow_empty:
            return np.nan
        raise CSVFormatError("empty cell", path, line)
    try:
        return float(cell)
    except ValueError:
        raise CSVFormatError(f"not a number: {cell!r}", path, line) from None


def _int(cell, path, line):
    try:
        return int(cell.strip())
    except ValueError:
        raise CSVFormatError(f"not an integer: {cell!r}", path, line) from None


def sniff_kind(path) -> str:
    """Which of the known CSV layouts a file uses, from its header."""
    header, _ = read_table(path)
    known = {"series": SERIES_HEADER, "params": PARAMS_HEADER, "bins": BINS_HEADER,
             "stationarity": STATIONARITY_HEADER, "markov": MARKOV_HEADER,
             "jumps": JUMPS_HEADER, "km": KM_HEADER, "moments": MOMENTS_HEADER,
             "classical": CLASSICAL_HEADER, "regime": REGIME_HEADER}
    for kind, cols in known.items():
        if header == cols:
            return kind
    if header and header[0] == "t" and len(header) >= 2:
        return "panel"
    raise CSVFormatError(f"unrecognised header {header}", path, 1)


# --- panel / params / series -------------------------------------------------

def read_panel(path):
    """``(t, entities, matrix)``; empty cells are NaN."""
    header, rows = read_table(path)
    if not header or header[0] != "t" or len(header) < 2:
        raise CSVFormatError("panel header must be 't' followed by entity columns", path, 1)
    if not rows:
        raise CSVFormatError("panel has no data rows", path, 2)
    t = np.array([_int(r[0], path, ln) for ln, r in rows])
    mat = np.array([[_float(c, path, ln, allow_empty=True) for c in r[1:]] for ln, r in rows])
    return t, header[1:], mat


def write_params(path, ps) -> Path:
    rows = ((t, p, th, ok) for t, (p, th, ok) in enumerate(zip(ps.phi, ps.theta, ps.converged)))
    return write_rows(path, PARAMS_HEADER, rows)


def read_params(path):
    header, rows = read_table(path)
    if header != PARAMS_HEADER:
        raise CSVFormatError(f"expected header {PARAMS_HEADER}", path, 1)
    phi = np.array([_float(r[1], path, ln) for ln, r in rows])
    theta = np.array([_float(r[2], path, ln) for ln, r in rows])
    ok = np.array([_int(r[3], path, ln) != 0 for ln, r in rows])
    return phi, theta, ok


def write_series(path, series: TimeSeries) -> Path:
    ppd = series.points_per_day
    rows = ((k // ppd, k % ppd, v) for k, v in enumerate(series.values))
    return write_rows(path, SERIES_HEADER, rows)


def read_series(path, dt: float = 1.0, label: str | None = None,
                points_per_day: int | None = None) -> TimeSeries:
    """Read ``day,idx,value`` rows on a contiguous (day, idx) grid."""
    header, rows = read_table(path)
    if header != SERIES_HEADER:
        raise CSVFormatError(f"expected header {SERIES_HEADER}", path, 1)
    if len(rows) < 2:
        raise CSVFormatError("series needs at least 2 rows", path, len(rows) + 1)
    days = [_int(r[0], path, ln) for ln, r in rows]
    idx = [_int(r[1], path, ln) for ln, r in rows]
    values = np.array([_float(r[2], path, ln) for ln, r in rows])
    ppd = points_per_day or (max(idx) + 1)
    day0 = days[0]
    for k, (ln, _) in enumerate(rows):
        if k == 0 and idx[0] != 0:
            raise CSVFormatError("series must start at intraday index 0", path, ln)
        if days[k] != day0 + k // ppd or idx[k] != k % ppd:
            raise CSVFormatError(
                f"row out of (day, idx) order: expected ({day0 + k // ppd}, {k % ppd}), "
                f"got ({days[k]}, {idx[k]})", path, ln)
    if not np.all(np.isfinite(values)):
        bad = int(np.flatnonzero(~np.isfinite(values))[0])
        raise CSVFormatError("non-finite value", path, rows[bad][0])
    return TimeSeries(values, dt, ppd, label or Path(path).stem)


def read_any_series(path, dt=1.0, label=None, parameter="phi", points_per_day=None) -> TimeSeries:
    """A TimeSeries from either a series CSV or a params CSV (one column)."""
    kind = sniff_kind(path)
    if kind == "series":
        return read_series(path, dt, label, points_per_day)
    if kind == "params":
        phi, theta, _ = read_params(path)
        vals = phi if parameter == "phi" else theta
        return TimeSeries(vals, dt, points_per_day or 38, label or f"{Path(path).stem}_{parameter}")
    raise CSVFormatError(f"expected a series or params CSV, found {kind}", path, 1)


def write_jump_log(path, log) -> Path:
    return write_rows(path, ["step", "size"], log)


# --- analysis outputs ------------------------------------------------------------

def write_bins(path, grid) -> Path:
    rows = ((i, grid.edges[i], grid.edges[i + 1], c, n, z)
            for i, (c, n, z) in enumerate(zip(grid.centers, grid.counts, grid.zones)))
    return write_rows(path, BINS_HEADER, rows)


def read_bin_edges(path) -> np.ndarray:
    header, rows = read_table(path)
    if header != BINS_HEADER:
        raise CSVFormatError(f"expected header {BINS_HEADER}", path, 1)
    left = [_float(r[1], path, ln) for ln, r in rows]
    right = _float(rows[-1][1][2], path, rows[-1][0])
    return np.array(left + [right])


def stationarity_row(rep):
    return [rep.label, rep.adf.t_stat, rep.adf.p_value, rep.kpss.stat, rep.kpss.p_value,
            rep.adf.lags_used, rep.adf.p_floored, rep.kpss.bandwidth,
            "cap" if rep.kpss.p_capped else ("floor" if rep.kpss.p_floored else ""),
            rep.verdict]


def write_stationarity(path, reports) -> Path:
    return write_rows(path, STATIONARITY_HEADER, [stationarity_row(r) for r in reports])


def write_markov(path, rep) -> Path:
    h = [v for _, v in rep.entropy_curve]
    rows = []
    for i, (tau, hv) in enumerate(rep.entropy_curve):
        dh = h[i + 1] - hv if i + 1 < len(h) else np.nan
        pacf = rep.pacf[i] if i < rep.pacf.size else np.nan
        acf = rep.acf[i] if i < rep.acf.size else np.nan
        rows.append(["curve", tau, hv, dh, pacf, acf, "", "", "", "", ""])
    rows.append(["summary", "", "", "", "", "", rep.tau_m_entropy, rep.tau_m_pacf,
                 rep.pacf_bound, rep.entropy_saturated, rep.pacf_saturated])
    return write_rows(path, MARKOV_HEADER, rows)


def write_km(path, res) -> Path:
    rows = []
    for b in range(res.centers.size):
        rows.append([b, res.centers[b], res.occupancy[b], *res.M[b], *res.F[b], *res.D[b],
                     *res.sigma_w[b], res.ratio[b], res.classification[b]])
    return write_rows(path, KM_HEADER, rows)


def write_moments_long(path, table) -> Path:
    rows = []
    nb = table.occupancy.shape[0]
    for b in range(nb):
        for n in table.orders:
            for j, tau in enumerate(table.lags):
                rows.append([b, n, tau, table.K[n - 1, b, j], table.occupancy[b, j]])
    return write_rows(path, MOMENTS_HEADER, rows)


def jumps_row(label, p):
    return [label, p.lam, p.sigma_xi, p.m2, p.d_jump, p.m2 - p.d_jump, p.f_jump, ";".join(p.flags)]


def write_jumps(path, rows) -> Path:
    return write_rows(path, JUMPS_HEADER, rows)


def read_dicts(path):
    header, rows = read_table(path)
    return header, [dict(zip(header, r)) for _, r in rows]


def remove_quietly(paths) -> None:
    for p in paths:
        try:
            os.remove(p)
        except OSError:
            pass
