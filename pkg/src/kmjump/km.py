"""Kramers-Moyal estimation on a binned state space.

Pipeline per bin: raw conditional increment moments ``K(n, x, tau)`` over a
set of lags, an OLS fit of ``K / (tau dt)`` against ``tau dt`` whose
intercept is the infinitesimal moment ``M(n, x)``, finite-lag corrections
``F(n)``, and ``D(n) = F(n) / n!``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .binning import BinGrid
from .errors import DomainError
from .series import TimeSeries

ORDERS = (1, 2, 3, 4, 5, 6)
DEFAULT_LAGS = (1, 2, 3, 4, 5, 6)
DEFAULT_MIN_OCCUPANCY = 50
PAWULA_THRESHOLD = 0.1
EXACT_FIT_RSS = 1e-30
FACTORIALS = np.array([math.factorial(n) for n in ORDERS], dtype=float)


@dataclass(frozen=True)
class MomentTable:
    """``K[order - 1, bin, lag_index]``; NaN marks an absent cell."""

    K: np.ndarray
    occupancy: np.ndarray  # [bin, lag_index]
    lags: tuple
    dt: float
    orders: tuple = ORDERS
    min_occupancy: int = DEFAULT_MIN_OCCUPANCY


@dataclass(frozen=True)
class Regression:
    """Per-bin OLS results, arrays shaped ``[bin, order - 1]``."""

    M: np.ndarray
    beta: np.ndarray
    r2: np.ndarray
    sigma_intercept: np.ndarray
    n_lags: np.ndarray


@dataclass(frozen=True)
class KMCoefficients:
    D: np.ndarray
    ratio: np.ndarray
    classification: np.ndarray
    ratio_defined: np.ndarray


@dataclass(frozen=True)
class KMResult:
    centers: np.ndarray
    occupancy: np.ndarray  # samples per bin at the first lag
    M: np.ndarray
    beta: np.ndarray
    r2: np.ndarray
    sigma_intercept: np.ndarray
    sigma_w: np.ndarray
    F: np.ndarray
    D: np.ndarray
    ratio: np.ndarray
    classification: np.ndarray
    ratio_defined: np.ndarray
    table: MomentTable | None = None


def raw_conditional_moments(series: TimeSeries, grid: BinGrid, orders=ORDERS,
                            lags=DEFAULT_LAGS, min_occupancy: int = DEFAULT_MIN_OCCUPANCY,
                            dt: float | None = None) -> MomentTable:
    """Mean ``n``-th power of ``x[t + tau] - x[t]`` over starts ``x[t]`` in each bin.

    Increments that would run past the end of the series are excluded.
    Cells with fewer than ``min_occupancy`` starts are NaN.
    """
    x = series.values if isinstance(series, TimeSeries) else np.asarray(series, dtype=float)
    dt = (series.dt if isinstance(series, TimeSeries) else 1.0) if dt is None else float(dt)
    lags = tuple(int(t) for t in lags)
    orders = tuple(sorted(set(int(o) for o in orders)))
    if not lags or min(lags) < 1:
        raise DomainError("lags must be a nonempty set of integers >= 1")
    if max(lags) >= x.size:
        raise DomainError(f"lag {max(lags)} is not shorter than the series ({x.size})")
    if not set(orders) <= set(ORDERS):
        raise DomainError("orders must be a subset of 1..6")

    nb = grid.n_bins
    start_bin = grid.assign(x)
    K = np.full((len(ORDERS), nb, len(lags)), np.nan)
    occ = np.zeros((nb, len(lags)), dtype=np.int64)
    for j, tau in enumerate(lags):
        b = start_bin[:-tau]
        keep = b >= 0
        b = b[keep]
        inc = (x[tau:] - x[:-tau])[keep]
        counts = np.bincount(b, minlength=nb)
        occ[:, j] = counts
        good = counts >= max(min_occupancy, 1)
        power = np.ones_like(inc)
        for n in range(1, max(orders) + 1):
            power = power * inc
            if n in orders:
                sums = np.bincount(b, weights=power, minlength=nb)
                K[n - 1, good, j] = sums[good] / counts[good]
    return MomentTable(K, occ, lags, dt, orders, min_occupancy)


def infinitesimal_moments(table: MomentTable) -> Regression:
    """OLS of ``K / (tau dt)`` on ``tau dt`` per (bin, order); intercept is ``M``.

    Pairs with fewer than three populated lags are NaN.  A residual sum of
    squares below 1e-30 counts as an exact fit: ``r2 = 1`` and a zero
    intercept error.
    """
    if not table.dt > 0:
        raise DomainError("dt must be positive")
    xs = np.asarray(table.lags, dtype=float) * table.dt
    y = table.K / xs  # [order, bin, lag]
    w = np.isfinite(y)
    yz = np.where(w, y, 0.0)
    m = w.sum(axis=-1).astype(float)
    with np.errstate(invalid="ignore", divide="ignore"):
        xbar = (w * xs).sum(axis=-1) / m
        ybar = yz.sum(axis=-1) / m
        dx = np.where(w, xs - xbar[..., None], 0.0)
        dy = np.where(w, yz - ybar[..., None], 0.0)
        sxx = (dx * dx).sum(axis=-1)
        sxy = (dx * dy).sum(axis=-1)
        syy = (dy * dy).sum(axis=-1)
        beta = sxy / sxx
        alpha = ybar - beta * xbar
        resid = np.where(w, yz - alpha[..., None] - beta[..., None] * xs, 0.0)
        rss = (resid * resid).sum(axis=-1)
        exact = rss < EXACT_FIT_RSS
        r2 = np.where(exact, 1.0, 1.0 - rss / syy)
        r2 = np.clip(r2, 0.0, 1.0)
        se = np.sqrt(rss / (m - 2) * (1.0 / m + xbar * xbar / sxx))
        se = np.where(exact, 0.0, se)
    absent = (m < 3) | ~(sxx > 0)
    out = [np.where(absent, np.nan, a).T for a in (alpha, beta, r2, se)]
    return Regression(*out, n_lags=m.T.astype(np.int64))


def correct_moments(M, dt: float = 1.0) -> np.ndarray:
    """Finite-lag corrected moments ``F1..F6`` from ``M1..M6`` (last axis).

    The polynomial corrections act on per-step moments ``M dt``; the result
    is rescaled by ``1 / dt``.  With ``dt = 1`` this is the plain polynomial.
    NaN inputs propagate.
    """
    M = np.asarray(M, dtype=float)
    if M.shape[-1] != 6:
        raise DomainError("correct_moments needs six moments on the last axis")
    m1, m2, m3, m4, m5, m6 = np.moveaxis(M * dt, -1, 0)
    f1 = m1
    f2 = m2 - m1 ** 2
    f3 = m3 - 3 * m1 * m2 + 3 * m1 ** 3
    f4 = m4 - 4 * m1 * m3 + 18 * m1 ** 2 * m2 - 3 * m2 ** 2 - 15 * m1 ** 4
    f5 = (m5 - 5 * m1 * m4 + 30 * m1 ** 2 * m3 - 150 * m1 ** 3 * m2
          + 45 * m1 * m2 ** 2 - 10 * m2 * m3 + 105 * m1 ** 5)
    f6 = (m6 - 6 * m1 * m5 + 45 * m1 ** 2 * m4 - 300 * m1 ** 3 * m3
          + 1575 * m1 ** 4 * m2 - 675 * m1 ** 2 * m2 ** 2 + 180 * m1 * m2 * m3
          + 45 * m2 ** 3 - 15 * m2 * m4 - 10 * m3 ** 2 - 945 * m1 ** 6)
    return np.stack([f1, f2, f3, f4, f5, f6], axis=-1) / dt


def km_coefficients(F, jump_floor: float = 0.0, threshold: float = PAWULA_THRESHOLD) -> KMCoefficients:
    """``D = F / n!``, the ratio ``D4 / D2`` and a diffusive/jump label.

    The label is "diffusive" iff the ratio is strictly below ``threshold``.
    With ``D2 <= 0`` the ratio is undefined (NaN): the label is "jump" if
    ``D4 > jump_floor``, otherwise "indeterminate".  NaN inputs give "absent".
    """
    F = np.asarray(F, dtype=float)
    D = F / FACTORIALS
    d2, d4 = D[..., 1], D[..., 3]
    defined = d2 > 0
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(defined, d4 / np.where(defined, d2, 1.0), np.nan)
    label = np.where(ratio < threshold, "diffusive", "jump").astype(object)
    label = np.where(~defined, np.where(d4 > jump_floor, "jump", "indeterminate"), label)
    label = np.where(np.isnan(d2) | np.isnan(d4), "absent", label)
    return KMCoefficients(D, ratio, label, defined)


def weighted_errors(sigma_intercept, r2) -> np.ndarray:
    """``sigma_w = sigma_intercept * sqrt(1 - R^2)``."""
    s = np.asarray(sigma_intercept, dtype=float)
    r2 = np.asarray(r2, dtype=float)
    return s * np.sqrt(np.clip(1.0 - r2, 0.0, 1.0))


def km_analysis(series: TimeSeries, grid: BinGrid, lags=DEFAULT_LAGS, orders=ORDERS,
                min_occupancy: int = DEFAULT_MIN_OCCUPANCY, jump_floor: float = 0.0,
                dt: float | None = None) -> KMResult:
    """Run the full estimator on one series over a fixed grid."""
    table = raw_conditional_moments(series, grid, orders, lags, min_occupancy, dt)
    reg = infinitesimal_moments(table)
    F = correct_moments(reg.M, table.dt)
    coef = km_coefficients(F, jump_floor)
    return KMResult(grid.centers, table.occupancy[:, 0], reg.M, reg.beta, reg.r2,
                    reg.sigma_intercept, weighted_errors(reg.sigma_intercept, reg.r2),
                    F, coef.D, coef.ratio, coef.classification, coef.ratio_defined, table)
