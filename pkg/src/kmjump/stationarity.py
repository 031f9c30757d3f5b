"""ADF unit-root and KPSS level-stationarity tests."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .errors import DegenerateDataError, InsufficientDataError
from .series import TimeSeries, as_array

ADF_P_FLOOR = 1e-4

# MacKinnon (1994) response surface, constant-only regression, one I(1) series.
_TAU_MAX = 2.74
_TAU_MIN = -18.83
_TAU_STAR = -1.61
_TAU_SMALLP = (2.1659, 1.4412, 0.038269)
_TAU_LARGEP = (1.7339, 0.93202, -0.12745, -0.010368)

# KPSS level-stationarity critical values (stat, p)
_KPSS_CRIT = ((0.347, 0.10), (0.463, 0.05), (0.574, 0.025), (0.739, 0.01))

_CHUNK = 65536


@dataclass(frozen=True)
class ADFResult:
    t_stat: float
    p_value: float
    lags_used: int
    nobs: int
    p_floored: bool = False
    p_capped: bool = False

    def __iter__(self):
        return iter((self.t_stat, self.p_value, self.lags_used))


@dataclass(frozen=True)
class KPSSResult:
    stat: float
    p_value: float
    bandwidth: int
    p_floored: bool = False
    p_capped: bool = False

    def __iter__(self):
        return iter((self.stat, self.p_value))


@dataclass(frozen=True)
class StationarityReport:
    label: str
    adf: ADFResult
    kpss: KPSSResult

    @property
    def verdict(self) -> str:
        adf_rejects = self.adf.p_value < 0.05
        kpss_ok = self.kpss.p_value >= 0.05
        if adf_rejects and kpss_ok:
            return "stationary"
        if not adf_rejects and not kpss_ok:
            return "nonstationary"
        return "ambiguous"


def schwert_lags(n: int) -> int:
    return int(math.floor(12.0 * (n / 100.0) ** 0.25))


def newey_west_bandwidth(n: int) -> int:
    return int(math.floor(4.0 * (n / 100.0) ** 0.25))


def mackinnon_p(t_stat: float) -> float:
    """Approximate asymptotic p-value of the constant-only ADF t statistic."""
    if t_stat > _TAU_MAX:
        return 1.0
    if t_stat < _TAU_MIN:
        return 0.0
    coef = _TAU_SMALLP if t_stat <= _TAU_STAR else _TAU_LARGEP
    poly = sum(c * t_stat ** i for i, c in enumerate(coef))
    return float(norm.cdf(poly))


def _adf_design(x: np.ndarray, lags: int, start: int, stop: int):
    """Rows ``start:stop`` of the ADF regression (response, regressors)."""
    dx = np.diff(x)
    rows = np.arange(start, stop)  # row r explains dx[r + lags]
    y = dx[rows + lags]
    cols = [np.ones(rows.size), x[rows + lags]]
    for i in range(1, lags + 1):
        cols.append(dx[rows + lags - i])
    return y, np.column_stack(cols)


def adf_test(series, max_lags: int | str | None = "auto") -> ADFResult:
    """Augmented Dickey-Fuller test with a constant and a fixed lag order.

    ``max_lags="auto"`` uses Schwert's rule ``floor(12 (N/100)^(1/4))``.
    The p-value is floored at 1e-4 and flagged.
    """
    x = as_array(series)
    n = x.size
    lags = schwert_lags(n) if max_lags in (None, "auto") else int(max_lags)
    if lags < 0:
        raise ValueError("max_lags must be >= 0")
    if n < 20 + lags:
        raise InsufficientDataError(f"ADF needs at least {20 + lags} points, got {n}")
    nobs = n - 1 - lags
    k = lags + 2

    # normal equations accumulated in chunks to bound memory at large N
    xtx = np.zeros((k, k))
    xty = np.zeros(k)
    for s in range(0, nobs, _CHUNK):
        y, X = _adf_design(x, lags, s, min(nobs, s + _CHUNK))
        xtx += X.T @ X
        xty += X.T @ y
    scale = np.sqrt(np.diag(xtx))
    if np.any(scale == 0):
        raise DegenerateDataError("ADF regressors are collinear (constant series?)")
    xtx_s = xtx / np.outer(scale, scale)
    if np.linalg.cond(xtx_s) > 1e12:
        raise DegenerateDataError("ADF regressors are collinear (constant series?)")
    beta = np.linalg.solve(xtx_s, xty / scale) / scale
    rss = 0.0
    for s in range(0, nobs, _CHUNK):
        y, X = _adf_design(x, lags, s, min(nobs, s + _CHUNK))
        r = y - X @ beta
        rss += float(r @ r)
    dof = nobs - k
    if dof <= 0 or rss <= 0:
        raise DegenerateDataError("ADF regression has no residual variance")
    cov_gamma = (rss / dof) * np.linalg.inv(xtx_s)[1, 1] / scale[1] ** 2
    t_stat = float(beta[1] / math.sqrt(cov_gamma))
    p = mackinnon_p(t_stat)
    floored = p < ADF_P_FLOOR
    capped = t_stat > _TAU_MAX
    return ADFResult(t_stat, max(p, ADF_P_FLOOR), lags, nobs, floored, capped)


def kpss_p_value(stat: float):
    """Interpolated p-value, capped at 0.1 and floored at 0.01."""
    stats = [c for c, _ in _KPSS_CRIT]
    ps = [p for _, p in _KPSS_CRIT]
    p = float(np.interp(stat, stats, ps))
    return p, stat > stats[-1], stat < stats[0]


def kpss_test(series, bandwidth: int | None = None) -> KPSSResult:
    """KPSS level-stationarity test with a Bartlett long-run variance."""
    x = as_array(series)
    n = x.size
    if n < 20:
        raise InsufficientDataError(f"KPSS needs at least 20 points, got {n}")
    lags = newey_west_bandwidth(n) if bandwidth is None else int(bandwidth)
    e = x - x.mean()
    s = np.cumsum(e)
    lrv = float(e @ e) / n
    for j in range(1, lags + 1):
        lrv += 2.0 * (1.0 - j / (lags + 1.0)) * float(e[j:] @ e[:-j]) / n
    if not lrv > 0:
        raise DegenerateDataError("KPSS long-run variance is not positive (constant series?)")
    stat = float(s @ s) / (n * n * lrv)
    p, floored, capped = kpss_p_value(stat)
    return KPSSResult(stat, p, lags, floored, capped)


def stationarity_report(series: TimeSeries, adf_lags="auto", kpss_bandwidth=None) -> StationarityReport:
    return StationarityReport(series.label, adf_test(series, adf_lags),
                              kpss_test(series, kpss_bandwidth))
