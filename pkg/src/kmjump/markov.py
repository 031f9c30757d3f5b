"""Markov-time estimation from conditional-entropy saturation and the PACF."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDataError, DomainError, InsufficientDataError
from .series import as_array

DEFAULT_THRESHOLD = 0.005
DEFAULT_TAU_MAX = 20
DEFAULT_ENTROPY_BINS = 30
DEFAULT_PACF_LAGS = 20


@dataclass(frozen=True)
class MarkovReport:
    entropy_curve: list  # (tau, H) for tau = 1..tau_max + 1
    tau_m_entropy: int
    entropy_saturated: bool
    pacf: np.ndarray  # lags 1..max_lag
    pacf_bound: float
    tau_m_pacf: int
    pacf_saturated: bool
    acf: np.ndarray  # lags 1..max_lag

    @property
    def tau_m(self) -> int:
        """The larger of the two estimates; this gates the moment lags."""
        return max(self.tau_m_entropy, self.tau_m_pacf)


def conditional_entropy_from_counts(joint) -> float:
    """``H(Y | X)`` in nats from a joint count table indexed ``[x, y]``."""
    joint = np.asarray(joint, dtype=float)
    total = joint.sum()
    if total <= 0:
        raise DomainError("empty joint histogram")
    p = joint / total
    px = p.sum(axis=1)
    nz = p > 0
    # H(Y|X) = H(X, Y) - H(X), with 0 log 0 := 0
    h_xy = -float(np.sum(p[nz] * np.log(p[nz])))
    pxn = px[px > 0]
    h_x = -float(np.sum(pxn * np.log(pxn)))
    return max(h_xy - h_x, 0.0)


def _binned(x: np.ndarray, n_bins: int) -> np.ndarray:
    lo, hi = x.min(), x.max()
    idx = np.floor((x - lo) / (hi - lo) * n_bins).astype(np.int64)
    return np.minimum(idx, n_bins - 1)


def _check_entropy_args(n: int, tau: int, n_bins: int) -> None:
    if tau < 1:
        raise DomainError("tau must be >= 1")
    if n_bins < 2:
        raise DomainError("n_bins must be >= 2")
    if n <= tau + 1:
        raise InsufficientDataError(f"series of length {n} too short for tau={tau}")
    if n - tau < n_bins * n_bins / 10:
        raise InsufficientDataError(
            f"{n - tau} pairs are too few for a {n_bins}x{n_bins} histogram")


def _entropy_at(codes: np.ndarray, tau: int, n_bins: int) -> float:
    pair = codes[:-tau] * n_bins + codes[tau:]
    joint = np.bincount(pair, minlength=n_bins * n_bins).reshape(n_bins, n_bins)
    return conditional_entropy_from_counts(joint)


def conditional_entropy(series, tau: int, n_bins: int = DEFAULT_ENTROPY_BINS) -> float:
    """``H(x[t+tau] | x[t])`` from an equal-width joint histogram over [min, max]."""
    x = as_array(series)
    _check_entropy_args(x.size, tau, n_bins)
    if x.max() == x.min():
        return 0.0
    return _entropy_at(_binned(x, n_bins), tau, n_bins)


def entropy_curve(series, tau_max: int = DEFAULT_TAU_MAX, n_bins: int = DEFAULT_ENTROPY_BINS,
                  workers: int = 1) -> np.ndarray:
    """``H(tau)`` for ``tau = 1 .. tau_max + 1``."""
    x = as_array(series)
    taus = range(1, tau_max + 2)
    for tau in taus:
        _check_entropy_args(x.size, tau, n_bins)
    if x.max() == x.min():
        return np.zeros(len(taus))
    codes = _binned(x, n_bins)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return np.array(list(pool.map(lambda t: _entropy_at(codes, t, n_bins), taus)))
    return np.array([_entropy_at(codes, t, n_bins) for t in taus])


def _first_tau_below(h: np.ndarray, threshold: float):
    slopes = np.diff(h)
    hits = np.flatnonzero(slopes < threshold)
    if hits.size == 0:
        return slopes.size, True
    return int(hits[0]) + 1, False


def markov_time_entropy(series, threshold: float = DEFAULT_THRESHOLD,
                        n_bins: int = DEFAULT_ENTROPY_BINS,
                        tau_max: int = DEFAULT_TAU_MAX) -> int:
    """Smallest tau with ``H(tau+1) - H(tau) < threshold``; ``tau_max`` if none."""
    if not threshold > 0:
        raise DomainError("threshold must be positive")
    return _first_tau_below(entropy_curve(series, tau_max, n_bins), threshold)[0]


def autocovariance(x: np.ndarray, max_lag: int) -> np.ndarray:
    """Biased (1/N) sample autocovariances at lags 0..max_lag."""
    e = x - x.mean()
    n = e.size
    return np.array([float(e[k:] @ e[:n - k]) / n for k in range(max_lag + 1)])


def acf(series, max_lag: int = DEFAULT_PACF_LAGS) -> np.ndarray:
    x = as_array(series)
    g = autocovariance(x, max_lag)
    if g[0] <= 0:
        raise DegenerateDataError("zero-variance series has no autocorrelation")
    return g[1:] / g[0]


def levinson_durbin(gamma: np.ndarray) -> np.ndarray:
    """Partial autocorrelations at lags 1..p from autocovariances at 0..p."""
    p = gamma.size - 1
    pacf = np.empty(p)
    phi = np.zeros(0)
    err = gamma[0]
    for k in range(1, p + 1):
        refl = (gamma[k] - phi @ gamma[k - 1:0:-1]) / err if k > 1 else gamma[1] / gamma[0]
        phi = np.concatenate((phi - refl * phi[::-1], [refl]))
        err *= 1.0 - refl * refl
        pacf[k - 1] = refl
    return pacf


def pacf_yule_walker(series, max_lag: int = DEFAULT_PACF_LAGS) -> np.ndarray:
    """PACF at lags 1..max_lag via Levinson-Durbin on sample autocovariances."""
    x = as_array(series)
    if max_lag < 1:
        raise DomainError("max_lag must be >= 1")
    if x.size <= 3 * max_lag:
        raise InsufficientDataError(f"PACF to lag {max_lag} needs more than {3 * max_lag} points")
    g = autocovariance(x, max_lag)
    if g[0] <= 0:
        raise DegenerateDataError("zero-variance series has no autocorrelation")
    return levinson_durbin(g)


def pacf_bound(n: int) -> float:
    return 1.96 / math.sqrt(n)


def _first_pacf_inside(pacf: np.ndarray, bound: float):
    inside = np.flatnonzero(np.abs(pacf) < bound)
    if inside.size == 0:
        return pacf.size, True
    return int(inside[0]) + 1, False


def markov_time_pacf(series, max_lag: int = DEFAULT_PACF_LAGS) -> int:
    """First lag whose PACF lies inside +-1.96/sqrt(N); ``max_lag`` if none."""
    x = as_array(series)
    return _first_pacf_inside(pacf_yule_walker(x, max_lag), pacf_bound(x.size))[0]


def markov_report(series, threshold: float = DEFAULT_THRESHOLD,
                  n_bins: int = DEFAULT_ENTROPY_BINS, tau_max: int = DEFAULT_TAU_MAX,
                  max_lag: int = DEFAULT_PACF_LAGS, workers: int = 1) -> MarkovReport:
    x = as_array(series)
    h = entropy_curve(x, tau_max, n_bins, workers)
    tau_e, sat_e = _first_tau_below(h, threshold)
    pacf = pacf_yule_walker(x, max_lag)
    bound = pacf_bound(x.size)
    tau_p, sat_p = _first_pacf_inside(pacf, bound)
    curve = [(t + 1, float(v)) for t, v in enumerate(h)]
    return MarkovReport(curve, tau_e, sat_e, pacf, bound, tau_p, sat_p, acf(x, max_lag))
