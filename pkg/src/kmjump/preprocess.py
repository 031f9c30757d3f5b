"""Removal of the slow seasonal trend and the deterministic intraday cycle."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import DomainError, InsufficientDataError
from .series import TimeSeries

DEFAULT_WINDOW_DAYS = 21
DEFAULT_POINTS_PER_DAY = 38
ORDERS = ("intraday_first", "ma_first", "intraday_only", "ma_only", "none")


@dataclass(frozen=True)
class IntradayProfile:
    means: np.ndarray
    cubic_coeffs: np.ndarray  # a0..a3, ascending powers of the intraday index

    def evaluate(self, idx) -> np.ndarray:
        return P.polyval(np.asarray(idx, dtype=float), self.cubic_coeffs)


def moving_average_detrend(series: TimeSeries, window_days: int = DEFAULT_WINDOW_DAYS):
    """Split ``series`` into a centred moving-average trend and fluctuations.

    The window spans ``2 * (window_days * points_per_day // 2) + 1`` points
    centred on each sample; near the ends it shrinks symmetrically so that
    every output point is still a centred average.

    Returns
    -------
    (trend, fluct) : tuple of TimeSeries
    """
    if window_days < 1:
        raise DomainError("window_days must be >= 1")
    x = series.values
    n = x.size
    width = window_days * series.points_per_day
    if n < width:
        raise InsufficientDataError(
            f"series {series.label!r} has {n} points, shorter than one {width}-point window")
    half = width // 2
    # demeaning first keeps the running sums small, so adding a constant to
    # the input changes the fluctuations only at rounding level
    level = x.mean()
    y = x - level
    csum = np.concatenate(([0.0], np.cumsum(y)))
    t = np.arange(n)
    reach = np.minimum(half, np.minimum(t, n - 1 - t))
    trend = (csum[t + reach + 1] - csum[t - reach]) / (2 * reach + 1)
    fluct = y - trend
    return (series.with_values(trend + level, f"{series.label}_trend"),
            series.with_values(fluct, series.label))


def intraday_profile(series: TimeSeries) -> IntradayProfile:
    """Across-day mean at each intraday index and its least-squares cubic."""
    ppd = series.points_per_day
    x = series.values
    if x.size % ppd:
        raise DomainError(f"length {x.size} is not a multiple of points_per_day={ppd}")
    means = x.reshape(-1, ppd).mean(axis=0)
    deg = min(3, ppd - 1)
    coeffs = np.zeros(4)
    coeffs[:deg + 1] = P.polyfit(np.arange(ppd, dtype=float), means, deg)
    return IntradayProfile(means, coeffs)


def remove_intraday(series: TimeSeries, profile: IntradayProfile) -> TimeSeries:
    ppd = series.points_per_day
    x = series.values
    if x.size % ppd:
        raise DomainError(f"length {x.size} is not a multiple of points_per_day={ppd}")
    if profile.means.size != ppd:
        raise DomainError("profile length does not match points_per_day")
    cycle = profile.evaluate(np.arange(ppd))
    return series.with_values(x - np.tile(cycle, x.size // ppd))


def detrend(series: TimeSeries, window_days: int = DEFAULT_WINDOW_DAYS,
            order: str = "intraday_first") -> TimeSeries:
    """Apply both detrending steps in the requested order."""
    if order not in ORDERS:
        raise DomainError(f"unknown detrend order {order!r}; expected one of {ORDERS}")
    out = series
    steps = {"intraday_first": ("intraday", "ma"), "ma_first": ("ma", "intraday"),
             "intraday_only": ("intraday",), "ma_only": ("ma",), "none": ()}[order]
    for step in steps:
        if step == "intraday":
            out = remove_intraday(out, intraday_profile(out))
        else:
            out = moving_average_detrend(out, window_days)[1]
    return out
