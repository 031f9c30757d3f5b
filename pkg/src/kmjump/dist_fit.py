"""Densities and maximum-likelihood fits for four positive-support families.

Every family is parameterised by a shape ``phi`` and a scale ``theta``; for
LogNormal these are the mean and standard deviation of ``log x``.
"""
from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import DegenerateDataError, DomainError, InsufficientDataError

MAX_ITER = 100
REL_TOL = 1e-10


class DistFamily(str, enum.Enum):
    Gamma = "Gamma"
    InvGamma = "InvGamma"
    Weibull = "Weibull"
    LogNormal = "LogNormal"

    @classmethod
    def parse(cls, value) -> "DistFamily":
        if isinstance(value, cls):
            return value
        key = str(value).replace("-", "").replace("_", "").lower()
        for fam in cls:
            if fam.value.lower() == key:
                return fam
        aliases = {"g": cls.Gamma, "ig": cls.InvGamma, "inversegamma": cls.InvGamma,
                   "w": cls.Weibull, "ln": cls.LogNormal, "lognorm": cls.LogNormal}
        if key in aliases:
            return aliases[key]
        raise DomainError(f"unknown distribution family {value!r}")


@dataclass(frozen=True)
class ParamEstimate:
    family: DistFamily
    phi: float
    theta: float
    log_likelihood: float
    n_samples: int
    converged: bool
    iterations: int = 0


@dataclass(frozen=True)
class ParamSeries:
    """Per-time-index parameter estimates from a cross-sectional fit.

    ``converged[t]`` is False where row ``t`` failed and was filled by
    interpolation.
    """

    family: DistFamily
    phi: np.ndarray
    theta: np.ndarray
    points_per_day: int
    n_days: int
    converged: np.ndarray

    def __post_init__(self):
        if not (len(self.phi) == len(self.theta) == self.points_per_day * self.n_days):
            raise DomainError("ParamSeries length must equal points_per_day * n_days")


def _check_params(family: DistFamily, phi: float, theta: float) -> None:
    if not (math.isfinite(phi) and math.isfinite(theta)):
        raise DomainError("parameters must be finite")
    if theta <= 0:
        raise DomainError(f"{family.value}: theta must be > 0, got {theta}")
    if family is not DistFamily.LogNormal and phi <= 0:
        raise DomainError(f"{family.value}: phi must be > 0, got {phi}")


def logpdf(family, x, phi: float, theta: float):
    """Log-density; ``x`` may be a scalar or an array of positive reals."""
    family = DistFamily.parse(family)
    _check_params(family, phi, theta)
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError("densities are defined for x > 0 only")
    lx = np.log(x)
    if family is DistFamily.Gamma:
        out = (phi - 1) * lx - x / theta - gammaln(phi) - phi * math.log(theta)
    elif family is DistFamily.InvGamma:
        out = phi * math.log(theta) - gammaln(phi) - (phi + 1) * lx - theta / x
    elif family is DistFamily.Weibull:
        out = math.log(phi) - phi * math.log(theta) + (phi - 1) * lx - (x / theta) ** phi
    else:
        out = -lx - math.log(theta) - 0.5 * math.log(2 * math.pi) - (lx - phi) ** 2 / (2 * theta ** 2)
    return out[()] if out.ndim == 0 else out


def pdf(family, x, phi: float, theta: float):
    """Density ``f(x; phi, theta)`` of the given family."""
    return np.exp(logpdf(family, x, phi, theta))


def log_likelihood(family, samples, phi: float, theta: float) -> float:
    return float(np.sum(logpdf(family, samples, phi, theta)))


def sample(family, phi: float, theta: float, size, rng: np.random.Generator) -> np.ndarray:
    """Seeded draws from the family, for simulation-based checks."""
    family = DistFamily.parse(family)
    _check_params(family, phi, theta)
    if family is DistFamily.Gamma:
        return rng.gamma(phi, theta, size)
    if family is DistFamily.InvGamma:
        return 1.0 / rng.gamma(phi, 1.0 / theta, size)
    if family is DistFamily.Weibull:
        return theta * rng.weibull(phi, size)
    return rng.lognormal(phi, theta, size)


# --- special functions -----------------------------------------------------

def digamma(x: float) -> float:
    """psi(x) for x > 0: upward recurrence to x >= 10, then the asymptotic series."""
    if x <= 0:
        raise DomainError("digamma needs x > 0")
    acc = 0.0
    while x < 10.0:
        acc -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    series = inv2 * (1 / 12 - inv2 * (1 / 120 - inv2 * (1 / 252 - inv2 * (1 / 240 - inv2 / 132))))
    return acc + math.log(x) - 0.5 / x - series


def trigamma(x: float) -> float:
    """psi'(x) for x > 0, same strategy as :func:`digamma`."""
    if x <= 0:
        raise DomainError("trigamma needs x > 0")
    acc = 0.0
    while x < 10.0:
        acc += 1.0 / (x * x)
        x += 1.0
    inv = 1.0 / x
    inv2 = inv * inv
    series = inv + 0.5 * inv2 + inv * inv2 * (1 / 6 - inv2 * (1 / 30 - inv2 * (1 / 42 - inv2 / 30)))
    return acc + series


# --- estimators ------------------------------------------------------------

def _validate_samples(samples) -> np.ndarray:
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 2:
        raise InsufficientDataError("MLE needs at least 2 samples")
    if not np.all(np.isfinite(x)) or np.any(x <= 0):
        raise DomainError("MLE samples must be finite and > 0")
    if np.all(x == x[0]):
        raise DegenerateDataError("all samples are identical")
    return x


def _gamma_shape(x: np.ndarray):
    """Newton iteration on log(shape) for ``log(k) - psi(k) = s``."""
    mean = float(np.mean(x))
    s = math.log(mean) - float(np.mean(np.log(x)))
    if not s > 0:
        raise DegenerateDataError("zero log-moment spread")
    k = (3 - s + math.sqrt((s - 3) ** 2 + 24 * s)) / (12 * s)
    u = math.log(k)
    for it in range(1, MAX_ITER + 1):
        g = math.log(k) - digamma(k) - s
        dg = 1.0 - k * trigamma(k)  # d g / d log k
        if dg == 0.0:
            break
        step = g / dg
        u -= step
        k_new = math.exp(u)
        if abs(k_new - k) < REL_TOL * k:
            return k_new, mean / k_new, True, it
        k = k_new
    return k, mean / k, False, MAX_ITER


def _weibull_shape(x: np.ndarray):
    """Newton on the profile equation sum(x^k ln x)/sum(x^k) - 1/k - mean(ln x) = 0."""
    lx = np.log(x)
    lx = lx - lx.max()  # scale invariance; keeps x^k bounded
    mean_lx = float(lx.mean())
    sd = float(lx.std())
    if sd == 0.0:
        raise DegenerateDataError("all samples are identical")
    k = math.pi / (math.sqrt(6.0) * sd)

    def profile(k):
        w = np.exp(k * lx)
        sw = w.sum()
        a = float(np.dot(w, lx) / sw)
        b = float(np.dot(w, lx * lx) / sw)
        return a - 1.0 / k - mean_lx, (b - a * a) + 1.0 / (k * k)

    for it in range(1, MAX_ITER + 1):
        h, dh = profile(k)
        k_new = k - h / dh
        if k_new <= 0:
            k_new = 0.5 * k
        if abs(k_new - k) < REL_TOL * k:
            k = k_new
            break
        k = k_new
    else:
        return k, None, False, MAX_ITER
    return k, None, True, it


def fit_mle(family, samples) -> ParamEstimate:
    """Maximum-likelihood ``(phi, theta)`` for one family.

    Raises
    ------
    DomainError
        On nonpositive or non-finite samples.
    DegenerateDataError
        If all samples are equal.
    """
    family = DistFamily.parse(family)
    x = _validate_samples(samples)
    n = x.size
    it = 0
    if family is DistFamily.LogNormal:
        lx = np.log(x)
        phi = float(lx.mean())
        theta = float(np.sqrt(np.mean((lx - phi) ** 2)))
        if theta == 0.0:
            raise DegenerateDataError("log-samples have zero variance")
        converged = True
    elif family is DistFamily.Gamma:
        phi, theta, converged, it = _gamma_shape(x)
    elif family is DistFamily.InvGamma:
        # 1/x ~ Gamma(shape=phi, scale=1/theta)
        phi, inv_theta, converged, it = _gamma_shape(1.0 / x)
        theta = 1.0 / inv_theta
    else:
        phi, _, converged, it = _weibull_shape(x)
        lx = np.log(x)
        top = lx.max()
        theta = math.exp(top + math.log(np.mean(np.exp(phi * (lx - top)))) / phi)
    ll = log_likelihood(family, x, phi, theta) if converged else float("nan")
    return ParamEstimate(family, float(phi), float(theta), ll, n, bool(converged), it)


def _fit_row(family, row):
    usable = row[np.isfinite(row) & (row > 0)]
    if usable.size < 2:
        return None
    try:
        est = fit_mle(family, usable)
    except (DegenerateDataError, DomainError):
        return (np.nan, np.nan, False)
    return (est.phi, est.theta, est.converged)


def fit_cross_section(panel, family, points_per_day: int = 38, workers: int = 1) -> ParamSeries:
    """Fit every row (time index) of a ``[time, entity]`` panel.

    Missing or nonpositive cells are skipped. Rows whose fit fails are
    filled by linear interpolation between converged neighbours; rows at
    the boundary copy the nearest converged row.
    """
    family = DistFamily.parse(family)
    panel = np.atleast_2d(np.asarray(panel, dtype=float))
    rows = list(panel)
    for t, row in enumerate(rows):
        if np.count_nonzero(np.isfinite(row) & (row > 0)) < 2:
            raise InsufficientDataError(f"panel row {t} has fewer than 2 usable entries")
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(lambda r: _fit_row(family, r), rows))
    else:
        results = [_fit_row(family, r) for r in rows]

    phi = np.array([r[0] for r in results], dtype=float)
    theta = np.array([r[1] for r in results], dtype=float)
    ok = np.array([r[2] for r in results], dtype=bool)
    if not ok.any():
        raise DegenerateDataError("no panel row could be fitted")
    if not ok.all():
        t = np.arange(len(rows))
        # np.interp holds the end values constant outside the converged range
        phi = np.where(ok, phi, np.interp(t, t[ok], phi[ok]))
        theta = np.where(ok, theta, np.interp(t, t[ok], theta[ok]))

    n = len(rows)
    ppd = points_per_day if n % points_per_day == 0 else n
    return ParamSeries(family, phi, theta, ppd, n // ppd, ok)
