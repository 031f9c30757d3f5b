"""Global jump-parameter inversion and jump/continuous variance split."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .km import DEFAULT_LAGS, correct_moments, infinitesimal_moments, MomentTable
from .series import TimeSeries


class InversionError(DomainError):
    """Higher-order moments do not admit a jump inversion."""


@dataclass(frozen=True)
class GlobalMoments:
    """State-aggregated infinitesimal moments: raw intercepts and corrected."""

    M: np.ndarray
    F: np.ndarray

    @property
    def m2(self) -> float:
        return float(self.F[1])

    @property
    def m4(self) -> float:
        return float(self.F[3])

    @property
    def m6(self) -> float:
        return float(self.F[5])

    def __iter__(self):
        return iter((self.m2, self.m4, self.m6))


@dataclass(frozen=True)
class JumpParams:
    lam: float
    sigma_xi2: float
    b2: float
    m2: float
    d_jump: float
    f_jump: float
    flags: tuple = ()

    @property
    def sigma_xi(self) -> float:
        return float(np.sqrt(self.sigma_xi2))

    @classmethod
    def from_params(cls, lam: float, sigma_xi2: float, m2: float) -> "JumpParams":
        d_jump = lam * sigma_xi2
        b2 = m2 - d_jump
        f_jump = d_jump / m2 if m2 > 0 else float("nan")
        flags = ("negative_b2",) if b2 < 0 else ()
        return cls(lam, sigma_xi2, b2, m2, d_jump, f_jump, flags)


def global_infinitesimal_moments(series: TimeSeries, lags=DEFAULT_LAGS,
                                 dt: float | None = None) -> GlobalMoments:
    """Treat the whole series as one bin; regress and correct as per bin."""
    x = series.values if isinstance(series, TimeSeries) else np.asarray(series, dtype=float)
    dt = (series.dt if isinstance(series, TimeSeries) else 1.0) if dt is None else float(dt)
    lags = tuple(int(t) for t in lags)
    if not lags or min(lags) < 1 or max(lags) >= x.size:
        raise DomainError("lags must be >= 1 and shorter than the series")
    K = np.empty((6, 1, len(lags)))
    occ = np.empty((1, len(lags)), dtype=np.int64)
    for j, tau in enumerate(lags):
        inc = x[tau:] - x[:-tau]
        occ[0, j] = inc.size
        power = np.ones_like(inc)
        for n in range(6):
            power = power * inc
            K[n, 0, j] = power.mean()
    reg = infinitesimal_moments(MomentTable(K, occ, lags, dt, min_occupancy=1))
    M = reg.M[0]
    return GlobalMoments(M, correct_moments(M, dt))


def invert_jump_params(m2: float, m4: float, m6: float) -> JumpParams:
    """Jump variance, intensity and diffusion from moments 2, 4 and 6.

    Uses ``sigma_xi^2 = M6 / (5 M4)``, ``lambda = M4 / (3 sigma_xi^4)`` and
    ``b^2 = M2 - lambda sigma_xi^2``.  A negative ``b^2`` is kept and flagged.
    """
    if not (m4 > 0 and m6 > 0):
        raise InversionError(f"jump inversion needs M4 > 0 and M6 > 0 (got {m4:g}, {m6:g})")
    sigma_xi2 = m6 / (5.0 * m4)
    lam = m4 / (3.0 * sigma_xi2 ** 2)
    return JumpParams.from_params(lam, sigma_xi2, m2)


def variance_decomposition(params: JumpParams):
    """``(d_jump, d_cont, f_jump)`` with ``d_cont = m2 - d_jump``."""
    d_cont = params.m2 - params.d_jump
    return params.d_jump, d_cont, params.f_jump


def forward_moments(lam: float, sigma_xi2: float, b2: float):
    """Moments 2, 4, 6 of a jump-diffusion with Gaussian jump amplitudes."""
    return b2 + lam * sigma_xi2, 3.0 * lam * sigma_xi2 ** 2, 15.0 * lam * sigma_xi2 ** 3


def jump_params_or_limit(moments: GlobalMoments) -> JumpParams:
    """Invert ``moments``; if M4 or M6 is not positive, report the no-jump limit.

    Pure diffusion gives corrected fourth and sixth moments at noise level,
    often negative.  That case is returned as ``lambda = 0`` with an
    undefined amplitude and the flag ``no_jump_signal``.
    """
    try:
        return invert_jump_params(moments.m2, moments.m4, moments.m6)
    except InversionError:
        m2 = moments.m2
        return JumpParams(0.0, float("nan"), m2, m2, 0.0, 0.0, ("no_jump_signal",))
