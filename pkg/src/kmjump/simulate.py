"""Seeded ground-truth generators.

Every generator draws from independent counter-based streams keyed by
``(seed, role)``, so adding a new stream never perturbs existing output.
The jump-diffusion path follows an Euler-Maruyama scheme with compound
Poisson jumps::

    x[k+1] = x[k] - drift_theta * x[k] * dt + b * sqrt(dt) * Z[k] + sum(xi)
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.signal import lfilter

from .errors import DomainError
from .series import TimeSeries

KINDS = ("JumpDiffusion", "OU", "AR1", "RandomWalk", "WhiteNoise", "ProfilePlusNoise")

_ROLES = {"diffusion": 0, "jump_count": 1, "jump_size": 2, "noise": 3}

_KIND_ALIASES = {k.lower(): k for k in KINDS}
_KIND_ALIASES.update({"jd": "JumpDiffusion", "jump": "JumpDiffusion", "ar": "AR1",
                      "rw": "RandomWalk", "wn": "WhiteNoise", "profile": "ProfilePlusNoise"})


def normalize_kind(kind: str) -> str:
    try:
        return _KIND_ALIASES[str(kind).lower().replace("-", "").replace("_", "")]
    except KeyError:
        raise DomainError(f"unknown simulation kind {kind!r}; expected one of {KINDS}") from None


@dataclass(frozen=True)
class SimConfig:
    """Parameters of a synthetic series.

    ``extras`` holds kind-specific coefficients: ``ar_coef`` for AR1,
    ``profile`` (cubic coefficients a0..a3 over the intraday index) for
    ProfilePlusNoise, and ``points_per_day`` for every kind.
    """

    kind: str = "JumpDiffusion"
    drift_theta: float = 1.0
    b: float = 1.0
    lam: float = 0.0
    sigma_xi: float = 0.0
    dt: float = 0.01
    n: int = 10_000
    seed: int = 0
    x0: float = 0.0
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "kind", normalize_kind(self.kind))
        if not self.dt > 0:
            raise DomainError("dt must be positive")
        if int(self.n) < 2:
            raise DomainError("n must be >= 2")
        if self.b < 0 or self.lam < 0 or self.sigma_xi < 0:
            raise DomainError("b, lambda and sigma_xi must be nonnegative")
        if self.lam * self.dt >= 0.1:
            raise DomainError(f"lambda*dt = {self.lam * self.dt:g} must stay below 0.1")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def points_per_day(self) -> int:
        return int(self.extras.get("points_per_day", 38))


def _rng(seed: int, role: str) -> np.random.Generator:
    ss = np.random.SeedSequence([seed, _ROLES[role]])
    return np.random.Generator(np.random.Philox(ss))


def _jump_draws(config: SimConfig):
    """Per-step jump counts and the flat array of jump sizes."""
    steps = config.n - 1
    if config.lam == 0.0 or config.kind not in ("JumpDiffusion",):
        return np.zeros(steps, dtype=np.int64), np.zeros(0)
    counts = _rng(config.seed, "jump_count").poisson(config.lam * config.dt, size=steps)
    sizes = _rng(config.seed, "jump_size").normal(0.0, config.sigma_xi, size=int(counts.sum()))
    return counts, sizes


def jump_log(config: SimConfig) -> list[tuple[int, float]]:
    """Every jump applied by :func:`simulate` as ``(step, size)``.

    A jump at step ``k`` is added between ``x[k]`` and ``x[k+1]``.
    """
    counts, sizes = _jump_draws(config)
    steps = np.repeat(np.arange(counts.size), counts)
    return [(int(k), float(s)) for k, s in zip(steps, sizes)]


def _linear_recursion(x0: float, a: float, innovations: np.ndarray) -> np.ndarray:
    # x[k+1] = a * x[k] + e[k]
    if a == 1.0:
        path = x0 + np.cumsum(innovations)
    else:
        path, _ = lfilter([1.0], [1.0, -a], innovations, zi=[a * x0])
    return np.concatenate(([x0], path))


def simulate(config: SimConfig, include_jumps: bool = True) -> TimeSeries:
    """Generate the series described by ``config``.

    ``include_jumps=False`` replays the same diffusion stream without the
    jump contribution (the continuous-only path).
    """
    kind = config.kind
    n, dt = config.n, config.dt
    ppd = config.points_per_day
    label = f"sim_{kind.lower()}_seed{config.seed}"

    if kind == "WhiteNoise":
        z = _rng(config.seed, "noise").standard_normal(n)
        return TimeSeries(config.x0 + config.b * z, dt, ppd, label)
    if kind == "AR1":
        a = float(config.extras.get("ar_coef", 0.5))
        e = config.b * _rng(config.seed, "noise").standard_normal(n - 1)
        return TimeSeries(_linear_recursion(config.x0, a, e), dt, ppd, label)
    if kind == "RandomWalk":
        e = config.b * np.sqrt(dt) * _rng(config.seed, "diffusion").standard_normal(n - 1)
        return TimeSeries(_linear_recursion(config.x0, 1.0, e), dt, ppd, label)

    theta = config.drift_theta
    e = config.b * np.sqrt(dt) * _rng(config.seed, "diffusion").standard_normal(n - 1)
    if kind == "JumpDiffusion" and include_jumps:
        counts, sizes = _jump_draws(config)
        if sizes.size:
            steps = np.repeat(np.arange(counts.size), counts)
            e = e + np.bincount(steps, weights=sizes, minlength=n - 1)
    path = _linear_recursion(config.x0, 1.0 - theta * dt, e)

    if kind == "ProfilePlusNoise":
        coeffs = np.asarray(config.extras.get("profile", (0.0, 0.0, 0.0, 0.0)), dtype=float)
        idx = np.arange(n) % ppd
        path = path + np.polynomial.polynomial.polyval(idx, coeffs)
    return TimeSeries(path, dt, ppd, label)


def ou_config(**kw) -> SimConfig:
    return replace(SimConfig(kind="OU", lam=0.0, sigma_xi=0.0), **kw)
