"""State-space partitions: classical bin-count rules, zone-adaptive bins, KDE.

The adaptive grid splits the samples at their mean and partitions each half
outward into contiguous runs of order statistics.  A bin whose centre lies
in the core (``|c - mean| < sigma``), shoulder (``< 2 sigma``) or tail must
hold a number of samples inside that zone's ``[min, max]`` target.  The cut
positions are chosen by dynamic programming, so a valid grid is found
whenever one exists; otherwise the occupancy maxima are relaxed (minima
never are) and the grid is flagged.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from .errors import DegenerateDataError, DomainError, InsufficientDataError
from .series import as_array

ZONES = ("core", "shoulder", "tail")
RULES = ("FreedmanDiaconis", "Scott", "Sturges", "Doane")


@dataclass(frozen=True)
class ZoneTargets:
    core_min: int = 350
    core_max: int = 400
    shoulder_min: int = 250
    shoulder_max: int = 300
    tail_min: int = 150
    tail_max: int = 200

    def __post_init__(self):
        for lo, hi in self.bounds():
            if not 0 < lo < hi:
                raise DomainError(f"zone targets need 0 < min < max, got ({lo}, {hi})")

    def bounds(self):
        return ((self.core_min, self.core_max), (self.shoulder_min, self.shoulder_max),
                (self.tail_min, self.tail_max))

    @classmethod
    def main_text(cls) -> "ZoneTargets":
        return cls()

    @classmethod
    def appendix(cls) -> "ZoneTargets":
        return cls(400, 500, 300, 400, 200, 300)

    @classmethod
    def preset(cls, name: str) -> "ZoneTargets":
        presets = {"main": cls.main_text, "appendix": cls.appendix}
        if name not in presets:
            raise DomainError(f"unknown zone-target preset {name!r}")
        return presets[name]()


@dataclass(frozen=True)
class BinGrid:
    edges: np.ndarray
    counts: np.ndarray
    zones: tuple
    origin: float = 0.0
    sigma: float = 1.0
    relaxed: bool = False
    empty_zones: tuple = field(default=())

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def n_bins(self) -> int:
        return self.counts.size

    def assign(self, x) -> np.ndarray:
        """Bin index of each value (left-closed bins, last bin closed); -1 outside."""
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.edges, x, side="right") - 1
        idx[x == self.edges[-1]] = self.n_bins - 1
        idx[(x < self.edges[0]) | (x > self.edges[-1])] = -1
        return idx


def zone_of(center, origin: float, sigma: float):
    dist = np.abs(np.asarray(center, dtype=float) - origin)
    return np.where(dist < sigma, 0, np.where(dist < 2 * sigma, 1, 2))


# --- classical rules ---------------------------------------------------------

def classical_bin_count(series, rule: str) -> int:
    """Number of equal-width bins suggested by a textbook rule."""
    x = as_array(series)
    n = x.size
    if n < 4:
        raise InsufficientDataError("binning rules need at least 4 samples")
    sturges = math.ceil(math.log2(n)) + 1
    span = float(x.max() - x.min())
    if rule == "Sturges":
        return sturges
    if rule == "Scott":
        s = float(x.std(ddof=1))
        if s == 0:
            raise DegenerateDataError("Scott's rule needs nonzero standard deviation")
        return max(1, math.ceil(span / (3.49 * s * n ** (-1 / 3))))
    if rule == "FreedmanDiaconis":
        q75, q25 = np.percentile(x, [75, 25])
        iqr = float(q75 - q25)
        if iqr == 0:
            raise DegenerateDataError("Freedman-Diaconis rule needs nonzero IQR")
        return max(1, math.ceil(span / (2 * iqr * n ** (-1 / 3))))
    if rule == "Doane":
        s = float(x.std())
        g1 = float(np.mean((x - x.mean()) ** 3) / s ** 3) if s > 0 else 0.0
        sigma_g1 = math.sqrt(6.0 * (n - 2) / ((n + 1) * (n + 3)))
        return math.ceil(1 + math.log2(n) + math.log2(1 + abs(g1) / sigma_g1))
    raise DomainError(f"unknown binning rule {rule!r}; expected one of {RULES}")


# --- adaptive bins -------------------------------------------------------------

def _cut_edges(vals: np.ndarray, origin: float):
    """Edge value at every cut position of an outward-sorted half, and validity."""
    n = vals.size
    edges = np.empty(n + 1)
    edges[0] = origin
    edges[n] = vals[-1]
    edges[1:n] = 0.5 * (vals[:-1] + vals[1:])
    ok = np.ones(n + 1, dtype=bool)
    ok[1:n] = vals[:-1] != vals[1:]
    return edges, ok


def _partition(edges, cut_ok, origin, sigma, bounds, relaxed):
    """Minimum-cost split of cut positions ``0..n``; returns cut list or None."""
    n = edges.size - 1
    lows = np.array([lo for lo, _ in bounds])
    highs = np.array([hi for _, hi in bounds])
    mids = 0.5 * (lows + highs)
    spans = 0.5 * (highs - lows)
    if relaxed:
        smax = n if n <= 20_000 else 4 * int(highs.max())
        sizes = np.arange(int(lows.min()), max(int(lows.min()), smax) + 1)
        cand_zone = None
    else:
        sizes = np.concatenate([np.arange(lo, hi + 1) for lo, hi in bounds])
        cand_zone = np.concatenate([np.full(hi - lo + 1, z) for z, (lo, hi) in enumerate(bounds)])
        penalty = ((sizes - mids[cand_zone]) / spans[cand_zone]) ** 2

    step = int(sizes.min())
    cost = np.full(n + 1, np.inf)
    cost[0] = 0.0
    back = np.full(n + 1, -1, dtype=np.int64)
    for q0 in range(step, n + 1, step):
        q = np.arange(q0, min(q0 + step, n + 1))
        p = q[:, None] - sizes[None, :]
        inside = p >= 0
        p = np.where(inside, p, 0)
        zone = zone_of(0.5 * (edges[p] + edges[q][:, None]), origin, sigma)
        if relaxed:
            over = np.maximum(sizes[None, :] - highs[zone], 0)
            ok = sizes[None, :] >= lows[zone]
            c = cost[p] + ((sizes[None, :] - mids[zone]) / spans[zone]) ** 2 + 1e6 * over.astype(float) ** 2
        else:
            ok = zone == cand_zone[None, :]
            c = cost[p] + penalty[None, :]
        ok &= inside & cut_ok[p] & cut_ok[q][:, None]
        c = np.where(ok, c, np.inf)
        best = np.argmin(c, axis=1)
        rows = np.arange(q.size)
        cost[q] = c[rows, best]
        back[q] = np.where(np.isfinite(cost[q]), p[rows, best], -1)
    if not np.isfinite(cost[n]):
        return None
    cuts = [n]
    while cuts[-1] > 0:
        cuts.append(int(back[cuts[-1]]))
    return cuts[::-1]


def _half_bins(vals, origin, sigma, bounds):
    if vals.size == 0:
        return [], False
    edges, cut_ok = _cut_edges(vals, origin)
    cuts = _partition(edges, cut_ok, origin, sigma, bounds, relaxed=False)
    relaxed = cuts is None
    if relaxed:
        cuts = _partition(edges, cut_ok, origin, sigma, bounds, relaxed=True)
    if cuts is None:
        raise InsufficientDataError(
            f"{vals.size} samples on one side of the mean cannot meet the zone minima")
    return [edges[c] for c in cuts], relaxed


def adaptive_bins(series, targets: ZoneTargets | None = None) -> BinGrid:
    """Zone-adaptive partition of the sample range.

    Raises
    ------
    InsufficientDataError
        If the sample is smaller than twice the sum of the zone minima, or
        one half of the sample cannot meet the minima at all.
    """
    targets = targets or ZoneTargets()
    x = as_array(series)
    bounds = targets.bounds()
    need = 2 * sum(lo for lo, _ in bounds)
    if x.size < need:
        raise InsufficientDataError(f"adaptive binning needs at least {need} samples, got {x.size}")
    origin = float(x.mean())
    sigma = float(x.std())
    if sigma == 0:
        raise DegenerateDataError("zero-variance series cannot be binned")
    xs = np.sort(x)
    split = np.searchsorted(xs, origin, side="left")
    neg_edges, neg_relaxed = _half_bins(xs[:split][::-1], origin, sigma, bounds)
    pos_edges, pos_relaxed = _half_bins(xs[split:], origin, sigma, bounds)
    if neg_edges and pos_edges:
        edges = np.array(neg_edges[::-1] + pos_edges[1:])
    else:
        edges = np.array(neg_edges[::-1] or pos_edges)
    centers = 0.5 * (edges[:-1] + edges[1:])
    labels = zone_of(centers, origin, sigma)
    grid = BinGrid(edges, np.zeros(centers.size, dtype=np.int64),
                   tuple(ZONES[z] for z in labels), origin, sigma,
                   neg_relaxed or pos_relaxed,
                   tuple(z for i, z in enumerate(ZONES) if not np.any(labels == i)))
    counts = np.bincount(grid.assign(x), minlength=grid.n_bins)
    object.__setattr__(grid, "counts", counts)
    return grid


def grid_from_edges(x, edges, origin: float | None = None, sigma: float | None = None) -> BinGrid:
    """Rebuild a BinGrid (counts and zone labels) from stored edges."""
    x = as_array(x)
    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise DomainError("bin edges must be a strictly increasing sequence")
    origin = float(x.mean()) if origin is None else origin
    sigma = float(x.std()) if sigma is None else sigma
    centers = 0.5 * (edges[:-1] + edges[1:])
    labels = zone_of(centers, origin, sigma)
    grid = BinGrid(edges, np.zeros(centers.size, dtype=np.int64),
                   tuple(ZONES[z] for z in labels), origin, sigma)
    idx = grid.assign(x)
    object.__setattr__(grid, "counts", np.bincount(idx[idx >= 0], minlength=grid.n_bins))
    return grid


# --- KDE -----------------------------------------------------------------------

@dataclass(frozen=True)
class KDEResult:
    grid: np.ndarray
    density: np.ndarray
    bandwidth: float
    kernel: str

    def __call__(self, x):
        return np.interp(x, self.grid, self.density, left=0.0, right=0.0)

    def integral(self) -> float:
        return float(trapezoid(self.density, self.grid))


def silverman_bandwidth(x: np.ndarray) -> float:
    s = float(x.std(ddof=1))
    q75, q25 = np.percentile(x, [75, 25])
    spread = min(s, float(q75 - q25) / 1.34) if q75 > q25 else s
    if spread <= 0:
        raise DegenerateDataError("Silverman bandwidth needs nonzero spread")
    return 0.9 * spread * x.size ** (-0.2)


def kde(series, kernel: str = "Epanechnikov", bandwidth: float | str = "silverman",
        n_grid: int = 512) -> KDEResult:
    """Kernel density estimate on ``n_grid`` points over ``[min - 3h, max + 3h]``."""
    x = as_array(series)
    if x.size < 10:
        raise InsufficientDataError("KDE needs at least 10 samples")
    if kernel not in ("Epanechnikov", "Gaussian"):
        raise DomainError(f"unknown kernel {kernel!r}")
    if isinstance(bandwidth, str):
        if bandwidth.lower() != "silverman":
            raise DomainError(f"unknown bandwidth rule {bandwidth!r}")
        h = silverman_bandwidth(x)
    else:
        h = float(bandwidth)
        if not h > 0:
            raise DomainError("bandwidth must be positive")
    grid = np.linspace(x.min() - 3 * h, x.max() + 3 * h, n_grid)
    dens = np.zeros(n_grid)
    for start in range(0, x.size, 4096):
        u = (grid[:, None] - x[None, start:start + 4096]) / h
        if kernel == "Gaussian":
            k = np.exp(-0.5 * u * u) / math.sqrt(2 * math.pi)
        else:
            k = np.where(np.abs(u) <= 1, 0.75 * (1 - u * u), 0.0)
        dens += k.sum(axis=1)
    return KDEResult(grid, dens / (x.size * h), h, kernel)
