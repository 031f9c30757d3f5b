"""Pipeline configuration and its INI-style serialisation."""
from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field, fields, replace

from .binning import ZoneTargets
from .dist_fit import DistFamily
from .errors import DomainError
from .preprocess import ORDERS as DETREND_ORDERS
from .simulate import SimConfig, normalize_kind

# field name -> (section, key)
_LAYOUT = {
    "input": ("input", "path"),
    "dt": ("input", "dt"),
    "label": ("input", "label"),
    "points_per_day": ("input", "points_per_day"),
    "family": ("fit", "family"),
    "parameter": ("fit", "parameter"),
    "window_days": ("detrend", "window_days"),
    "detrend_order": ("detrend", "order"),
    "adf_lags": ("stationarity", "adf_lags"),
    "kpss_bandwidth": ("stationarity", "kpss_bandwidth"),
    "entropy_bins": ("markov", "entropy_bins"),
    "entropy_threshold": ("markov", "threshold"),
    "tau_max": ("markov", "tau_max"),
    "pacf_lags": ("markov", "pacf_lags"),
    "zone_targets": ("bins", None),
    "lags": ("km", "lags"),
    "orders": ("km", "orders"),
    "min_occupancy": ("km", "min_occupancy"),
    "jump_floor": ("km", "jump_floor"),
    "sim": ("simulate", None),
    "out_dir": ("output", "out_dir"),
    "seed": ("output", "seed"),
}

_SIM_KEYS = {"kind": "kind", "drift_theta": "drift_theta", "b": "b", "lambda": "lam",
             "sigma_xi": "sigma_xi", "dt": "dt", "n": "n", "seed": "seed", "x0": "x0"}
_ZONE_KEYS = [f.name for f in fields(ZoneTargets)]


@dataclass(frozen=True)
class PipelineConfig:
    input: str | None = None
    sim: SimConfig | None = None
    dt: float = 1.0
    label: str | None = None
    points_per_day: int = 38
    family: str = "Gamma"
    parameter: str = "phi"
    window_days: int = 21
    detrend_order: str = "intraday_first"
    zone_targets: ZoneTargets = field(default_factory=ZoneTargets)
    lags: tuple = (1, 2, 3, 4, 5, 6)
    orders: tuple = (1, 2, 3, 4, 5, 6)
    entropy_bins: int = 30
    entropy_threshold: float = 0.005
    tau_max: int = 20
    pacf_lags: int = 20
    adf_lags: int | str = "auto"
    kpss_bandwidth: int | str = "auto"
    min_occupancy: int = 50
    jump_floor: float = 0.0
    out_dir: str = "kmjump_out"
    seed: int = 0

    def __post_init__(self):
        DistFamily.parse(self.family)
        if self.parameter not in ("phi", "theta"):
            raise DomainError("parameter must be 'phi' or 'theta'")
        if self.detrend_order not in DETREND_ORDERS:
            raise DomainError(f"detrend order must be one of {DETREND_ORDERS}")
        if not self.dt > 0:
            raise DomainError("dt must be positive")
        if self.window_days < 1 or self.points_per_day < 1:
            raise DomainError("window_days and points_per_day must be >= 1")
        if not self.lags or min(self.lags) < 1:
            raise DomainError("lags must be integers >= 1")
        if not set(self.orders) <= {1, 2, 3, 4, 5, 6}:
            raise DomainError("orders must be a subset of 1..6")
        if self.entropy_bins < 2 or self.tau_max < 1 or self.pacf_lags < 1:
            raise DomainError("markov settings out of range")
        if not self.entropy_threshold > 0:
            raise DomainError("entropy threshold must be positive")
        if self.min_occupancy < 1:
            raise DomainError("min_occupancy must be >= 1")
        for name in ("adf_lags", "kpss_bandwidth"):
            v = getattr(self, name)
            if v != "auto" and (not isinstance(v, int) or v < 0):
                raise DomainError(f"{name} must be 'auto' or a nonnegative integer")

    def with_overrides(self, **kw) -> "PipelineConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw)


def _tuple(text: str) -> tuple:
    return tuple(int(t) for t in text.replace(" ", "").split(",") if t)


def _auto(text: str):
    return "auto" if text.strip().lower() in ("auto", "") else int(text)


def _fmt(v) -> str:
    if isinstance(v, tuple):
        return ",".join(str(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return "" if v is None else str(v)


def to_ini(cfg: PipelineConfig) -> str:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    for f in fields(cfg):
        section, key = _LAYOUT[f.name]
        if not cp.has_section(section):
            cp.add_section(section)
        value = getattr(cfg, f.name)
        if f.name == "zone_targets":
            for z in _ZONE_KEYS:
                cp.set(section, z, str(getattr(value, z)))
        elif f.name == "sim":
            if value is not None:
                for key_, attr in _SIM_KEYS.items():
                    cp.set(section, key_, _fmt(getattr(value, attr)))
                for k, v in sorted(value.extras.items()):
                    cp.set(section, k, _fmt(tuple(v) if isinstance(v, (list, tuple)) else v))
        else:
            cp.set(section, key, _fmt(value))
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def from_ini(text: str, base: PipelineConfig | None = None) -> PipelineConfig:
    """Parse INI text; keys absent from the text keep ``base`` values."""
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise DomainError(f"bad configuration file: {exc}") from None
    cfg = base or PipelineConfig()
    kw = {}
    casts = {"dt": float, "points_per_day": int, "window_days": int, "entropy_bins": int,
             "entropy_threshold": float, "tau_max": int, "pacf_lags": int,
             "min_occupancy": int, "jump_floor": float, "seed": int,
             "lags": _tuple, "orders": _tuple, "adf_lags": _auto, "kpss_bandwidth": _auto}
    known = {(s, k) for s, k in _LAYOUT.values() if k}
    for section in cp.sections():
        for key in cp[section]:
            if section == "simulate":
                continue
            if section == "bins":
                if key not in _ZONE_KEYS and key != "preset":
                    raise DomainError(f"unknown configuration key [bins] {key}")
                continue
            if (section, key) not in known:
                raise DomainError(f"unknown configuration key [{section}] {key}")
    for name, (section, key) in _LAYOUT.items():
        if key is None or not cp.has_option(section, key):
            continue
        raw = cp.get(section, key)
        try:
            kw[name] = casts[name](raw) if name in casts else (raw or None)
        except ValueError:
            raise DomainError(f"bad value for [{section}] {key}: {raw!r}") from None
    if cp.has_section("bins"):
        zt = {z: int(cp.get("bins", z)) for z in _ZONE_KEYS if cp.has_option("bins", z)}
        if cp.has_option("bins", "preset"):
            base_zt = ZoneTargets.preset(cp.get("bins", "preset"))
        else:
            base_zt = cfg.zone_targets
        kw["zone_targets"] = replace(base_zt, **zt)
    if cp.has_section("simulate") and len(cp["simulate"]):
        kw["sim"] = sim_from_mapping(dict(cp["simulate"]), cfg.sim)
    return replace(cfg, **kw)


def sim_from_mapping(mapping: dict, base: SimConfig | None = None) -> SimConfig:
    base = base or SimConfig()
    kw, extras = {}, dict(base.extras)
    for key, raw in mapping.items():
        if key in _SIM_KEYS:
            attr = _SIM_KEYS[key]
            if attr == "kind":
                kw[attr] = normalize_kind(raw)
            elif attr in ("n", "seed"):
                kw[attr] = int(raw)
            else:
                kw[attr] = float(raw)
        elif key == "profile":
            extras[key] = tuple(float(v) for v in raw.split(","))
        elif key == "points_per_day":
            extras[key] = int(raw)
        elif key == "ar_coef":
            extras[key] = float(raw)
        else:
            raise DomainError(f"unknown simulate key {key!r}")
    return replace(base, extras=extras, **kw)
