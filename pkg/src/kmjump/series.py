from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InsufficientDataError


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly sampled real-valued series.

    ``dt`` is the sampling interval in model time units; ``points_per_day``
    is the length of the intraday grid (38 for 10-minute trading data).
    """

    values: np.ndarray
    dt: float = 1.0
    points_per_day: int = 38
    label: str = "series"

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1:
            raise DomainError("series values must be one-dimensional")
        if values.size < 2:
            raise InsufficientDataError("series needs at least 2 values")
        if not np.all(np.isfinite(values)):
            raise DomainError(f"series {self.label!r} contains non-finite values")
        if not self.dt > 0:
            raise DomainError("dt must be positive")
        if int(self.points_per_day) < 1:
            raise DomainError("points_per_day must be >= 1")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "dt", float(self.dt))
        object.__setattr__(self, "points_per_day", int(self.points_per_day))

    def __len__(self):
        return self.values.size

    def with_values(self, values, label=None) -> "TimeSeries":
        return TimeSeries(values, self.dt, self.points_per_day,
                          self.label if label is None else label)


def as_array(series) -> np.ndarray:
    """Values of a TimeSeries, or the argument itself as a float array."""
    if isinstance(series, TimeSeries):
        return series.values
    return np.asarray(series, dtype=float)
