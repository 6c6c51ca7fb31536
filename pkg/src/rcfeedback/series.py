from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np


class Timestep(str, enum.Enum):
    RESERVOIR_STEP = "reservoir_step"
    MG_TIME_UNIT = "mg_time_unit"
    LORENZ_TIME_UNIT = "lorenz_time_unit"


@dataclass
class TimeSeries:
    """Uniformly sampled real sequence; ``dt`` is the native time per sample."""

    values: np.ndarray
    semantics: Timestep = Timestep.RESERVOIR_STEP
    dt: float = 1.0
    label: str = field(default="", compare=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).reshape(-1)
        self.semantics = Timestep(self.semantics)
        if not np.all(np.isfinite(self.values)):
            raise ValueError("time series values must be finite")
        if self.dt <= 0:
            raise ValueError("dt must be positive")

    def __len__(self) -> int:
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def __getitem__(self, item):
        if isinstance(item, slice):
            return TimeSeries(self.values[item], self.semantics, self.dt, self.label)
        return self.values[item]


def as_array(series) -> np.ndarray:
    if isinstance(series, TimeSeries):
        return series.values
    return np.asarray(series, dtype=float).reshape(-1)
