"""Largest Lyapunov exponent from a scalar series by nearest-neighbour divergence.

Follows the Rosenstein et al. recipe: delay-embed, pair every reference point
with its nearest neighbour outside a temporal exclusion window, average the
log separation of the pairs as both evolve, and fit the slope of the linear
part of that curve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from ..series import TimeSeries, as_array

MIN_LENGTH = 5000


@dataclass
class LyapunovEstimate:
    per_step: float
    dt: float
    divergence: np.ndarray  # mean log separation vs. steps ahead
    fit_range: tuple[int, int]

    @property
    def per_time_unit(self) -> float:
        return self.per_step / self.dt

    def __float__(self) -> float:
        return self.per_step


def delay_embed(x: np.ndarray, dim: int, lag: int) -> np.ndarray:
    n = x.size - (dim - 1) * lag
    if n <= 0:
        raise ValueError("series too short for this embedding")
    return np.column_stack([x[i * lag : i * lag + n] for i in range(dim)])


def mean_period(x: np.ndarray) -> float:
    """Power-weighted mean period in samples."""
    x = x - x.mean()
    power = np.abs(np.fft.rfft(x)) ** 2
    freqs = np.fft.rfftfreq(x.size)
    mean_freq = np.sum(freqs[1:] * power[1:]) / np.sum(power[1:])
    return 1.0 / mean_freq


def estimate_lyapunov(
    series,
    embedding_dim: int = 6,
    embedding_lag: int = 12,
    fit_range: tuple[int, int] = (5, 50),
    dt: float | None = None,
    theiler: int | None = None,
    max_reference: int = 4000,
) -> LyapunovEstimate:
    """Estimate the largest Lyapunov exponent of ``series``.

    ``dt`` is the native time per sample (taken from a :class:`TimeSeries`
    when omitted); the exponent is reported per sample and per native unit.
    """
    x = as_array(series)
    if dt is None:
        dt = series.dt if isinstance(series, TimeSeries) else 1.0
    if x.size < MIN_LENGTH:
        raise ValueError(f"series must have at least {MIN_LENGTH} samples, got {x.size}")
    lo, hi = fit_range
    if not 0 <= lo < hi:
        raise ValueError("fit_range must satisfy 0 <= start < stop")
    if theiler is None:
        theiler = int(math.ceil(mean_period(x)))
    emb = delay_embed(x, embedding_dim, embedding_lag)
    horizon = hi + 1
    n_usable = emb.shape[0] - horizon
    if n_usable <= 2 * theiler + 2:
        raise ValueError("series too short for the requested fit range")
    pts = emb[:n_usable]
    tree = cKDTree(pts)
    stride = max(1, n_usable // max_reference)
    refs = np.arange(0, n_usable, stride)
    k = min(2 * theiler + 2, n_usable)
    dist, idx = tree.query(pts[refs], k=k)
    valid = (np.abs(idx - refs[:, None]) > theiler) & (dist > 0)
    has = valid.any(axis=1)
    first = np.argmax(valid, axis=1)
    refs = refs[has]
    nbrs = idx[has, first[has]]
    steps = np.arange(horizon)
    sep = np.linalg.norm(emb[refs[:, None] + steps] - emb[nbrs[:, None] + steps], axis=2)
    with np.errstate(divide="ignore"):
        logs = np.log(sep)
    logs[~np.isfinite(logs)] = np.nan
    curve = np.nanmean(logs, axis=0)
    slope = np.polyfit(steps[lo : hi + 1], curve[lo : hi + 1], 1)[0]
    return LyapunovEstimate(float(slope), float(dt), curve, (lo, hi))
