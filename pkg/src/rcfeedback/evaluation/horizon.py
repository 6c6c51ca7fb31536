from __future__ import annotations

import numpy as np

from ..series import as_array


def squared_error(output, target) -> np.ndarray:
    a, b = as_array(output), as_array(target)
    if a.size != b.size:
        raise ValueError(f"length mismatch: {a.size} != {b.size}")
    return (a - b) ** 2


def mse_curve(output, target, window: int = 1) -> np.ndarray:
    """Squared error averaged over trailing windows of ``window`` steps.

    The first ``window - 1`` entries average over the samples available so far.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    err = squared_error(output, target)
    if window == 1 or err.size == 0:
        return err
    csum = np.concatenate(([0.0], np.cumsum(err)))
    idx = np.arange(1, err.size + 1)
    lo = np.maximum(idx - window, 0)
    return (csum[idx] - csum[lo]) / (idx - lo)


def prediction_horizon(output, target, threshold: float = 1e-3, window: int = 1) -> tuple[int, np.ndarray]:
    """Number of steps before the windowed squared error first exceeds ``threshold``.

    Returns ``(horizon, curve)``; the horizon is the full length when the
    curve never crosses.
    """
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    curve = mse_curve(output, target, window)
    above = np.flatnonzero(curve > threshold)
    horizon = int(above[0]) if above.size else int(curve.size)
    return horizon, curve
