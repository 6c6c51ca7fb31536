from __future__ import annotations

import numpy as np

from ..series import as_array


def phase_aligned_mse(output, nu: float, window: int = 1000, amplitude: float = 1.0, start: int = 0) -> float:
    """MSE against ``amplitude * sin(nu * n + phi)`` with ``phi`` refitted per window.

    Frequency and amplitude are held at their targets, so a wrong frequency,
    wrong amplitude or distorted waveform all register, while the slow phase
    random walk of a noise-driven free-running oscillator does not.
    ``start`` is the time index of the first output sample.
    """
    y = as_array(output)
    if y.size == 0:
        raise ValueError("empty output")
    if window < 1:
        raise ValueError("window must be >= 1")
    n = start + np.arange(y.size, dtype=float)
    total = 0.0
    for k in range(0, y.size, window):
        yy = y[k : k + window]
        s, c = np.sin(nu * n[k : k + window]), np.cos(nu * n[k : k + window])
        # least-squares fit of a*s + b*c; the phase is that of (a, b)
        (a, b), *_ = np.linalg.lstsq(np.column_stack([s, c]), yy, rcond=None)
        phi = np.arctan2(b, a)
        ref = amplitude * (s * np.cos(phi) + c * np.sin(phi))
        total += float(np.sum((yy - ref) ** 2))
    return total / y.size
