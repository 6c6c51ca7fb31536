"""Lorenz lobe bitization and an ENT-style randomness battery."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks

from ..series import as_array


class EmptyBitSequenceError(ValueError):
    pass


@dataclass
class BitSequence:
    bits: np.ndarray
    source_len: int

    def __post_init__(self):
        self.bits = np.asarray(self.bits, dtype=np.uint8).reshape(-1)
        if np.any(self.bits > 1):
            raise ValueError("bits must be 0 or 1")

    def __len__(self) -> int:
        return self.bits.size


def bitize_lorenz(x_series, amplitude_threshold: float = 0.02, min_separation: int = 10) -> BitSequence:
    """One bit per lobe oscillation: at each local maximum of ``|x|`` above the
    threshold emit 1 on the positive wing and 0 on the negative one.

    ``min_separation`` (samples) merges noise-induced twin maxima; a lobe orbit
    of the standard attractor lasts roughly 35 samples at dt = 0.02.
    """
    x = as_array(x_series)
    if x.size == 0:
        raise ValueError("empty series")
    peaks, _ = find_peaks(np.abs(x), height=amplitude_threshold, distance=max(1, min_separation))
    if peaks.size == 0:
        raise EmptyBitSequenceError("no extrema above the amplitude threshold")
    return BitSequence((x[peaks] > 0).astype(np.uint8), x.size)


@dataclass
class RandomnessReport:
    entropy_per_byte: float
    compression_percent: float
    mean_byte: float
    monte_carlo_pi: float
    serial_correlation: float | None  # None when undefined (constant bytes)
    n_bytes: int

    @property
    def serial_correlation_defined(self) -> bool:
        return self.serial_correlation is not None

    def as_dict(self) -> dict:
        return {
            "entropy_per_byte": self.entropy_per_byte,
            "compression_percent": self.compression_percent,
            "mean_byte": self.mean_byte,
            "monte_carlo_pi": self.monte_carlo_pi,
            "serial_correlation": self.serial_correlation,
            "n_bytes": self.n_bytes,
        }


def pack_bytes(bits) -> np.ndarray:
    """Pack bits eight at a time, first bit most significant; leftovers dropped."""
    b = np.asarray(bits.bits if isinstance(bits, BitSequence) else bits, dtype=np.uint8)
    n = (b.size // 8) * 8
    return np.packbits(b[:n])


def byte_entropy(data: np.ndarray) -> float:
    counts = np.bincount(data, minlength=256)
    p = counts[counts > 0] / data.size
    return float(-(p * np.log2(p)).sum()) + 0.0  # no negative zero


def monte_carlo_pi(data: np.ndarray) -> float:
    """Points from consecutive 6-byte groups: 24-bit x then 24-bit y, big-endian."""
    n_points = data.size // 6
    if n_points == 0:
        return float("nan")
    g = data[: n_points * 6].astype(np.int64).reshape(n_points, 6)
    x = (g[:, 0] << 16) | (g[:, 1] << 8) | g[:, 2]
    y = (g[:, 3] << 16) | (g[:, 4] << 8) | g[:, 5]
    radius = float(2**24 - 1)
    inside = x.astype(float) ** 2 + y.astype(float) ** 2 <= radius**2
    return 4.0 * np.count_nonzero(inside) / n_points


def serial_correlation(data: np.ndarray) -> float | None:
    a = data[:-1].astype(float)
    b = data[1:].astype(float)
    if a.size < 2 or a.std() == 0 or b.std() == 0:
        return None
    return float(np.corrcoef(a, b)[0, 1])


def randomness_report(bits) -> RandomnessReport:
    """Entropy, compressibility, mean, Monte Carlo pi and serial correlation of the packed bytes."""
    b = bits.bits if isinstance(bits, BitSequence) else np.asarray(bits, dtype=np.uint8)
    if b.size < 48:
        raise ValueError("need at least 48 bits (one Monte Carlo point)")
    data = pack_bytes(b)
    entropy = byte_entropy(data)
    return RandomnessReport(
        entropy_per_byte=entropy,
        compression_percent=100.0 * (8.0 - entropy) / 8.0,
        mean_byte=float(data.mean()),
        monte_carlo_pi=monte_carlo_pi(data),
        serial_correlation=serial_correlation(data),
        n_bytes=int(data.size),
    )


def pi_error_percent(report: RandomnessReport) -> float:
    return 100.0 * abs(report.monte_carlo_pi - math.pi) / math.pi
