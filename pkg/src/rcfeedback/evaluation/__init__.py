"""Metrics for judging a (noisy) emulator of a periodic or chaotic signal."""

from .horizon import mse_curve, prediction_horizon, squared_error
from .periodic import phase_aligned_mse
from .lyapunov import LyapunovEstimate, delay_embed, estimate_lyapunov
from .randomness import (
    BitSequence,
    EmptyBitSequenceError,
    RandomnessReport,
    bitize_lorenz,
    pack_bytes,
    randomness_report,
)
from .spectrum import Spectrum, power_spectrum, spectrum_similarity, write_spectrum_csv

__all__ = [
    "BitSequence",
    "EmptyBitSequenceError",
    "LyapunovEstimate",
    "RandomnessReport",
    "Spectrum",
    "bitize_lorenz",
    "delay_embed",
    "estimate_lyapunov",
    "mse_curve",
    "pack_bytes",
    "phase_aligned_mse",
    "power_spectrum",
    "prediction_horizon",
    "randomness_report",
    "spectrum_similarity",
    "squared_error",
    "write_spectrum_csv",
]
