from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..series import as_array


@dataclass
class Spectrum:
    frequencies: np.ndarray  # cycles per reservoir step, [0, 0.5]
    power: np.ndarray
    smoothing_window: int = 1

    def __post_init__(self):
        if self.frequencies.shape != self.power.shape:
            raise ValueError("frequencies and power must have equal lengths")

    def peak_frequency(self, band: tuple[float, float] | None = None) -> float:
        sel = _band_mask(self.frequencies, band)
        return float(self.frequencies[sel][np.argmax(self.power[sel])])


def _band_mask(freqs: np.ndarray, band) -> np.ndarray:
    if band is None:
        return np.ones(freqs.shape, dtype=bool)
    lo, hi = band
    return (freqs >= lo) & (freqs <= hi)


def power_spectrum(series, smoothing_window: int = 1) -> Spectrum:
    """Normalised, moving-average smoothed periodogram of the mean-removed series.

    Total power sums to one both before and after smoothing.
    """
    x = as_array(series)
    if smoothing_window < 1:
        raise ValueError("smoothing_window must be >= 1")
    if x.size < max(2, 2 * smoothing_window):
        raise ValueError("series too short for the smoothing window")
    x = x - x.mean()
    power = np.abs(np.fft.rfft(x)) ** 2
    total = power.sum()
    if total <= 0:
        raise ValueError("series has no power after mean removal")
    power = power / total
    if smoothing_window > 1:
        kernel = np.ones(smoothing_window) / smoothing_window
        power = np.convolve(power, kernel, mode="same")
        power = power / power.sum()
    freqs = np.fft.rfftfreq(x.size, d=1.0)
    return Spectrum(freqs, power, smoothing_window)


def spectrum_similarity(a: Spectrum, b: Spectrum, band: tuple[float, float] | None = None) -> float:
    """Cosine similarity of two spectra on a shared frequency grid, restricted to ``band``."""
    if a.frequencies.shape != b.frequencies.shape or not np.allclose(a.frequencies, b.frequencies):
        raise ValueError("spectra are on different frequency grids")
    sel = _band_mask(a.frequencies, band)
    if not sel.any():
        raise ValueError("band selects no frequencies")
    pa, pb = a.power[sel], b.power[sel]
    na, nb = np.linalg.norm(pa), np.linalg.norm(pb)
    if na == 0 or nb == 0:
        return 0.0
    return float(np.clip(pa @ pb / (na * nb), 0.0, 1.0))


def write_spectrum_csv(path, spectrum: Spectrum) -> None:
    data = np.column_stack([spectrum.frequencies, spectrum.power])
    np.savetxt(path, data, delimiter=",", header="frequency,power", comments="", fmt="%.10g")
