"""Hardware-fidelity hooks: fixed-point quantization, state noise, amplifier filtering.

Three simulation tiers are supported. ``idealized`` leaves the reservoir
equations untouched. ``noiseless_experimental`` adds the converter and
arithmetic resolutions of the FPGA readout plus the amplifier high-pass.
``noisy_experimental`` additionally injects Gaussian noise into every node.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

DEFAULT_NOISE_STD = 2e-3
# Figure-caption value; kept available for comparison runs.
ALTERNATE_NOISE_STD = 1e-3


class Tier(str, enum.Enum):
    IDEALIZED = "idealized"
    NOISELESS_EXPERIMENTAL = "noiseless_experimental"
    NOISY_EXPERIMENTAL = "noisy_experimental"

    @property
    def experimental(self) -> bool:
        return self is not Tier.IDEALIZED


@dataclass(frozen=True)
class FidelityConfig:
    """Which hardware imperfections the simulated loop includes.

    ``adc_bits`` covers the acquisition range [-1, 1); ``dac_bits`` covers the
    masked-input range [-2**dac_integer_bits, 2**dac_integer_bits).
    """

    tier: Tier = Tier.IDEALIZED
    noise_std: float = 0.0
    adc_bits: int = 14
    dac_bits: int = 16
    dac_integer_bits: int = 1
    state_bits: int = 16
    state_fractional_bits: int = 15
    weight_bits: int = 25
    weight_fractional_bits: int = 24
    digital_post_gain: float = 8.0
    highpass_cutoff_relative: float = 0.0
    noise_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "tier", Tier(self.tier))
        if not math.isfinite(self.noise_std) or self.noise_std < 0:
            raise ValueError(f"noise_std must be finite and >= 0, got {self.noise_std}")
        if self.tier is Tier.NOISY_EXPERIMENTAL and self.noise_std <= 0:
            raise ValueError("noisy_experimental tier requires noise_std > 0")
        if self.tier is Tier.NOISELESS_EXPERIMENTAL and self.noise_std != 0:
            raise ValueError("noiseless_experimental tier requires noise_std == 0")
        for name in ("adc_bits", "dac_bits", "state_bits", "weight_bits"):
            if getattr(self, name) < 2:
                raise ValueError(f"{name} must be >= 2")
        if self.dac_integer_bits < 0 or self.dac_integer_bits > self.dac_bits - 2:
            raise ValueError("dac_integer_bits out of range")
        if self.state_bits < self.state_fractional_bits + 1:
            raise ValueError("state_bits must exceed state_fractional_bits")
        if self.weight_bits < self.weight_fractional_bits + 1:
            raise ValueError("weight_bits must exceed weight_fractional_bits")
        if not 0 <= self.highpass_cutoff_relative < 0.5:
            raise ValueError("highpass_cutoff_relative must lie in [0, 0.5)")
        if not math.isfinite(self.digital_post_gain) or self.digital_post_gain <= 0:
            raise ValueError("digital_post_gain must be positive")

    @classmethod
    def for_tier(cls, tier: Tier | str, **overrides) -> "FidelityConfig":
        """Tier defaults: experimental tiers get the amplifier high-pass, the
        noisy tier gets the measured noise level."""
        tier = Tier(tier)
        defaults: dict = {"tier": tier}
        if tier.experimental:
            defaults["highpass_cutoff_relative"] = 1e-4
        if tier is Tier.NOISY_EXPERIMENTAL:
            defaults["noise_std"] = DEFAULT_NOISE_STD
        defaults.update(overrides)
        return cls(**defaults)

    @property
    def experimental(self) -> bool:
        return self.tier.experimental

    @property
    def adc_fractional_bits(self) -> int:
        return self.adc_bits - 1

    @property
    def dac_fractional_bits(self) -> int:
        return self.dac_bits - 1 - self.dac_integer_bits


def quantize(value, total_bits: int, fractional_bits: int):
    """Round to a signed two's-complement fixed-point grid, saturating.

    Works on scalars and arrays. The representable range is
    ``[-2**(total_bits-1-fractional_bits), (2**(total_bits-1)-1) / 2**fractional_bits]``.
    """
    if total_bits < fractional_bits + 1 or fractional_bits < 0:
        raise ValueError(f"invalid fixed-point format ({total_bits}, {fractional_bits})")
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("cannot quantize non-finite values")
    scale = float(2**fractional_bits)
    lo = -float(2 ** (total_bits - 1))
    hi = float(2 ** (total_bits - 1) - 1)
    out = np.clip(np.round(arr * scale), lo, hi) / scale
    if np.ndim(value) == 0:
        return float(out)
    return out


def apply_noise(states, noise_std: float, rng: np.random.Generator) -> np.ndarray:
    """Add i.i.d. zero-mean Gaussian noise with the given standard deviation."""
    if not math.isfinite(noise_std):
        raise ValueError("noise_std must be finite")
    if noise_std < 0:
        raise ValueError(f"noise_std must be >= 0, got {noise_std}")
    states = np.asarray(states, dtype=float)
    if noise_std == 0:
        return states.copy()
    return states + rng.normal(0.0, noise_std, size=states.shape)


def highpass_coefficient(cutoff_relative: float) -> float:
    """Pole of the first-order RC high-pass for a cutoff given in cycles/sample."""
    return 1.0 / (1.0 + 2.0 * math.pi * cutoff_relative)


def highpass_response(cutoff_relative: float, freq_relative: float) -> complex:
    """Exact complex frequency response of :func:`high_pass` at ``freq_relative``."""
    a = highpass_coefficient(cutoff_relative)
    z1 = np.exp(-2j * math.pi * freq_relative)
    return complex(a * (1 - z1) / (1 - a * z1))


def high_pass(series, cutoff_relative: float) -> np.ndarray:
    """First-order discrete high-pass ``y[n] = a (y[n-1] + x[n] - x[n-1])``.

    Starts from rest (``x[-1] = y[-1] = 0``). A zero cutoff is the identity.
    """
    if not 0 <= cutoff_relative < 0.5:
        raise ValueError(f"cutoff_relative must lie in [0, 0.5), got {cutoff_relative}")
    x = np.asarray(series, dtype=float)
    if cutoff_relative == 0:
        return x.copy()
    a = highpass_coefficient(cutoff_relative)
    y = np.empty_like(x)
    prev_x = prev_y = 0.0
    for n, xn in enumerate(x):
        prev_y = a * (prev_y + xn - prev_x)
        prev_x = xn
        y[n] = prev_y
    return y


def rms(x) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.sqrt(np.mean(x * x)))


class UndefinedSNRError(ValueError):
    pass


def snr_db(signal, noise) -> float:
    """Signal-to-noise ratio ``10 log10(RMS(signal)^2 / RMS(noise)^2)``."""
    signal = np.asarray(signal, dtype=float)
    noise = np.asarray(noise, dtype=float)
    if signal.size == 0 or noise.size == 0:
        raise ValueError("signal and noise must be non-empty")
    noise_rms = rms(noise)
    if noise_rms == 0:
        raise UndefinedSNRError("noise RMS is zero; SNR undefined")
    return 10.0 * math.log10(rms(signal) ** 2 / noise_rms**2)


def attenuation_db(alpha: float, alpha_ref: float = 1.55) -> float:
    """Express a feedback gain as optical attenuator setting ``-20 log10(alpha/alpha_ref)``.

    ``alpha_ref`` is a calibration constant of the optical loop, not a
    property of the simulator.
    """
    if alpha <= 0 or alpha_ref <= 0:
        raise ValueError("alpha and alpha_ref must be positive")
    return -20.0 * math.log10(alpha / alpha_ref)
