"""Ring-topology sine reservoir with hardware-fidelity hooks.

Node ``i >= 1`` reads its predecessor from the previous step; node 0 reads the
last node from two steps back::

    x_0(n+1) = sin(alpha * x_{N-1}(n-1) + beta * M_0 * I(n))
    x_i(n+1) = sin(alpha * x_{i-1}(n)   + beta * M_i * I(n))

In the experimental tiers the scalar input passes through the amplifier
high-pass, the masked input through the DAC, Gaussian noise is added to every
node after the nonlinearity, and the values handed to the readout are the
ADC/state-register quantized copies. The loop itself stays analog.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import fidelity as fid
from .fidelity import FidelityConfig, Tier
from .series import TimeSeries, as_array

ROUNDTRIP_TIME_S = {100: 7.93e-6, 600: 49.2e-6}
# Nodes updated before the readout can return y(n) in the hardware loop.
HARDWARE_ZEROED_LEADING = 23


def generate_mask(n_nodes: int, n_zeroed_leading: int, rng: np.random.Generator) -> np.ndarray:
    """Input mask with i.i.d. uniform [-1, 1] entries and a zeroed leading block."""
    if n_nodes < 1:
        raise ValueError("n_nodes must be positive")
    if not 0 <= n_zeroed_leading < n_nodes:
        raise ValueError(f"n_zeroed_leading must lie in [0, n_nodes), got {n_zeroed_leading}")
    mask = rng.uniform(-1.0, 1.0, size=n_nodes)
    mask[:n_zeroed_leading] = 0.0
    return mask


@dataclass(frozen=True)
class ReservoirConfig:
    n_nodes: int
    feedback_gain: float
    input_gain: float
    mask: np.ndarray = field(repr=False)
    n_zeroed_leading: int = 0
    fidelity: FidelityConfig = field(default_factory=FidelityConfig)
    roundtrip_time_s: float = 7.93e-6
    mask_seed: int | None = None

    def __post_init__(self):
        mask = np.asarray(self.mask, dtype=float).reshape(-1)
        mask.setflags(write=False)
        object.__setattr__(self, "mask", mask)
        if self.n_nodes < 1:
            raise ValueError("n_nodes must be positive")
        if mask.size != self.n_nodes:
            raise ValueError(f"mask length {mask.size} != n_nodes {self.n_nodes}")
        if not 0 <= self.n_zeroed_leading < self.n_nodes:
            raise ValueError("n_zeroed_leading must lie in [0, n_nodes)")
        if np.any(np.abs(mask) > 1.0):
            raise ValueError("mask entries must lie in [-1, 1]")
        if np.any(mask[: self.n_zeroed_leading] != 0.0):
            raise ValueError("leading mask entries must be exactly zero")
        if not (math.isfinite(self.feedback_gain) and math.isfinite(self.input_gain)):
            raise ValueError("gains must be finite")
        if self.roundtrip_time_s <= 0:
            raise ValueError("roundtrip_time_s must be positive")

    @classmethod
    def create(
        cls,
        n_nodes: int,
        feedback_gain: float,
        input_gain: float,
        mask_seed: int = 0,
        fidelity: FidelityConfig | None = None,
        n_zeroed_leading: int | None = None,
        roundtrip_time_s: float | None = None,
    ) -> "ReservoirConfig":
        """Draw the mask from ``mask_seed``; tier-dependent defaults for the rest."""
        fidelity = fidelity or FidelityConfig()
        if n_zeroed_leading is None:
            n_zeroed_leading = HARDWARE_ZEROED_LEADING if fidelity.experimental else 0
            n_zeroed_leading = min(n_zeroed_leading, n_nodes - 1)
        if roundtrip_time_s is None:
            roundtrip_time_s = ROUNDTRIP_TIME_S.get(n_nodes, 7.93e-6 * n_nodes / 100)
        mask = generate_mask(n_nodes, n_zeroed_leading, np.random.default_rng(mask_seed))
        return cls(
            n_nodes, feedback_gain, input_gain, mask, n_zeroed_leading, fidelity, roundtrip_time_s, mask_seed
        )

    def with_fidelity(self, fidelity: FidelityConfig) -> "ReservoirConfig":
        return replace(self, fidelity=fidelity)

    def __eq__(self, other):
        if not isinstance(other, ReservoirConfig):
            return NotImplemented
        return (
            self.n_nodes == other.n_nodes
            and self.feedback_gain == other.feedback_gain
            and self.input_gain == other.input_gain
            and np.array_equal(self.mask, other.mask)
            and self.n_zeroed_leading == other.n_zeroed_leading
            and self.fidelity == other.fidelity
            and self.roundtrip_time_s == other.roundtrip_time_s
        )

    __hash__ = None


@dataclass
class ReservoirState:
    """Node values ``x(n)`` plus the memory the next update needs.

    ``hp_input``/``hp_output`` hold the amplifier high-pass memory; they stay
    at rest in the idealized tier.
    """

    current: np.ndarray
    previous_last: float = 0.0
    step_index: int = 0
    hp_input: float = 0.0
    hp_output: float = 0.0

    def __post_init__(self):
        self.current = np.asarray(self.current, dtype=float).reshape(-1)

    @classmethod
    def zeros(cls, n_nodes: int) -> "ReservoirState":
        return cls(np.zeros(n_nodes))

    def copy(self) -> "ReservoirState":
        return replace(self, current=self.current.copy())

    def quiescent(self) -> "ReservoirState":
        """Zero node values, keeping the amplifier filter memory."""
        return replace(self, current=np.zeros_like(self.current), previous_last=0.0)


@dataclass
class StateTrajectory:
    """Rows are readout-visible states after each input sample."""

    states: np.ndarray
    inputs: TimeSeries
    final_state: ReservoirState | None = None

    def __post_init__(self):
        if self.states.shape[0] != len(self.inputs):
            raise ValueError("row count must equal input length")

    @property
    def n_nodes(self) -> int:
        return self.states.shape[1]

    def __len__(self) -> int:
        return self.states.shape[0]


def acquire(x: np.ndarray, fidelity: FidelityConfig) -> np.ndarray:
    """Readout-visible copy of the node values: ADC then the 16-bit state register."""
    if not fidelity.experimental:
        return x
    q = fid.quantize(x, fidelity.adc_bits, fidelity.adc_fractional_bits)
    return fid.quantize(q, fidelity.state_bits, fidelity.state_fractional_bits)


class _Loop:
    """Mutable per-run stepping engine shared by ``drive`` and the closed loop."""

    def __init__(self, config: ReservoirConfig, state: ReservoirState, rng: np.random.Generator | None):
        if state.current.size != config.n_nodes:
            raise ValueError(f"state length {state.current.size} != n_nodes {config.n_nodes}")
        self.cfg = config
        self.fid = config.fidelity
        self.x = state.current.astype(float).copy()
        self.prev_last = float(state.previous_last)
        self.n = int(state.step_index)
        self.hp_in = float(state.hp_input)
        self.hp_out = float(state.hp_output)
        self.alpha = float(config.feedback_gain)
        self.beta_mask = float(config.input_gain) * config.mask
        self.mask = config.mask
        self.ring = np.empty(config.n_nodes)
        self.experimental = self.fid.experimental
        self.noise_std = self.fid.noise_std
        self.hp_a = fid.highpass_coefficient(self.fid.highpass_cutoff_relative)
        self.use_hp = self.experimental and self.fid.highpass_cutoff_relative > 0
        self.rng = rng
        self._noise = None
        self._noise_pos = 0

    def reserve_noise(self, n_steps: int):
        if self.noise_std > 0 and n_steps > 0:
            if self.rng is None:
                raise ValueError("noisy tier needs a random stream")
            self._noise = self.rng.standard_normal((n_steps, self.cfg.n_nodes))
            self._noise_pos = 0

    def _next_noise(self) -> np.ndarray:
        if self._noise is None or self._noise_pos >= self._noise.shape[0]:
            self.reserve_noise(1)
        row = self._noise[self._noise_pos]
        self._noise_pos += 1
        return row

    def step(self, value: float) -> np.ndarray:
        if not math.isfinite(value):
            raise ValueError(f"non-finite reservoir input {value!r}")
        ring = self.ring
        ring[0] = self.prev_last
        ring[1:] = self.x[:-1]
        self.prev_last = self.x[-1]
        if self.experimental:
            if self.use_hp:
                self.hp_out = self.hp_a * (self.hp_out + value - self.hp_in)
                self.hp_in = value
                value = self.hp_out
            drive = fid.quantize(self.mask * value, self.fid.dac_bits, self.fid.dac_fractional_bits)
            x = np.sin(self.alpha * ring + self.cfg.input_gain * drive)
            if self.noise_std > 0:
                x += self.noise_std * self._next_noise()
        else:
            x = np.sin(self.alpha * ring + self.beta_mask * value)
        self.x = x
        self.n += 1
        return x

    def acquired(self) -> np.ndarray:
        return acquire(self.x, self.fid)

    def state(self) -> ReservoirState:
        return ReservoirState(self.x.copy(), self.prev_last, self.n, self.hp_in, self.hp_out)


def noise_stream(config: ReservoirConfig, *key: int) -> np.random.Generator:
    return np.random.default_rng([config.fidelity.noise_seed, *key])


def reservoir_step(
    state: ReservoirState, value: float, config: ReservoirConfig, rng: np.random.Generator | None = None
) -> ReservoirState:
    """Advance one timestep with scalar input ``value`` (teacher or fed-back output).

    In the noisy tier the noise comes from ``rng``; without one it is derived
    from ``(noise_seed, step_index)`` so the call stays a pure function.
    """
    if config.fidelity.noise_std > 0 and rng is None:
        rng = noise_stream(config, state.step_index)
    loop = _Loop(config, state, rng)
    loop.step(float(value))
    return loop.state()


def drive(
    config: ReservoirConfig,
    inputs,
    initial_state: ReservoirState | None = None,
    rng: np.random.Generator | None = None,
) -> StateTrajectory:
    """Teacher-force the reservoir, one step per input sample.

    Rows of the returned trajectory are the readout-visible states. Noise is
    drawn from ``rng`` (default: a stream seeded by ``fidelity.noise_seed``).
    """
    values = as_array(inputs)
    if values.size == 0:
        raise ValueError("inputs must be non-empty")
    if not np.all(np.isfinite(values)):
        raise ValueError("inputs must be finite")
    if initial_state is None:
        initial_state = ReservoirState.zeros(config.n_nodes)
    if rng is None and config.fidelity.noise_std > 0:
        rng = noise_stream(config)
    loop = _Loop(config, initial_state, rng)
    loop.reserve_noise(values.size)
    rows = np.empty((values.size, config.n_nodes))
    for k, v in enumerate(values):
        loop.step(v)
        rows[k] = loop.acquired()
    series = inputs if isinstance(inputs, TimeSeries) else TimeSeries(values)
    return StateTrajectory(rows, series, loop.state())


def is_idealized(config: ReservoirConfig) -> bool:
    return config.fidelity.tier is Tier.IDEALIZED
