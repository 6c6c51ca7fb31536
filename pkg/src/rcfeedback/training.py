"""Readout training by ridge regression and closed-loop (autonomous) generation."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from . import fidelity as fid
from .fidelity import FidelityConfig
from .reservoir import ReservoirConfig, ReservoirState, StateTrajectory, _Loop, acquire
from .series import TimeSeries, as_array

RIDGE_GRID = tuple(10.0**k for k in range(-9, 0))


class IllConditionedTrainingError(ValueError):
    pass


@dataclass
class ReadoutWeights:
    """Linear readout ``y = output_gain * sum_i weights_i * (state_gain * x_i)``.

    Experimental tiers train on states pre-multiplied by the digital post-gain
    so that the stored weights fit the 25-bit ]-1, 1[ register; any residual
    overflow is folded into a power-of-two ``output_gain``.
    """

    weights: np.ndarray
    regularization: float = 0.0
    quantized: bool = False
    state_gain: float = 1.0
    output_gain: float = 1.0
    train_mse: float = float("nan")

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float).reshape(-1)

    def __len__(self) -> int:
        return self.weights.size

    @property
    def effective(self) -> np.ndarray:
        """Weights applied to raw acquired states."""
        return self.weights * (self.state_gain * self.output_gain)

    def digest(self) -> str:
        h = hashlib.sha256(np.ascontiguousarray(self.weights, dtype="<f8").tobytes())
        h.update(repr((self.regularization, self.quantized, self.state_gain, self.output_gain)).encode())
        return h.hexdigest()[:16]


def readout(state, weights: ReadoutWeights, fidelity: FidelityConfig | None = None) -> float:
    """Output for one state. A :class:`ReservoirState` is acquired through the
    converters first when ``fidelity`` is experimental; arrays are used as given."""
    if isinstance(state, ReservoirState):
        x = state.current
        if fidelity is not None:
            x = acquire(x, fidelity)
    else:
        x = np.asarray(state, dtype=float).reshape(-1)
    if x.size != weights.weights.size:
        raise ValueError(f"state length {x.size} != weight length {weights.weights.size}")
    return float(weights.output_gain * (weights.weights @ (weights.state_gain * x)))


def readout_series(states: np.ndarray, weights: ReadoutWeights) -> np.ndarray:
    states = np.asarray(states, dtype=float)
    if states.shape[-1] != weights.weights.size:
        raise ValueError("state width does not match the readout")
    return weights.output_gain * ((weights.state_gain * states) @ weights.weights)


def mse(a, b) -> float:
    """Mean squared difference of two equally long series."""
    x, y = as_array(a), as_array(b)
    if x.size != y.size:
        raise ValueError(f"length mismatch: {x.size} != {y.size}")
    if x.size == 0:
        raise ValueError("empty series")
    d = x - y
    return float(np.mean(d * d))


def ridge_solve(X: np.ndarray, d: np.ndarray, regularization: float) -> np.ndarray:
    """Minimise ``|X w - d|^2 + reg |w|^2``."""
    if regularization < 0:
        raise ValueError("regularization must be >= 0")
    X = np.asarray(X, dtype=float)
    d = np.asarray(d, dtype=float)
    n = X.shape[1]
    if regularization == 0:
        if np.linalg.matrix_rank(X) < n:
            raise IllConditionedTrainingError("state matrix is rank deficient and regularization is 0")
        w, *_ = np.linalg.lstsq(X, d, rcond=None)
        return w
    A = X.T @ X
    A[np.diag_indices(n)] += regularization
    try:
        return np.linalg.solve(A, X.T @ d)
    except np.linalg.LinAlgError as exc:
        raise IllConditionedTrainingError(str(exc)) from exc


def select_regularization(X: np.ndarray, d: np.ndarray, grid=RIDGE_GRID, validation_fraction: float = 0.2) -> float:
    """Grid value with the lowest MSE on the trailing ``validation_fraction`` of rows."""
    n_val = max(1, int(round(validation_fraction * X.shape[0])))
    Xt, dt_, Xv, dv = X[:-n_val], d[:-n_val], X[-n_val:], d[-n_val:]
    best, best_err = grid[0], math.inf
    for reg in grid:
        try:
            w = ridge_solve(Xt, dt_, reg)
        except IllConditionedTrainingError:
            continue
        err = float(np.mean((Xv @ w - dv) ** 2))
        if err < best_err:
            best, best_err = reg, err
    return best


def ridge_train(
    trajectory: StateTrajectory | np.ndarray,
    targets,
    regularization: float | None = 1e-6,
    washout: int = 0,
    fidelity: FidelityConfig | None = None,
) -> ReadoutWeights:
    """Fit readout weights so that row ``n`` of the trajectory predicts ``targets[n]``.

    For next-step prediction pass ``targets[n] = u(n+1)``. The first
    ``washout`` rows are excluded. ``regularization=None`` scans
    :data:`RIDGE_GRID` against a held-out tail. In experimental tiers the
    states are scaled by the digital post-gain before regression and the
    resulting weights are quantized to the weight register format.
    """
    X = trajectory.states if isinstance(trajectory, StateTrajectory) else np.asarray(trajectory, dtype=float)
    d = as_array(targets)
    if X.shape[0] != d.size:
        raise ValueError(f"trajectory has {X.shape[0]} rows but {d.size} targets")
    if washout < 0 or washout >= X.shape[0]:
        raise ValueError("washout must leave at least one row")
    X, d = X[washout:], d[washout:]
    experimental = fidelity is not None and fidelity.experimental
    state_gain = fidelity.digital_post_gain if experimental else 1.0
    Xs = X * state_gain
    reg = select_regularization(Xs, d) if regularization is None else float(regularization)
    w = ridge_solve(Xs, d, reg)
    output_gain = 1.0
    quantized = False
    if experimental:
        limit = 1.0 - 2.0**-fidelity.weight_fractional_bits
        peak = float(np.max(np.abs(w))) if w.size else 0.0
        if peak > limit:
            output_gain = 2.0 ** math.ceil(math.log2(peak / limit))
            w = w / output_gain
        w = fid.quantize(w, fidelity.weight_bits, fidelity.weight_fractional_bits)
        quantized = True
    weights = ReadoutWeights(w, reg, quantized, state_gain, output_gain)
    weights.train_mse = mse(readout_series(X, weights), d)
    return weights


def next_step_targets(teacher) -> tuple[np.ndarray, np.ndarray]:
    """Split a teacher into inputs ``u(0..T-1)`` and aligned targets ``u(1..T)``."""
    u = as_array(teacher)
    if u.size < 2:
        raise ValueError("teacher needs at least two samples")
    return u[:-1], u[1:]


@dataclass
class AutonomousRun:
    output: TimeSeries
    warmup_output: np.ndarray
    diverged: bool = False
    final_state: ReservoirState | None = field(default=None, repr=False)

    @property
    def steps_completed(self) -> int:
        return len(self.output)


def autonomous_run(
    config: ReservoirConfig,
    weights: ReadoutWeights,
    warmup,
    horizon: int,
    initial_state: ReservoirState | None = None,
    rng: np.random.Generator | None = None,
    divergence_bound: float = 1e6,
) -> AutonomousRun:
    """Teacher-force ``warmup``, then close the loop for ``horizon`` steps.

    The first autonomous output is the readout of the last warmup state; each
    output is fed back as the next input. Stops early (``diverged``) when an
    output is non-finite or exceeds ``divergence_bound`` in magnitude.
    """
    u = as_array(warmup)
    if u.size < 1:
        raise ValueError("warmup must contain at least one sample")
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if weights.weights.size != config.n_nodes:
        raise ValueError("readout size does not match the reservoir")
    if initial_state is None:
        initial_state = ReservoirState.zeros(config.n_nodes)
    if rng is None and config.fidelity.noise_std > 0:
        rng = np.random.default_rng(config.fidelity.noise_seed)
    loop = _Loop(config, initial_state, rng)
    loop.reserve_noise(u.size + horizon)
    w_eff = weights.effective
    warm = np.empty(u.size)
    for k, v in enumerate(u):
        loop.step(v)
        warm[k] = loop.acquired() @ w_eff
    out = np.empty(horizon)
    y = warm[-1]
    diverged = False
    n_done = horizon
    for k in range(horizon):
        if not math.isfinite(y) or abs(y) > divergence_bound:
            diverged = True
            n_done = k
            break
        out[k] = y
        loop.step(y)
        y = float(loop.acquired() @ w_eff)
    return AutonomousRun(TimeSeries(out[:n_done]), warm, diverged, loop.state())
