"""One experiment end to end: teacher, training, warmup, closed loop, metrics."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import time
import traceback
from dataclasses import dataclass, field

import numpy as np

from . import tasks
from .evaluation import (
    EmptyBitSequenceError,
    bitize_lorenz,
    estimate_lyapunov,
    power_spectrum,
    prediction_horizon,
    randomness_report,
    spectrum_similarity,
)
from .evaluation.periodic import phase_aligned_mse
from .fidelity import FidelityConfig, Tier
from .reservoir import ReservoirConfig, ReservoirState, drive, noise_stream
from .series import TimeSeries
from .training import ReadoutWeights, autonomous_run, mse, ridge_train

TASK_KINDS = ("sine", "pattern", "mackey_glass", "lorenz")
METRICS = ("spectrum", "lyapunov", "randomness")


@dataclass(frozen=True)
class TaskSpec:
    kind: str = "sine"
    nu: float = 0.1
    pattern_len: int = 10
    mg_beta: float = 0.2
    mg_gamma: float = 0.1
    mg_tau: float = 17.0
    mg_n: float = 10.0
    mg_step: float = 1.0
    lorenz_dt: float = 0.02
    lorenz_scale: float = 0.01
    lorenz_discard: int = 1000
    balance_wings: bool = True
    offset: float = 0.0  # subtracted from the teacher (and hence the target)

    def __post_init__(self):
        if not math.isfinite(self.offset):
            raise ValueError("offset must be finite")
        if self.kind not in TASK_KINDS:
            raise ValueError(f"task kind must be one of {TASK_KINDS}, got {self.kind!r}")
        if self.pattern_len < 1:
            raise ValueError("pattern_len must be >= 1")

    def mackey_glass_params(self) -> tasks.MackeyGlassParams:
        return tasks.MackeyGlassParams(self.mg_beta, self.mg_gamma, self.mg_tau, self.mg_n, self.mg_step)

    def lorenz_params(self) -> tasks.LorenzParams:
        return tasks.LorenzParams(dt=self.lorenz_dt, x_scale=self.lorenz_scale, discard_prefix=self.lorenz_discard)


@dataclass(frozen=True)
class ReservoirSpec:
    """Reservoir parameters; the mask itself comes from ``Seeds.mask``."""

    n_nodes: int = 100
    feedback_gain: float = 0.9
    input_gain: float = 0.3
    tier: str = "idealized"
    noise_std: float | None = None  # None: tier default
    highpass_cutoff: float | None = None  # None: tier default
    n_zeroed_leading: int | None = None  # None: tier default

    def __post_init__(self):
        Tier(self.tier)
        if self.n_nodes < 1:
            raise ValueError("n_nodes must be positive")
        if not (math.isfinite(self.feedback_gain) and math.isfinite(self.input_gain)):
            raise ValueError("gains must be finite")

    def fidelity(self, noise_seed: int) -> FidelityConfig:
        overrides: dict = {"noise_seed": noise_seed}
        if self.noise_std is not None:
            overrides["noise_std"] = self.noise_std
        if self.highpass_cutoff is not None:
            overrides["highpass_cutoff_relative"] = self.highpass_cutoff
        return FidelityConfig.for_tier(self.tier, **overrides)


@dataclass(frozen=True)
class Seeds:
    mask: int = 0
    noise: int = 0
    task: int = 0


@dataclass(frozen=True)
class ExperimentSpec:
    task: TaskSpec = field(default_factory=TaskSpec)
    reservoir: ReservoirSpec = field(default_factory=ReservoirSpec)
    seeds: Seeds = field(default_factory=Seeds)
    train_len: int = 1000
    warmup_len: int = 128
    autonomous_len: int = 10_000
    mse_threshold: float = 1e-3
    horizon_window: int = 1
    washout: int | None = None  # None: max(100, 2 * MG delay)
    regularization: float | None = None  # None: validation scan
    n_runs: int = 1
    checkpoint_interval: int | None = None  # block MSEs of the first run, for long stability runs
    metrics: tuple[str, ...] = ()

    def __post_init__(self):
        if self.checkpoint_interval is not None and self.checkpoint_interval < 1:
            raise ValueError("checkpoint_interval must be >= 1")
        if self.train_len < self.reservoir.n_nodes:
            raise ValueError("train_len must be >= n_nodes")
        if self.warmup_len < 1:
            raise ValueError("warmup_len must be >= 1")
        if self.autonomous_len < 1:
            raise ValueError("autonomous_len must be >= 1")
        if self.mse_threshold <= 0:
            raise ValueError("mse_threshold must be positive")
        if self.horizon_window < 1:
            raise ValueError("horizon_window must be >= 1")
        if self.n_runs < 1:
            raise ValueError("n_runs must be >= 1")
        if self.regularization is not None and self.regularization < 0:
            raise ValueError("regularization must be >= 0")
        unknown = set(self.metrics) - set(METRICS)
        if unknown:
            raise ValueError(f"unknown metrics {sorted(unknown)}")
        if self.washout is not None and not 0 <= self.washout < self.train_len:
            raise ValueError("washout must lie in [0, train_len)")
        object.__setattr__(self, "metrics", tuple(self.metrics))

    @property
    def resolved_washout(self) -> int:
        if self.washout is not None:
            return self.washout
        w = 100
        if self.task.kind == "mackey_glass":
            w = max(w, 2 * self.task.mackey_glass_params().delay_steps)
        return min(w, self.train_len - self.reservoir.n_nodes)

    def reservoir_config(self) -> ReservoirConfig:
        r = self.reservoir
        return ReservoirConfig.create(
            r.n_nodes,
            r.feedback_gain,
            r.input_gain,
            mask_seed=self.seeds.mask,
            fidelity=r.fidelity(self.seeds.noise),
            n_zeroed_leading=r.n_zeroed_leading,
        )

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["metrics"] = list(self.metrics)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        d = dict(d)
        return cls(
            task=TaskSpec(**d.pop("task", {})),
            reservoir=ReservoirSpec(**d.pop("reservoir", {})),
            seeds=Seeds(**d.pop("seeds", {})),
            metrics=tuple(d.pop("metrics", ())),
            **d,
        )

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def replace(self, **changes) -> "ExperimentSpec":
        return dataclasses.replace(self, **changes)


@dataclass
class Teacher:
    series: TimeSeries
    train_start: int = 0


def make_teacher(spec: ExperimentSpec) -> Teacher:
    """Teacher long enough for training plus ``n_runs`` warmup/closed-loop segments."""
    teacher = _raw_teacher(spec)
    if spec.task.offset:
        s = teacher.series
        teacher.series = TimeSeries(s.values - spec.task.offset, s.semantics, s.dt, s.label)
    return teacher


def _raw_teacher(spec: ExperimentSpec) -> Teacher:
    t = spec.task
    seg = spec.warmup_len + spec.autonomous_len
    need = spec.train_len + spec.n_runs * seg
    if t.kind == "sine":
        return Teacher(tasks.gen_sine(t.nu, need))
    if t.kind == "pattern":
        return Teacher(tasks.gen_pattern(t.pattern_len, need, np.random.default_rng(spec.seeds.task)))
    if t.kind == "mackey_glass":
        return Teacher(tasks.mackey_glass_series(need, seed=spec.seeds.task, params=t.mackey_glass_params()))
    params = t.lorenz_params()
    pool = 20 * spec.train_len if t.balance_wings else 0
    traj = tasks.lorenz_series(need + pool, seed=spec.seeds.task, params=params)
    start = 0
    if t.balance_wings:
        x = traj.teacher.values
        try:
            start = tasks.select_balanced_window(x[: pool + spec.train_len], spec.train_len)
        except ValueError:
            start = 0
    return Teacher(traj.teacher[start : start + need], start)


@dataclass
class RunResult:
    index: int
    horizon: int
    autonomous_mse: float | None  # None when the loop diverged
    diverged: bool
    steps: int
    phase_mse: float | None = None
    wing_transitions: int | None = None

    def success(self, threshold: float) -> bool:
        score = self.phase_mse if self.phase_mse is not None else self.autonomous_mse
        return score is not None and score < threshold


@dataclass
class RunReport:
    spec: ExperimentSpec
    status: str = "ok"
    error: str | None = None
    weights_digest: str | None = None
    train_mse: float | None = None
    regularization: float | None = None
    output_gain: float | None = None
    runs: list[RunResult] = field(default_factory=list)
    mse_curve: np.ndarray | None = field(default=None, repr=False)
    output: TimeSeries | None = field(default=None, repr=False)
    target: TimeSeries | None = field(default=None, repr=False)
    metrics: dict = field(default_factory=dict)
    timestamp: float = field(default_factory=time.time)

    @property
    def horizons(self) -> np.ndarray:
        return np.array([r.horizon for r in self.runs], dtype=int)

    @property
    def prediction_horizon(self) -> int | None:
        return self.runs[0].horizon if self.runs else None

    @property
    def success_count(self) -> int:
        return sum(r.success(self.spec.mse_threshold) for r in self.runs)

    def to_dict(self, include_timestamp: bool = True) -> dict:
        h = self.horizons
        d = {
            "spec": self.spec.to_dict(),
            "spec_digest": self.spec.digest(),
            "status": self.status,
            "error": self.error,
            "weights_digest": self.weights_digest,
            "train_mse": self.train_mse,
            "regularization": self.regularization,
            "output_gain": self.output_gain,
            "prediction_horizon": self.prediction_horizon,
            "horizon_mean": float(h.mean()) if h.size else None,
            "horizon_std": float(h.std()) if h.size else None,
            "horizon_median": float(np.median(h)) if h.size else None,
            "success_count": self.success_count,
            "runs": [dataclasses.asdict(r) for r in self.runs],
            "mse_curve": None if self.mse_curve is None else self.mse_curve.tolist(),
            "metrics": self.metrics,
        }
        if include_timestamp:
            d["timestamp"] = self.timestamp
        return d

    def to_json(self, include_timestamp: bool = True) -> str:
        return json.dumps(_jsonable(self.to_dict(include_timestamp)), indent=2, sort_keys=True)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def train_readout(spec: ExperimentSpec, config: ReservoirConfig, teacher: TimeSeries):
    """Teacher-force ``train_len`` samples from rest and fit the readout."""
    u = teacher.values
    T = spec.train_len
    rng = noise_stream(config, 0) if config.fidelity.noise_std > 0 else None
    traj = drive(config, u[:T], ReservoirState.zeros(config.n_nodes), rng)
    weights = ridge_train(traj, u[1 : T + 1], spec.regularization, spec.resolved_washout, config.fidelity)
    return weights, traj.final_state


def closed_loop(spec, config, weights: ReadoutWeights, teacher: TimeSeries, after_training: ReservoirState, run: int):
    """Warmup then free-run segment ``run``; returns (AutonomousRun, target)."""
    u = teacher.values
    start = spec.train_len + run * (spec.warmup_len + spec.autonomous_len)
    warm = u[start : start + spec.warmup_len]
    target = u[start + spec.warmup_len : start + spec.warmup_len + spec.autonomous_len]
    rng = noise_stream(config, 1, run) if config.fidelity.noise_std > 0 else None
    res = autonomous_run(config, weights, warm, spec.autonomous_len, after_training.quiescent(), rng)
    return res, target


def _score(spec: ExperimentSpec, index: int, output: np.ndarray, target: np.ndarray, diverged: bool) -> RunResult:
    n = output.size
    if n:
        horizon, _ = prediction_horizon(output, target[:n], spec.mse_threshold, spec.horizon_window)
    else:
        horizon = 0
    auto = None if diverged or n == 0 else mse(output, target)
    phase = None
    if spec.task.kind == "sine" and auto is not None:
        phase = phase_aligned_mse(output, spec.task.nu)
    wings = None
    if spec.task.kind == "lorenz" and n:
        wings = _predicted_transitions(output[:horizon], target[:horizon])
    return RunResult(index, int(horizon), auto, bool(diverged), int(n), phase, wings)


def _predicted_transitions(output: np.ndarray, target: np.ndarray) -> int:
    """Wing switches of the target that the output also makes, within the horizon."""
    if target.size < 2:
        return 0
    st, so = np.sign(target), np.sign(output)
    switch = np.flatnonzero(st[1:] * st[:-1] < 0) + 1
    return int(sum(1 for k in switch if so[k] == st[k] and so[k - 1] == st[k - 1]))


def _metrics(spec: ExperimentSpec, output: np.ndarray, target: np.ndarray) -> dict:
    out: dict = {}
    dt = spec.task.mg_step if spec.task.kind == "mackey_glass" else spec.task.lorenz_dt
    if spec.task.kind in ("sine", "pattern"):
        dt = 1.0
    if "spectrum" in spec.metrics:
        try:
            so, st = power_spectrum(output, 50), power_spectrum(target, 50)
            out["spectrum"] = {
                "similarity_0_0.2": spectrum_similarity(so, st, (0.0, 0.2)),
                "peak_output": so.peak_frequency((1e-3, 0.5)),
                "peak_target": st.peak_frequency((1e-3, 0.5)),
            }
        except ValueError as exc:
            out["spectrum"] = {"error": str(exc)}
    if "lyapunov" in spec.metrics:
        preset = LYAPUNOV_PRESETS.get(spec.task.kind, LYAPUNOV_PRESETS["mackey_glass"])
        try:
            est = estimate_lyapunov(output, dt=dt, **preset)
            out["lyapunov"] = {"per_step": est.per_step, "per_time_unit": est.per_time_unit}
        except ValueError as exc:
            out["lyapunov"] = {"error": str(exc)}
    if "randomness" in spec.metrics:
        try:
            bits = bitize_lorenz(output)
            rep = randomness_report(bits)
            out["randomness"] = {"n_bits": len(bits), **rep.as_dict()}
        except (EmptyBitSequenceError, ValueError) as exc:
            out["randomness"] = {"error": str(exc)}
    return out


def checkpoint_mse(output: np.ndarray, target: np.ndarray, interval: int) -> list[float]:
    """MSE of consecutive ``interval``-step blocks (last block may be shorter)."""
    err = (output - target) ** 2
    return [float(err[k : k + interval].mean()) for k in range(0, err.size, interval)]


LYAPUNOV_PRESETS = {
    "mackey_glass": {"embedding_dim": 6, "embedding_lag": 12, "fit_range": (5, 50)},
    "lorenz": {"embedding_dim": 3, "embedding_lag": 5, "fit_range": (25, 125)},
}


def run_experiment(spec: ExperimentSpec) -> RunReport:
    """Train once, then run ``n_runs`` warmup + closed-loop segments at fixed weights.

    Run ``r`` warms up on the teacher right after segment ``r - 1`` and uses
    its own noise stream. Exceptions produce a report with status ``failed``.
    """
    report = RunReport(spec)
    try:
        config = spec.reservoir_config()
        teacher = make_teacher(spec).series
        weights, state = train_readout(spec, config, teacher)
        report.weights_digest = weights.digest()
        report.train_mse = weights.train_mse
        report.regularization = weights.regularization
        report.output_gain = weights.output_gain
        for r in range(spec.n_runs):
            res, target = closed_loop(spec, config, weights, teacher, state, r)
            out = res.output.values
            report.runs.append(_score(spec, r, out, target, res.diverged))
            if r == 0:
                n = out.size
                report.output = TimeSeries(out, teacher.semantics, teacher.dt, "autonomous output")
                report.target = TimeSeries(target, teacher.semantics, teacher.dt, "target")
                if n:
                    _, report.mse_curve = prediction_horizon(out, target[:n], spec.mse_threshold, spec.horizon_window)
                if spec.metrics and n:
                    report.metrics = _metrics(spec, out, target[:n])
                if spec.checkpoint_interval and n:
                    report.metrics["checkpoint_mse"] = checkpoint_mse(out, target[:n], spec.checkpoint_interval)
    except Exception as exc:  # noqa: BLE001 - reported, not raised
        report.status = "failed"
        report.error = f"{type(exc).__name__}: {exc}"
        report.metrics["traceback"] = traceback.format_exc(limit=3)
    return report


__all__ = [
    "ExperimentSpec",
    "ReservoirSpec",
    "RunReport",
    "RunResult",
    "Seeds",
    "TaskSpec",
    "make_teacher",
    "run_experiment",
]
