"""Teacher signals: sine waves, periodic random patterns, Mackey-Glass and Lorenz series."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .series import TimeSeries, Timestep


def gen_sine(nu: float, length: int) -> TimeSeries:
    """``u(n) = sin(nu * n)`` for ``n = 0 .. length-1``."""
    if length < 1:
        raise ValueError("length must be >= 1")
    n = np.arange(length, dtype=float)
    return TimeSeries(np.sin(nu * n), label=f"sine nu={nu}")


def physical_frequency(nu: float, roundtrip_time_s: float) -> float:
    """Physical frequency in Hz of a relative frequency ``nu`` for loop delay ``T``."""
    if roundtrip_time_s <= 0:
        raise ValueError("roundtrip_time_s must be positive")
    return nu / (2.0 * math.pi * roundtrip_time_s)


def gen_pattern(pattern_len: int, length: int, rng: np.random.Generator) -> TimeSeries:
    """Tile ``pattern_len`` uniform draws from [-0.5, 0.5] out to ``length`` samples."""
    if pattern_len < 1:
        raise ValueError("pattern_len must be >= 1")
    if length < pattern_len:
        raise ValueError("length must be >= pattern_len")
    pattern = rng.uniform(-0.5, 0.5, size=pattern_len)
    return TimeSeries(np.resize(pattern, length), label=f"pattern L={pattern_len}")


# -- Mackey-Glass -------------------------------------------------------------


@dataclass(frozen=True)
class MackeyGlassParams:
    mg_beta: float = 0.2
    mg_gamma: float = 0.1
    mg_tau: float = 17.0
    mg_n: float = 10.0
    step: float = 1.0

    def __post_init__(self):
        for name in ("mg_beta", "mg_gamma", "mg_tau", "mg_n", "step"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")
        ratio = self.mg_tau / self.step
        if abs(ratio - round(ratio)) > 1e-9:
            raise ValueError("mg_tau must be an integer multiple of step")
        if round(ratio) < 2:
            raise ValueError("mg_tau must span at least two steps")

    @property
    def delay_steps(self) -> int:
        return int(round(self.mg_tau / self.step))


def _mg_rhs(x: float, xd: float, p: MackeyGlassParams) -> float:
    return p.mg_beta * xd / (1.0 + xd**p.mg_n) - p.mg_gamma * x


def integrate_mackey_glass(params: MackeyGlassParams, n_samples: int, history=0.9) -> TimeSeries:
    """Fixed-step RK4 on the Mackey-Glass delay equation.

    ``history`` is a constant or a sequence sampled at ``params.step`` covering
    ``[-tau, 0]`` (``tau/step + 1`` values, last one is ``x(0)``). The
    delayed value at half-step stage times comes from centred cubic
    interpolation of the stored samples. Returns ``x(0), x(h), ...``.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    d = params.delay_steps
    h = params.step
    if np.ndim(history) == 0:
        hist = np.full(d + 1, float(history))
    else:
        hist = np.asarray(history, dtype=float).reshape(-1)
        if hist.size < d + 1:
            raise ValueError(f"history must cover [-tau, 0]: need {d + 1} samples, got {hist.size}")
        hist = hist[-(d + 1):]
    # buf[k] holds x((k - d - 1) h); one extra leading sample for the cubic stencil
    buf = np.empty(n_samples + d + 1)
    buf[0] = hist[0]
    buf[1 : d + 2] = hist
    pad = 1
    for i in range(n_samples - 1):
        k = i + d + pad  # index of x(t_i)
        x = buf[k]
        xm1, x0, x1, x2 = buf[k - d - 1], buf[k - d], buf[k - d + 1], buf[k - d + 2]
        x_half = (-xm1 + 9.0 * x0 + 9.0 * x1 - x2) / 16.0
        k1 = _mg_rhs(x, x0, params)
        k2 = _mg_rhs(x + 0.5 * h * k1, x_half, params)
        k3 = _mg_rhs(x + 0.5 * h * k2, x_half, params)
        k4 = _mg_rhs(x + h * k3, x1, params)
        buf[k + 1] = x + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
    out = buf[d + pad : d + pad + n_samples]
    if not np.all(np.isfinite(out)):
        raise FloatingPointError("Mackey-Glass integration diverged")
    return TimeSeries(out, Timestep.MG_TIME_UNIT, h, label="mackey-glass")


def mackey_glass_series(
    n_samples: int,
    seed: int = 0,
    params: MackeyGlassParams | None = None,
    discard: int = 1000,
    base_history: float = 0.9,
    perturbation: float = 0.01,
) -> TimeSeries:
    """Chaotic Mackey-Glass samples from a seeded near-constant history, transient removed."""
    params = params or MackeyGlassParams()
    rng = np.random.default_rng(seed)
    hist = base_history + perturbation * rng.uniform(-1.0, 1.0, size=params.delay_steps + 1)
    full = integrate_mackey_glass(params, n_samples + discard, hist)
    return full[discard:]


# -- Lorenz ---------------------------------------------------------------------


@dataclass(frozen=True)
class LorenzParams:
    sigma: float = 10.0
    r: float = 28.0
    b: float = 8.0 / 3.0
    dt: float = 0.02
    x_scale: float = 0.01
    discard_prefix: int = 1000

    def __post_init__(self):
        for name in ("sigma", "r", "b", "dt", "x_scale"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")
        if self.discard_prefix < 0:
            raise ValueError("discard_prefix must be >= 0")


@dataclass
class LorenzTrajectory:
    x: TimeSeries
    y: TimeSeries
    z: TimeSeries
    teacher: TimeSeries


def lorenz_rhs(state, p: LorenzParams):
    x, y, z = state
    return (p.sigma * (y - x), -x * z + p.r * x - y, x * y - p.b * z)


def _lorenz_rk4(init, n: int, p: LorenzParams, dt: float) -> np.ndarray:
    s, r, b = p.sigma, p.r, p.b
    out = np.empty((n, 3))
    x, y, z = (float(v) for v in init)
    h2 = 0.5 * dt
    h6 = dt / 6.0
    for i in range(n):
        out[i] = x, y, z
        ax, ay, az = s * (y - x), -x * z + r * x - y, x * y - b * z
        x2, y2, z2 = x + h2 * ax, y + h2 * ay, z + h2 * az
        bx, by, bz = s * (y2 - x2), -x2 * z2 + r * x2 - y2, x2 * y2 - b * z2
        x3, y3, z3 = x + h2 * bx, y + h2 * by, z + h2 * bz
        cx, cy, cz = s * (y3 - x3), -x3 * z3 + r * x3 - y3, x3 * y3 - b * z3
        x4, y4, z4 = x + dt * cx, y + dt * cy, z + dt * cz
        dx, dy, dz = s * (y4 - x4), -x4 * z4 + r * x4 - y4, x4 * y4 - b * z4
        x += h6 * (ax + 2 * bx + 2 * cx + dx)
        y += h6 * (ay + 2 * by + 2 * cy + dy)
        z += h6 * (az + 2 * bz + 2 * cz + dz)
    return out


def integrate_lorenz(params: LorenzParams, n_samples: int, init=(1.0, 1.0, 1.0)) -> LorenzTrajectory:
    """Classical RK4 at ``params.dt``; drops the first ``discard_prefix`` samples.

    Returns ``n_samples - discard_prefix`` samples of each coordinate and the
    scaled x teacher series.
    """
    if n_samples <= params.discard_prefix:
        raise ValueError("n_samples must exceed discard_prefix")
    traj = _lorenz_rk4(init, n_samples, params, params.dt)[params.discard_prefix :]
    if not np.all(np.isfinite(traj)):
        raise FloatingPointError("Lorenz integration diverged")
    mk = lambda v, lab: TimeSeries(v, Timestep.LORENZ_TIME_UNIT, params.dt, label=lab)  # noqa: E731
    return LorenzTrajectory(
        x=mk(traj[:, 0], "lorenz x"),
        y=mk(traj[:, 1], "lorenz y"),
        z=mk(traj[:, 2], "lorenz z"),
        teacher=mk(traj[:, 0] * params.x_scale, f"lorenz x*{params.x_scale}"),
    )


def lorenz_series(
    n_samples: int, seed: int | None = None, params: LorenzParams | None = None, jitter: float = 1e-3
) -> LorenzTrajectory:
    """Lorenz trajectory from (1, 1, 1), optionally jittered by a seeded offset."""
    params = params or LorenzParams()
    init = np.ones(3)
    if seed is not None:
        init = init + jitter * np.random.default_rng(seed).standard_normal(3)
    return integrate_lorenz(params, n_samples + params.discard_prefix, tuple(init))


def wing_balance(x) -> float:
    """Fraction of samples with ``x > 0`` minus fraction with ``x < 0``."""
    x = np.asarray(x, dtype=float)
    return float((np.count_nonzero(x > 0) - np.count_nonzero(x < 0)) / x.size)


def wing_transitions(x) -> int:
    """Number of sign changes of ``x`` (lobe-to-lobe switches of the attractor)."""
    s = np.sign(np.asarray(x, dtype=float))
    s = s[s != 0]
    return int(np.count_nonzero(s[1:] != s[:-1]))


def select_balanced_window(x, length: int, tolerance: float = 0.1, stride: int = 100) -> int:
    """First start index whose window spends equal time on both wings within ``tolerance``."""
    x = np.asarray(x, dtype=float)
    if length > x.size:
        raise ValueError("window longer than series")
    for start in range(0, x.size - length + 1, stride):
        if abs(wing_balance(x[start : start + length])) <= tolerance:
            return start
    raise ValueError("no balanced window found")
