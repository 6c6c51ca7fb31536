import math

import numpy as np
import pytest

from rcfeedback import tasks
from rcfeedback.evaluation import power_spectrum
from rcfeedback.series import Timestep


def test_gen_sine_examples():
    s = tasks.gen_sine(0.1, 10_000)
    assert s.values[0] == 0.0
    assert abs(s.values.min() + 1) < 1e-3 and abs(s.values.max() - 1) < 1e-3
    q = tasks.gen_sine(math.pi / 2, 8).values
    np.testing.assert_allclose(q, [0, 1, 0, -1, 0, 1, 0, -1], atol=1e-12)
    assert s.semantics is Timestep.RESERVOIR_STEP


def test_gen_sine_length_validation():
    with pytest.raises(ValueError):
        tasks.gen_sine(0.1, 0)


def test_physical_frequency():
    assert tasks.physical_frequency(0.08, 7.93e-6) == pytest.approx(1.6e3, rel=0.01)
    assert tasks.physical_frequency(math.pi, 7.93e-6) == pytest.approx(63e3, rel=0.01)
    assert tasks.physical_frequency(0.0, 7.93e-6) == 0.0
    with pytest.raises(ValueError):
        tasks.physical_frequency(0.1, 0.0)


def test_gen_pattern_examples():
    rng = np.random.default_rng(0)
    assert len(set(tasks.gen_pattern(1, 50, rng).values)) == 1
    p = tasks.gen_pattern(7, 100, np.random.default_rng(1)).values
    assert np.array_equal(p[7:], p[:-7])
    q = tasks.gen_pattern(10, 10_000, np.random.default_rng(2)).values
    assert len(np.unique(q)) == 10
    assert np.all(np.abs(q) <= 0.5)
    with pytest.raises(ValueError):
        tasks.gen_pattern(10, 5, rng)


def test_mackey_glass_params_validation():
    with pytest.raises(ValueError):
        tasks.MackeyGlassParams(mg_tau=17.5)
    with pytest.raises(ValueError):
        tasks.MackeyGlassParams(mg_beta=0.0)
    assert tasks.MackeyGlassParams().delay_steps == 17


def test_mackey_glass_fixed_point():
    x = tasks.integrate_mackey_glass(tasks.MackeyGlassParams(), 10_000, history=1.0).values
    assert np.max(np.abs(x - 1.0)) < 1e-9


def test_mackey_glass_history_too_short():
    with pytest.raises(ValueError):
        tasks.integrate_mackey_glass(tasks.MackeyGlassParams(), 10, history=np.ones(10))


def test_mackey_glass_frozen_values():
    mg = tasks.mackey_glass_series(2000, seed=0)
    np.testing.assert_allclose(
        mg.values[[0, 1, 500, 1999]],
        [0.7607191293296431, 0.7336216818598605, 0.6865408840082456, 0.7154980845659136],
        rtol=1e-12,
    )
    assert mg.semantics is Timestep.MG_TIME_UNIT


def test_mackey_glass_step_halving():
    a = tasks.integrate_mackey_glass(tasks.MackeyGlassParams(), 11, history=0.9).values[-1]
    b = tasks.integrate_mackey_glass(tasks.MackeyGlassParams(step=0.5), 21, history=0.9).values[-1]
    assert abs(a - b) < 1e-6


def test_mackey_glass_chaotic_range():
    x = tasks.mackey_glass_series(20_000, seed=1).values
    assert 0.3 < x.min() < 0.6 and 1.2 < x.max() < 1.4


def test_mackey_glass_spectrum_has_harmonic_comb():
    # dominant peak of this oracle sits at ~0.02 cycles/step with harmonics
    sp = power_spectrum(tasks.mackey_glass_series(100_000, seed=0), 1)
    assert sp.peak_frequency((0.005, 0.5)) == pytest.approx(0.0201, abs=0.001)


def test_lorenz_equilibria():
    p = tasks.LorenzParams(discard_prefix=0)
    origin = tasks.integrate_lorenz(p, 10_000, init=(0.0, 0.0, 0.0))
    assert np.all(origin.x.values == 0) and np.all(origin.z.values == 0)
    c = math.sqrt(72.0)
    fixed = tasks.integrate_lorenz(p, 10_000, init=(c, c, 27.0))
    assert np.max(np.abs(fixed.x.values - c)) < 1e-9
    assert np.max(np.abs(fixed.z.values - 27.0)) < 1e-9
    assert np.allclose(tasks.lorenz_rhs((c, c, 27.0), p), 0.0, atol=1e-12)


def test_lorenz_discard_and_scaling():
    tr = tasks.integrate_lorenz(tasks.LorenzParams(), 5000)
    assert len(tr.teacher) == 4000
    np.testing.assert_allclose(tr.teacher.values, 0.01 * tr.x.values)
    assert np.max(np.abs(tr.teacher.values)) < 0.25
    with pytest.raises(ValueError):
        tasks.integrate_lorenz(tasks.LorenzParams(), 1000)


def test_lorenz_frozen_values():
    t = tasks.lorenz_series(1000).teacher.values
    np.testing.assert_allclose(t[[0, 1, 999]], [0.05954527155668592, 0.07159886360010712, 0.0225401784566933], rtol=1e-12)


def test_lorenz_volume_contraction():
    p = tasks.LorenzParams(discard_prefix=0)
    base = tasks._lorenz_rk4((1, 1, 1), 2000, p, p.dt)[-1]
    eps = 1e-7
    end = tasks._lorenz_rk4(base, 51, p, p.dt)[-1]
    cloud = np.array([tasks._lorenz_rk4(base + eps * e, 51, p, p.dt)[-1] for e in np.eye(3)]) - end
    rate = math.log(abs(np.linalg.det(cloud)) / eps**3) / 1.0
    assert rate == pytest.approx(-(p.sigma + 1 + p.b), rel=0.01)


def test_lorenz_step_halving():
    p = tasks.LorenzParams(discard_prefix=0)

    def end(dt, t):
        return tasks._lorenz_rk4((1, 1, 1), int(round(t / dt)) + 1, p, dt)[-1]

    assert np.max(np.abs(end(0.002, 10) - end(0.001, 10))) < 1e-6
    # fourth-order convergence at the default step
    e1 = np.max(np.abs(end(0.02, 1) - end(0.01, 1)))
    e2 = np.max(np.abs(end(0.01, 1) - end(0.005, 1)))
    assert e1 / e2 > 10


def test_lorenz_seed_jitter():
    a = tasks.lorenz_series(100, seed=1).teacher.values
    b = tasks.lorenz_series(100, seed=2).teacher.values
    assert not np.array_equal(a, b)
    assert np.array_equal(a, tasks.lorenz_series(100, seed=1).teacher.values)


def test_wing_helpers():
    x = np.array([1, 2, -1, -2, 3, 0, 4])
    assert tasks.wing_transitions(x) == 2
    assert tasks.wing_balance([1, -1, 1, -1]) == 0
    series = np.concatenate([np.ones(500), -np.ones(100), np.tile([1, -1], 500)])
    start = tasks.select_balanced_window(series, 200, stride=100)
    assert abs(tasks.wing_balance(series[start : start + 200])) <= 0.1
    with pytest.raises(ValueError):
        tasks.select_balanced_window(np.ones(300), 100)
