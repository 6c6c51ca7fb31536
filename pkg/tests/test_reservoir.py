import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rcfeedback.fidelity import FidelityConfig, Tier
from rcfeedback.reservoir import (
    HARDWARE_ZEROED_LEADING,
    ReservoirConfig,
    ReservoirState,
    _Loop,
    drive,
    generate_mask,
    reservoir_step,
)


def cfg(n=3, alpha=1.0, beta=0.0, mask=None, fidelity=None, **kw):
    mask = np.ones(n) if mask is None else np.asarray(mask, float)
    return ReservoirConfig(n, alpha, beta, mask, fidelity=fidelity or FidelityConfig(), **kw)


def test_generate_mask_hardware_zeros():
    m = generate_mask(100, 23, np.random.default_rng(4))
    assert np.all(m[:23] == 0)
    assert np.all(np.abs(m[23:]) <= 1) and np.all(m[23:] != 0)


def test_generate_mask_small_cases():
    m = generate_mask(4, 0, np.random.default_rng(0))
    assert m.shape == (4,) and np.all(np.abs(m) <= 1)
    m = generate_mask(5, 4, np.random.default_rng(0))
    assert np.all(m[:4] == 0) and -1 <= m[4] <= 1


def test_generate_mask_frozen_values():
    m = generate_mask(5, 2, np.random.default_rng(0))
    np.testing.assert_allclose(m, [0.0, 0.0, -0.9180529521276106, -0.9669447289429418, 0.6265404784005448], rtol=0, atol=1e-15)


def test_generate_mask_errors():
    with pytest.raises(ValueError):
        generate_mask(5, 5, np.random.default_rng(0))
    with pytest.raises(ValueError):
        generate_mask(5, 7, np.random.default_rng(0))


def test_generate_mask_deterministic():
    a = generate_mask(30, 3, np.random.default_rng(9))
    b = generate_mask(30, 3, np.random.default_rng(9))
    assert np.array_equal(a, b)


def test_config_validation():
    with pytest.raises(ValueError):
        cfg(mask=[0, 2.0, 0])
    with pytest.raises(ValueError):
        ReservoirConfig(3, 1.0, 0.0, np.ones(3), n_zeroed_leading=1)
    with pytest.raises(ValueError):
        ReservoirConfig(3, 1.0, 0.0, np.zeros(3), n_zeroed_leading=3)
    with pytest.raises(ValueError):
        cfg(alpha=float("nan"))
    with pytest.raises(ValueError):
        cfg(n=3, mask=np.ones(4))


def test_create_tier_defaults():
    ideal = ReservoirConfig.create(100, 0.9, 0.3)
    assert ideal.n_zeroed_leading == 0
    exp = ReservoirConfig.create(100, 0.9, 0.3, fidelity=FidelityConfig.for_tier("noiseless_experimental"))
    assert exp.n_zeroed_leading == HARDWARE_ZEROED_LEADING == 23
    assert np.all(exp.mask[:23] == 0)
    assert ReservoirConfig.create(600, 1, 1).roundtrip_time_s == 49.2e-6
    assert ReservoirConfig.create(100, 1, 1).roundtrip_time_s == 7.93e-6


def test_step_zero_gains():
    s = ReservoirState(np.array([0.3, -0.2, 0.9]), 0.4)
    out = reservoir_step(s, 5.0, cfg(alpha=0.0, beta=0.0))
    assert np.array_equal(out.current, np.zeros(3))


def test_step_input_only():
    out = reservoir_step(ReservoirState.zeros(3), math.pi / 6, cfg(alpha=0.0, beta=1.0))
    np.testing.assert_allclose(out.current, 0.5, atol=1e-15)


def test_step_node0_delay():
    s = ReservoirState(np.array([0.3, 0.0, 0.0]), previous_last=0.2, step_index=7)
    out = reservoir_step(s, 0.0, cfg(alpha=1.0, beta=0.0))
    np.testing.assert_allclose(out.current, [math.sin(0.2), math.sin(0.3), 0.0])
    assert out.previous_last == 0.0
    assert out.step_index == 8


def test_step_rejects_non_finite_and_wrong_length():
    with pytest.raises(ValueError):
        reservoir_step(ReservoirState.zeros(3), float("nan"), cfg())
    with pytest.raises(ValueError):
        reservoir_step(ReservoirState.zeros(4), 0.0, cfg())


@settings(max_examples=50)
@given(
    st.lists(st.floats(-1, 1), min_size=2, max_size=8),
    st.floats(-1, 1),
    st.floats(0.1, 2.0),
)
def test_ring_shift_property(values, prev_last, alpha):
    n = len(values)
    x = np.array(values)
    s = ReservoirState(x, prev_last)
    out = reservoir_step(s, 0.7, cfg(n=n, alpha=alpha, beta=0.0))
    np.testing.assert_allclose(out.current[1:], np.sin(alpha * x[:-1]))
    assert out.current[0] == pytest.approx(math.sin(alpha * prev_last))
    assert out.previous_last == x[-1]


@settings(max_examples=30)
@given(st.lists(st.floats(-50, 50), min_size=1, max_size=30), st.integers(0, 100))
def test_idealized_boundedness(inputs, seed):
    c = ReservoirConfig.create(10, 1.3, 2.0, mask_seed=seed)
    traj = drive(c, inputs)
    assert np.all(np.abs(traj.states) <= 1.0)


def test_mask_zero_independence():
    c = ReservoirConfig.create(12, 0.9, 1.0, mask_seed=3, n_zeroed_leading=5)
    s = ReservoirState(np.random.default_rng(0).uniform(-1, 1, 12), 0.1)
    a = reservoir_step(s, 0.4, c).current
    b = reservoir_step(s, -0.9, c).current
    assert np.array_equal(a[:5], b[:5])
    assert not np.array_equal(a[5:], b[5:])


def test_drive_examples():
    c = ReservoirConfig.create(8, 0.9, 0.5)
    traj = drive(c, np.zeros(20))
    assert traj.states.shape == (20, 8)
    assert np.all(traj.states == 0)
    u = np.sin(0.3 * np.arange(17))
    assert len(drive(c, u)) == 17
    with pytest.raises(ValueError):
        drive(c, [])


def test_drive_matches_repeated_steps():
    c = ReservoirConfig.create(6, 0.8, 0.7, mask_seed=2)
    u = np.cos(0.2 * np.arange(25))
    traj = drive(c, u)
    s = ReservoirState.zeros(6)
    for k, v in enumerate(u):
        s = reservoir_step(s, v, c)
        np.testing.assert_array_equal(traj.states[k], s.current)
    assert traj.final_state.step_index == 25


@pytest.mark.parametrize("tier", ["idealized", "noiseless_experimental", "noisy_experimental"])
def test_drive_deterministic(tier):
    c = ReservoirConfig.create(40, 0.9, 0.5, mask_seed=1, fidelity=FidelityConfig.for_tier(tier, noise_seed=5))
    u = np.sin(0.1 * np.arange(300))
    a, b = drive(c, u), drive(c, u)
    assert np.array_equal(a.states, b.states)


def test_noisy_differs_across_noise_seeds():
    u = np.sin(0.1 * np.arange(100))
    a = drive(ReservoirConfig.create(20, 0.9, 0.5, fidelity=FidelityConfig.for_tier("noisy_experimental", noise_seed=1)), u)
    b = drive(ReservoirConfig.create(20, 0.9, 0.5, fidelity=FidelityConfig.for_tier("noisy_experimental", noise_seed=2)), u)
    assert not np.array_equal(a.states, b.states)


class _ZeroRng:
    def standard_normal(self, shape):
        return np.zeros(shape)


def test_noiseless_equals_noisy_without_noise_draws():
    u = np.sin(0.05 * np.arange(400))
    quiet = ReservoirConfig.create(30, 0.9, 0.5, mask_seed=4, fidelity=FidelityConfig.for_tier("noiseless_experimental"))
    noisy = quiet.with_fidelity(FidelityConfig.for_tier("noisy_experimental"))
    a = drive(quiet, u)
    b = drive(noisy, u, rng=_ZeroRng())
    assert np.array_equal(a.states, b.states)


def test_experimental_states_are_quantized():
    c = ReservoirConfig.create(20, 0.9, 0.5, fidelity=FidelityConfig.for_tier("noisy_experimental"))
    traj = drive(c, np.sin(0.1 * np.arange(50)))
    scaled = traj.states * 2**13
    assert np.array_equal(scaled, np.round(scaled))


def test_reservoir_step_noise_is_pure_function_of_step_index():
    c = ReservoirConfig.create(10, 0.9, 0.5, fidelity=FidelityConfig.for_tier("noisy_experimental", noise_seed=3))
    s = ReservoirState.zeros(10)
    assert np.array_equal(reservoir_step(s, 0.2, c).current, reservoir_step(s, 0.2, c).current)


def test_filter_memory_carried_in_state():
    c = ReservoirConfig.create(5, 0.5, 0.5, fidelity=FidelityConfig.for_tier("noiseless_experimental"), n_zeroed_leading=0)
    traj = drive(c, np.ones(10))
    st_ = traj.final_state
    assert st_.hp_input == 1.0 and 0 < st_.hp_output < 1.0
    q = st_.quiescent()
    assert np.all(q.current == 0) and q.hp_output == st_.hp_output


def test_loop_is_tier_identity_when_idealized():
    c = ReservoirConfig.create(7, 0.9, 0.6, mask_seed=8)
    loop = _Loop(c, ReservoirState.zeros(7), None)
    x = loop.step(0.3)
    np.testing.assert_array_equal(x, np.sin(0.6 * c.mask * 0.3))
    assert c.fidelity.tier is Tier.IDEALIZED
