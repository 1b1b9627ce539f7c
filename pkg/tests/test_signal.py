import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rffp.errors import DegenerateSignalError, InvalidProfileError, ParameterError
from rffp.signal import (CLEAN, BurstRecord, DeviceProfile, IQSequence, add_awgn, default_fleet,
                         rms_normalize, synthesize_emission)

FS = 10e6


def burst_of(x, fs=FS):
    return BurstRecord(IQSequence(x, fs), device_id=0)


def test_iqsequence_validation():
    with pytest.raises(ParameterError):
        IQSequence(np.array([]), FS)
    with pytest.raises(ParameterError):
        IQSequence(np.array([1.0, np.nan]), FS)
    with pytest.raises(ParameterError):
        IQSequence(np.ones(4), 0.0)
    s = IQSequence(np.ones(4), FS)
    assert not s.samples.flags.writeable


def test_synthesis_is_deterministic():
    p = default_fleet()[3]
    a = synthesize_emission(p, 100e-6, seed=7, burst_index=5)
    b = synthesize_emission(p, 100e-6, seed=7, burst_index=5)
    assert np.array_equal(a.signal.samples, b.signal.samples)
    c = synthesize_emission(p, 100e-6, seed=7, burst_index=6)
    assert not np.array_equal(a.signal.samples, c.signal.samples)


def test_plain_rise_is_monotone():
    p = DeviceProfile(0, rise_time_s=2e-6, ring_freq_hz=1e6, overshoot=0.0, jitter_std=0.0)
    env = np.abs(synthesize_emission(p, 100e-6, seed=1).signal.samples)
    assert np.all(np.diff(env) >= -1e-12)
    assert env[0] == 0.0 and env[-1] == pytest.approx(1.0, abs=1e-6)


def test_rise_time_separates_devices_monte_carlo():
    # mean envelopes of two devices must differ by much more than their burst-to-burst spread
    envs = {}
    for rise in (1e-6, 5e-6):
        p = DeviceProfile(0, rise_time_s=rise, jitter_std=0.05)
        envs[rise] = np.stack([np.abs(synthesize_emission(p, 50e-6, 3, burst_index=b).signal.samples)
                               for b in range(100)])
    means = {k: v.mean(axis=0) for k, v in envs.items()}
    spread = max(math.sqrt(np.mean(np.sum((v - means[k]) ** 2, axis=1))) for k, v in envs.items())
    gap = np.linalg.norm(means[1e-6] - means[5e-6])
    assert gap > 3 * spread


def test_invalid_profiles_rejected():
    with pytest.raises(InvalidProfileError):
        synthesize_emission(DeviceProfile(0, rise_time_s=float("nan")), 1e-4, 0)
    with pytest.raises(InvalidProfileError):
        synthesize_emission(DeviceProfile(0, rise_time_s=-1e-6), 1e-4, 0)
    with pytest.raises(ParameterError):
        synthesize_emission(DeviceProfile(0, rise_time_s=1e-6), 5e-6, 0)  # 50 samples


def test_rms_normalize_constant():
    out = rms_normalize(burst_of(np.full(64, 2.0 + 0j)))
    np.testing.assert_allclose(np.abs(out.signal.samples), 1.0, rtol=1e-15)


def test_rms_normalize_identity_on_unit_rms(rng):
    x = np.exp(1j * rng.uniform(0, 2 * np.pi, 500))
    out = rms_normalize(burst_of(x))
    np.testing.assert_allclose(out.signal.samples, x, rtol=1e-12, atol=0)


def test_rms_normalize_random_recomputed(rng):
    x = rng.standard_normal(1000) * 3 + 1j * rng.standard_normal(1000)
    y = rms_normalize(burst_of(x)).signal.samples
    assert math.sqrt(np.mean(y.real ** 2 + y.imag ** 2)) == pytest.approx(1.0, rel=1e-12)
    np.testing.assert_allclose(np.angle(y), np.angle(x), atol=1e-12)


def test_rms_normalize_zero_burst():
    with pytest.raises(DegenerateSignalError):
        rms_normalize(burst_of(np.zeros(32, complex)))


complex_arrays = st.lists(st.tuples(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3)), min_size=1, max_size=64).map(
    lambda v: np.array([a + 1j * b for a, b in v])).filter(lambda x: np.sqrt(np.mean(np.abs(x) ** 2)) > 1e-6)


@given(complex_arrays, st.floats(1e-3, 1e3))
def test_rms_normalize_scale_invariant_and_idempotent(x, a):
    once = rms_normalize(burst_of(x)).signal.samples
    scaled = rms_normalize(burst_of(a * x)).signal.samples
    twice = rms_normalize(burst_of(once)).signal.samples
    np.testing.assert_allclose(scaled, once, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(twice, once, rtol=1e-12, atol=1e-12)


def test_awgn_zero_db_noise_power_matches_signal(rng):
    s = IQSequence(np.exp(1j * rng.uniform(0, 6.28, 200_000)) * 2.0, FS)
    noise = add_awgn(s, 0.0, seed=11).samples - s.samples
    assert np.mean(np.abs(noise) ** 2) == pytest.approx(s.power, rel=0.05)


def test_awgn_clean_is_identity(rng):
    s = IQSequence(rng.standard_normal(100) + 0j, FS)
    assert add_awgn(s, CLEAN, 1) is s
    assert add_awgn(s, float("inf"), 1) is s


def test_awgn_ten_db_monte_carlo():
    s = IQSequence(np.ones(1_000_000, complex), FS)
    noise = add_awgn(s, 10.0, seed=5).samples - s.samples
    assert abs(np.mean(np.abs(noise) ** 2) - 0.1) < 0.003
    # equal split between I and Q
    assert np.var(noise.real) == pytest.approx(0.05, rel=0.02)
    assert np.var(noise.imag) == pytest.approx(0.05, rel=0.02)


def test_awgn_contract(rng):
    s = IQSequence(rng.standard_normal(300) + 1j, 2e6)
    a, b = add_awgn(s, 20, 9), add_awgn(s, 20, 9)
    assert len(a) == len(s) and a.sample_rate_hz == s.sample_rate_hz
    assert np.array_equal(a.samples, b.samples)
    with pytest.raises(DegenerateSignalError):
        add_awgn(IQSequence(np.zeros(10), FS), 10, 0)


def test_default_fleet_is_valid():
    fleet = default_fleet()
    assert [p.device_id for p in fleet] == list(range(9))
    for p in fleet:
        p.validate()
