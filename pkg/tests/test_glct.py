import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rffp.errors import ParameterError
from rffp.glct import (ChirpletParams, alpha_from_chirp_rate, alpha_grid, chirp_rate_from_alpha, glct,
                       glct_candidates, renyi_entropy, stft)
from rffp.signal import IQSequence

FS = 1e7


def sig(x, fs=FS):
    return IQSequence(np.asarray(x, dtype=complex), fs)


def rect(w, n=1, hop=None, bins=None):
    return ChirpletParams(n, np.ones(w), hop or w, bins or w)


def test_alpha_grid_examples():
    np.testing.assert_array_equal(alpha_grid(1), [0.0])
    np.testing.assert_allclose(alpha_grid(3), [-np.pi / 4, 0, np.pi / 4], atol=1e-15)
    with pytest.raises(ParameterError):
        alpha_grid(0)


@given(st.integers(0, 60))
def test_alpha_grid_properties(m):
    n = 2 * m + 1
    g = alpha_grid(n)
    assert g.size == n and 0.0 in g
    np.testing.assert_array_equal(g, -g[::-1])
    assert np.all(np.diff(g) > 0) and np.all(np.abs(g) < np.pi / 2)
    k = np.arange(1, n + 1)
    np.testing.assert_allclose(g, -np.pi / 2 + k * np.pi / (n + 1), atol=1e-14)


def test_alpha_from_chirp_rate_examples():
    assert alpha_from_chirp_rate(0.0, FS) == 0.0
    assert alpha_from_chirp_rate(5e13 / 2, 1e7) == pytest.approx(math.atan(0.5), rel=1e-15)
    big = [alpha_from_chirp_rate(c, FS) for c in (1e12, 1e14, 1e16, 1e20)]
    assert all(a < b for a, b in zip(big, big[1:])) and big[-1] == pytest.approx(np.pi / 2, abs=1e-6)
    assert alpha_from_chirp_rate(-1e20, FS) == pytest.approx(-np.pi / 2, abs=1e-6)
    with pytest.raises(ParameterError):
        alpha_from_chirp_rate(1.0, 0.0)


@given(st.floats(-1e6, 1e6).filter(lambda r: abs(r) > 1e-9), st.floats(1e3, 1e9))
def test_chirp_rate_inverse(r, fs):
    # r = tan(alpha); beyond ~1e6 alpha sits within a few ulps of pi/2 and the
    # round trip is limited by float64 resolution, not by the mapping
    c = r * fs * fs / 2
    a = alpha_from_chirp_rate(c, fs)
    assert -np.pi / 2 < a < np.pi / 2
    assert chirp_rate_from_alpha(a, fs) == pytest.approx(c, rel=1e-9)


def test_params_validation():
    with pytest.raises(ParameterError):
        ChirpletParams.hann(32, n_chirplets=4)
    with pytest.raises(ParameterError):
        ChirpletParams(1, np.zeros(8), 1, 8)
    with pytest.raises(ParameterError):
        ChirpletParams(1, np.ones(8), 0, 8)
    with pytest.raises(ParameterError):
        ChirpletParams(1, np.ones(8), 1, 7)
    with pytest.raises(ParameterError):
        stft(sig(np.ones(7)), rect(8))


def test_stft_tone_peaks_at_bin():
    w, k0 = 32, 5
    n = np.arange(512)
    g = stft(sig(np.exp(2j * np.pi * k0 * n / w)), rect(w, hop=8))
    assert np.all(np.argmax(g.magnitude, axis=1) == k0)


def test_stft_zero_signal():
    g = stft(sig(np.zeros(128)), ChirpletParams.hann(32))
    assert not np.any(g.values)


def dft_oracle(x, win, hop, bins):
    w = len(win)
    frames = (len(x) - w) // hop + 1
    out = np.zeros((frames, bins), complex)
    for f in range(frames):
        for k in range(bins):
            out[f, k] = sum(win[u] * x[f * hop + u] * cmath.exp(-2j * cmath.pi * k * u / bins) for u in range(w))
    return out


def test_stft_matches_naive_dft(rng):
    x = rng.standard_normal(256) + 1j * rng.standard_normal(256)
    p = ChirpletParams(1, rng.uniform(0.1, 1, 64), 32, 64)
    g = stft(sig(x), p)
    assert g.values.shape[0] == 7
    np.testing.assert_allclose(g.values, dft_oracle(x, p.window, 32, 64), rtol=0, atol=1e-9)


def test_stft_zero_padded_bins(rng):
    x = rng.standard_normal(40) + 0j
    p = ChirpletParams(1, np.hanning(16), 5, 24)
    np.testing.assert_allclose(stft(sig(x), p).values, dft_oracle(x, p.window, 5, 24), atol=1e-9)


def candidate_oracle(x, params, fs):
    """Direct evaluation of every demodulated candidate with scalar loops."""
    ts = 1 / fs
    w, hop, bins = params.w, params.hop, params.fft_bins
    alphas = [-math.pi / 2 + k * math.pi / (params.n_chirplets + 1) for k in range(1, params.n_chirplets + 1)]
    frames = (len(x) - w) // hop + 1
    out = np.zeros((len(alphas), frames, bins), complex)
    for a_i, a in enumerate(alphas):
        rate = math.tan(a) * fs / (2 * ts)
        for f in range(frames):
            for k in range(bins):
                acc = 0j
                for u in range(w):
                    tau = (u - w / 2) * ts
                    acc += (params.window[u] * x[f * hop + u] * cmath.exp(-1j * rate * tau * tau)
                            * cmath.exp(-2j * math.pi * k * u / bins))
                out[a_i, f, k] = acc
    return np.array(alphas), out


def test_candidates_match_direct_evaluation(rng):
    x = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    p = ChirpletParams.hann(16, n_chirplets=5, hop=8)
    alphas, cand = glct_candidates(sig(x), p)
    ref_alpha, ref = candidate_oracle(x, p, FS)
    np.testing.assert_allclose(alphas, ref_alpha, atol=1e-14)
    np.testing.assert_allclose(cand, ref, rtol=0, atol=1e-9 * np.abs(ref).max())


def test_glct_selection_matches_brute_force(rng):
    x = rng.standard_normal(96) + 1j * rng.standard_normal(96)
    p = ChirpletParams.hann(16, n_chirplets=7, hop=4)
    alphas, cand = glct_candidates(sig(x), p)
    g = glct(sig(x), p)
    mags = np.abs(cand)
    for f in range(mags.shape[1]):
        for k in range(mags.shape[2]):
            i = int(np.argmax(mags[:, f, k]))
            assert g.selected_alpha[f, k] == alphas[i]
            assert g.values[f, k] == cand[i, f, k]


def test_single_chirplet_equals_stft(rng):
    x = rng.standard_normal(300) + 1j * rng.standard_normal(300)
    p = ChirpletParams.hann(32, n_chirplets=1, hop=8)
    np.testing.assert_allclose(glct(sig(x), p).values, stft(sig(x), p).values, rtol=0, atol=1e-12)
    assert not np.any(glct(sig(x), p).selected_alpha)


def test_tone_ridge_selects_zero_angle():
    # on the spectral ridge the undemodulated candidate wins and matches the STFT
    n = np.arange(512)
    x = np.exp(2j * np.pi * 4 * n / 32)
    for n_ch in (3, 5, 9):
        p = ChirpletParams.hann(32, n_chirplets=n_ch, hop=8)
        g, s = glct(sig(x), p), stft(sig(x), p)
        ridge = np.argmax(s.magnitude, axis=1)
        rows = np.arange(ridge.size)
        assert np.all(g.selected_alpha[rows, ridge] == 0.0)
        np.testing.assert_allclose(g.magnitude[rows, ridge], s.magnitude[rows, ridge], rtol=1e-9)
        assert np.all(np.argmax(g.magnitude, axis=1) == ridge)


def chirp(alpha, n=512, f0=1e6):
    c = chirp_rate_from_alpha(alpha, FS)
    t = np.arange(n) / FS
    return np.exp(1j * (2 * np.pi * f0 * t + c * t ** 2))


@pytest.mark.parametrize("deg", [-54, -36, -18, 18, 36, 54])
def test_chirp_concentrates_and_selects_nearest_angle(deg):
    p = ChirpletParams.hann(32, n_chirplets=9, hop=8)
    grid_a = alpha_grid(9)
    alpha = math.radians(deg) + 0.02
    x = sig(chirp(alpha))
    g, s = glct(x, p), stft(x, p)
    assert renyi_entropy(g.magnitude ** 2) < renyi_entropy(s.magnitude ** 2)
    e = g.magnitude ** 2
    hot = e >= np.quantile(e, 0.95)
    vals, counts = np.unique(g.selected_alpha[hot], return_counts=True)
    modal = vals[np.argmax(counts)]
    assert modal == grid_a[np.argmin(np.abs(grid_a - alpha))]


def test_renyi_entropy_uniform():
    assert renyi_entropy(np.ones((8, 4))) == pytest.approx(5.0, abs=1e-12)
    assert renyi_entropy(np.eye(1)) == 0.0
    with pytest.raises(ParameterError):
        renyi_entropy(np.zeros(4))


noise_seeds = st.integers(0, 2**32 - 1)


@given(noise_seeds, st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3))
def test_candidate_linearity(seed, a):
    r = np.random.default_rng(seed)
    x = r.standard_normal(80) + 1j * r.standard_normal(80)
    p = ChirpletParams.hann(16, n_chirplets=5, hop=4)
    _, c1 = glct_candidates(sig(x), p)
    _, c2 = glct_candidates(sig(a * x), p)
    np.testing.assert_allclose(c2, a * c1, rtol=1e-12, atol=1e-12 * abs(a) * np.abs(c1).max())


@given(noise_seeds, st.sampled_from([1, 3, 5, 9]))
def test_glct_dominates_stft_and_uses_grid(seed, n_ch):
    r = np.random.default_rng(seed)
    x = r.standard_normal(128) + 1j * r.standard_normal(128)
    p = ChirpletParams.hann(32, n_chirplets=n_ch, hop=8)
    g, s = glct(sig(x), p), stft(sig(x), p)
    assert np.all(g.magnitude >= s.magnitude * (1 - 1e-12))
    assert np.all(np.isin(g.selected_alpha, alpha_grid(n_ch)))
    g2 = glct(sig(2 * x), p)
    np.testing.assert_allclose(g2.magnitude, 2 * g.magnitude, rtol=1e-12)
    np.testing.assert_array_equal(g2.selected_alpha, g.selected_alpha)
    assert np.all(np.diff(g.frame_times_s) > 0)
