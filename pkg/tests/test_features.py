import numpy as np
import pytest
from hypothesis import given, strategies as st

from rffp.config import PipelineConfig
from rffp.errors import LabelError, ParameterError
from rffp.features import LabeledDataset, build_dataset, minmax, resize_bilinear, tf_to_features
from rffp.glct import ChirpletParams, TimeFrequencyGrid
from rffp.pipeline import generate_bursts, transients
from rffp.transient import TransientSegment


def grid_of(mag):
    mag = np.asarray(mag, dtype=float)
    f, k = mag.shape
    return TimeFrequencyGrid(mag.astype(complex), np.arange(f) + 1.0, np.arange(k) * 1.0, np.zeros((f, k)))


def bilinear_oracle(m, rows, cols):
    """Corner-aligned bilinear interpolation evaluated one output cell at a time."""
    r_in, c_in = m.shape
    out = np.zeros((rows, cols))
    for i in range(rows):
        y = i * (r_in - 1) / (rows - 1) if rows > 1 else 0.0
        y0 = min(int(y), r_in - 1)
        y1 = min(y0 + 1, r_in - 1)
        for j in range(cols):
            x = j * (c_in - 1) / (cols - 1) if cols > 1 else 0.0
            x0 = min(int(x), c_in - 1)
            x1 = min(x0 + 1, c_in - 1)
            dy, dx = y - y0, x - x0
            out[i, j] = (m[y0, x0] * (1 - dy) * (1 - dx) + m[y0, x1] * (1 - dy) * dx
                         + m[y1, x0] * dy * (1 - dx) + m[y1, x1] * dy * dx)
    return out


def test_identity_resize(rng):
    m = rng.uniform(0, 5, (30, 30))
    fv = tf_to_features(grid_of(m))
    flat = m.ravel()
    np.testing.assert_allclose(fv.values, (flat - flat.min()) / (flat.max() - flat.min()), rtol=1e-14)


def test_constant_grid_maps_to_zeros():
    assert not np.any(tf_to_features(grid_of(np.full((17, 40), 3.0))).values)


def test_hot_cell_lands_at_expected_index():
    m = np.zeros((60, 60))
    m[10, 20] = 1.0
    v = tf_to_features(grid_of(m)).values
    assert int(np.argmax(v)) == 160
    np.testing.assert_allclose(v, minmax(bilinear_oracle(m, 30, 30).ravel()), atol=1e-12)


@pytest.mark.parametrize("shape", [(7, 13), (33, 64), (120, 16), (1, 5)])
def test_resize_matches_oracle(rng, shape):
    m = rng.standard_normal(shape)
    np.testing.assert_allclose(resize_bilinear(m, 30, 30), bilinear_oracle(m, 30, 30), atol=1e-12)


def test_bad_factorization():
    with pytest.raises(ParameterError):
        tf_to_features(grid_of(np.ones((30, 30))), rows=30, cols=31)
    assert tf_to_features(grid_of(np.ones((30, 30)) + np.eye(30)), rows=36, cols=25).values.size == 900


@given(st.integers(0, 2**32 - 1), st.integers(1, 70), st.integers(1, 70), st.floats(1e-3, 1e3))
def test_feature_range_and_scale_invariance(seed, f, k, a):
    m = np.random.default_rng(seed).exponential(1.0, (f, k))
    v = tf_to_features(grid_of(m)).values
    assert v.size == 900 and v.min() >= 0 and v.max() <= 1
    np.testing.assert_allclose(tf_to_features(grid_of(a * m)).values, v, atol=1e-12)


def seg(x, device, idx=0):
    return TransientSegment(np.asarray(x, dtype=complex), 0, device, idx)


def test_build_dataset_small(rng):
    p = ChirpletParams.hann(32)
    segs = [seg(rng.standard_normal(256), d % 9, d) for d in range(12)]
    ds = build_dataset(segs, p)
    assert ds.features.shape == (12, 900)
    np.testing.assert_array_equal(ds.labels, [d % 9 for d in range(12)])
    again = build_dataset(segs, p)
    np.testing.assert_array_equal(again.features, ds.features)
    rev = build_dataset(segs[::-1], p)
    np.testing.assert_array_equal(rev.features, ds.features[::-1])
    one = build_dataset(segs[4:5], p)
    assert one.features.shape == (1, 900) and one.labels.tolist() == [4]


def test_build_dataset_errors(rng):
    p = ChirpletParams.hann(32)
    with pytest.raises(ParameterError):
        build_dataset([], p)
    with pytest.raises(LabelError):
        build_dataset([seg(rng.standard_normal(128), 9)], p)


def test_full_synthetic_dataset_shape():
    cfg = PipelineConfig()
    segs = transients(generate_bursts(cfg), cfg)
    ds = build_dataset(segs, ChirpletParams.hann(64))
    assert ds.features.shape == (1080, 900)
    assert ds.histogram().tolist() == [120] * 9
    assert ds.features.min() >= 0 and ds.features.max() <= 1


def test_labeled_dataset_validation():
    with pytest.raises(ParameterError):
        LabeledDataset(np.zeros((3, 900)), np.zeros(2, int))
    with pytest.raises(LabelError):
        LabeledDataset(np.zeros((1, 900)), np.array([9]))
    with pytest.raises(ParameterError):
        LabeledDataset(np.full((1, 900), np.nan), np.array([0]))
