"""GLCT grid to 900-feature vectors, and labeled dataset assembly."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LabelError, ParameterError
from .glct import glct
from .signal import IQSequence, N_DEVICES

N_FEATURES = 900


@dataclass(frozen=True, eq=False)
class FeatureVector:
    values: np.ndarray
    label: int | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or not np.all(np.isfinite(v)):
            raise ParameterError("feature vector must be 1-D and finite")
        if self.label is not None and not 0 <= self.label < N_DEVICES:
            raise LabelError(f"label {self.label} outside [0, {N_DEVICES - 1}]")
        object.__setattr__(self, "values", v)


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    features: np.ndarray
    labels: np.ndarray
    class_names: tuple = tuple(f"device_{i}" for i in range(N_DEVICES))

    def __post_init__(self):
        x = np.asarray(self.features, dtype=float)
        y = np.asarray(self.labels, dtype=np.int64)
        if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.size:
            raise ParameterError(f"features {x.shape} and labels {y.shape} disagree")
        if y.size and (y.min() < 0 or y.max() >= len(self.class_names)):
            raise LabelError(f"labels must lie in [0, {len(self.class_names) - 1}]")
        if not np.all(np.isfinite(x)):
            raise ParameterError("features must be finite")
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "class_names", tuple(self.class_names))

    def __len__(self):
        return self.labels.size

    def subset(self, idx):
        return LabeledDataset(self.features[idx], self.labels[idx], self.class_names)

    def histogram(self):
        return np.bincount(self.labels, minlength=len(self.class_names))


def resize_bilinear(m, rows, cols):
    """Bilinear resample with corner alignment (endpoints map onto endpoints)."""
    m = np.asarray(m, dtype=float)
    if m.shape == (rows, cols):
        return m.copy()

    def axis(n_in, n_out):
        if n_out == 1 or n_in == 1:
            pos = np.zeros(n_out)
        else:
            pos = np.arange(n_out) * (n_in - 1) / (n_out - 1)
        lo = np.minimum(np.floor(pos).astype(int), n_in - 1)
        hi = np.minimum(lo + 1, n_in - 1)
        return lo, hi, pos - lo

    r0, r1, fr = axis(m.shape[0], rows)
    c0, c1, fc = axis(m.shape[1], cols)
    top = m[r0][:, c0] * (1 - fc) + m[r0][:, c1] * fc
    bot = m[r1][:, c0] * (1 - fc) + m[r1][:, c1] * fc
    return top * (1 - fr)[:, None] + bot * fr[:, None]


def minmax(v):
    lo, hi = v.min(), v.max()
    if hi - lo <= 0:
        return np.zeros_like(v)
    return (v - lo) / (hi - lo)


def tf_to_features(grid, rows=30, cols=30, n_features=N_FEATURES):
    """Resample |grid| to rows x cols, flatten row-major, min-max scale to [0, 1]."""
    if rows * cols != n_features:
        raise ParameterError(f"{rows}x{cols} does not give {n_features} features")
    mag = grid.magnitude if hasattr(grid, "magnitude") else np.abs(np.asarray(grid))
    if mag.size == 0:
        raise ParameterError("empty time-frequency grid")
    return FeatureVector(minmax(resize_bilinear(mag, rows, cols).ravel()))


def segment_features(segment, params, sample_rate_hz, rows=30, cols=30):
    grid = glct(IQSequence(segment.samples, sample_rate_hz), params)
    return tf_to_features(grid, rows, cols, rows * cols).values


def build_dataset(segments, params, sample_rate_hz=10e6, rows=30, cols=30):
    """One feature row per segment, in input order, labeled by device id."""
    if not segments:
        raise ParameterError("no segments to extract")
    labels = []
    for s in segments:
        if not 0 <= s.device_id < N_DEVICES:
            raise LabelError(f"segment from burst {s.source_burst} has device_id {s.device_id}")
        labels.append(s.device_id)
    x = np.stack([segment_features(s, params, sample_rate_hz, rows, cols) for s in segments])
    return LabeledDataset(x, np.array(labels))
