"""GLCT window-size selection from the time-domain spread of transient shapes."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ParameterError

DEFAULT_CANDIDATES = (16, 32, 64, 128, 256)
DEFAULT_SMOOTH_K = 9


@dataclass(frozen=True)
class WindowScore:
    window_size: int
    score: float

    def __post_init__(self):
        if self.window_size < 2:
            raise ParameterError("window_size must be >= 2")


def moving_average(x, k):
    """Equal-weight running mean; output has ``len(x) - k + 1`` points."""
    x = np.asarray(x, dtype=float)
    if not 1 <= k <= x.size:
        raise ParameterError(f"moving-average length {k} outside [1, {x.size}]")
    return sliding_window_view(x, k).mean(axis=1)


def windowed_std(x, w, stride=1):
    """Population standard deviation of each length-``w`` window, stepping by ``stride``."""
    x = np.asarray(x, dtype=float)
    if not 2 <= w <= x.size:
        raise ParameterError(f"window {w} outside [2, {x.size}]")
    if stride < 1:
        raise ParameterError("stride must be >= 1")
    return sliding_window_view(x, w)[::stride].std(axis=1)


def default_stride(w):
    return max(1, math.ceil(w / 4))


def score_window(amplitudes, w, smooth_k=DEFAULT_SMOOTH_K, stride=None):
    """Mean over transients of the largest windowed SD at size ``w``."""
    stride = stride or default_stride(w)
    peaks = [windowed_std(moving_average(a, smooth_k), w, stride).max() for a in amplitudes]
    return float(math.fsum(peaks) / len(peaks))


def sweep_windows(transients, candidate_ws=DEFAULT_CANDIDATES, smooth_k=DEFAULT_SMOOTH_K, stride=None):
    """Score every candidate; returns ``[WindowScore]`` in candidate order."""
    if not transients:
        raise ParameterError("no transients to score")
    if len(candidate_ws) == 0:
        raise ParameterError("no candidate window sizes")
    amps = [np.abs(t.samples) if hasattr(t, "samples") else np.abs(np.asarray(t)) for t in transients]
    shortest = min(a.size for a in amps) - smooth_k + 1
    for w in candidate_ws:
        if w > shortest:
            raise ParameterError(f"window {w} longer than the smoothed transient ({shortest} samples)")
    return [WindowScore(int(w), score_window(amps, w, smooth_k, stride)) for w in candidate_ws]


def optimize_window(transients, candidate_ws=DEFAULT_CANDIDATES, smooth_k=DEFAULT_SMOOTH_K, stride=None):
    """Pick the candidate window size with the largest score; ties go to the smaller size."""
    scores = sweep_windows(transients, candidate_ws, smooth_k, stride)
    return max(scores, key=lambda s: (s.score, -s.window_size))
