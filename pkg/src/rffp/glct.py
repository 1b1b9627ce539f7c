"""STFT and the General Linear Chirplet Transform.

Each GLCT candidate is an STFT whose frame-local samples are first multiplied
by a quadratic-phase demodulator ``exp(-i * tan(alpha) * fs / (2 Ts) * tau**2)``
with ``tau`` in seconds from the frame centre. The transform keeps, per
time-frequency cell, the candidate of largest magnitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ParameterError


def hann(w):
    """Periodic Hann window (non-zero for every w >= 2)."""
    n = np.arange(w)
    return 0.5 - 0.5 * np.cos(2 * np.pi * n / w)


@dataclass(frozen=True, eq=False)
class ChirpletParams:
    n_chirplets: int
    window: np.ndarray
    hop: int
    fft_bins: int

    def __post_init__(self):
        win = np.array(self.window, dtype=float)
        win.setflags(write=False)
        object.__setattr__(self, "window", win)
        if self.n_chirplets < 1 or self.n_chirplets % 2 == 0:
            raise ParameterError(f"n_chirplets must be odd and >= 1, got {self.n_chirplets}")
        if win.ndim != 1 or win.size < 1:
            raise ParameterError("window must be a non-empty 1-D array")
        if not np.all(np.isfinite(win)) or not np.any(win):
            raise ParameterError("window taps must be finite and not all zero")
        if self.hop < 1:
            raise ParameterError("hop must be >= 1")
        if self.fft_bins < win.size:
            raise ParameterError("fft_bins must be >= window length")

    @classmethod
    def hann(cls, w, n_chirplets=9, hop=None, fft_bins=None):
        return cls(n_chirplets, hann(w), hop or max(1, w // 4), fft_bins or w)

    @property
    def w(self):
        return self.window.size

    def to_dict(self):
        return {"n_chirplets": self.n_chirplets, "window_len": self.w,
                "hop": self.hop, "fft_bins": self.fft_bins}


@dataclass(frozen=True, eq=False)
class TimeFrequencyGrid:
    values: np.ndarray          # frames x bins, complex
    frame_times_s: np.ndarray
    bin_freqs_hz: np.ndarray
    selected_alpha: np.ndarray  # frames x bins, radians

    def __post_init__(self):
        f, k = self.values.shape
        if self.frame_times_s.shape != (f,) or self.bin_freqs_hz.shape != (k,):
            raise ParameterError("grid axes do not match the value matrix")
        if self.selected_alpha.shape != (f, k):
            raise ParameterError("selected_alpha must match the value matrix")
        if f > 1 and np.any(np.diff(self.frame_times_s) <= 0):
            raise ParameterError("frame times must be strictly increasing")

    @property
    def magnitude(self):
        return np.abs(self.values)


def alpha_grid(n_chirplets):
    """``-pi/2 + k*pi/(N+1)`` for ``k = 1..N``."""
    if n_chirplets < 1:
        raise ParameterError(f"need at least one chirplet, got {n_chirplets}")
    # built from the centre outwards so the grid is exactly symmetric and,
    # for odd N, contains an exact zero
    j = np.arange(1, n_chirplets + 1) - (n_chirplets + 1) / 2
    return j * np.pi / (n_chirplets + 1)


def alpha_from_chirp_rate(c, sample_rate_hz):
    """Rotation angle for chirp rate ``c`` (rad/s^2): ``arctan(2 Ts c / fs)``."""
    if not sample_rate_hz > 0:
        raise ParameterError("sample_rate_hz must be > 0")
    ts = 1.0 / sample_rate_hz
    return math.atan(2.0 * ts * c / sample_rate_hz)


def chirp_rate_from_alpha(alpha, sample_rate_hz):
    ts = 1.0 / sample_rate_hz
    return math.tan(alpha) * sample_rate_hz / (2.0 * ts)


@lru_cache(maxsize=64)
def _demodulators(w, n_chirplets, sample_rate_hz):
    ts = 1.0 / sample_rate_hz
    tau = (np.arange(w) - w / 2) * ts
    alphas = alpha_grid(n_chirplets)
    rate = np.tan(alphas) * sample_rate_hz / (2.0 * ts)
    d = np.exp(-1j * rate[:, None] * tau[None, :] ** 2)
    d[alphas == 0.0] = 1.0
    d.setflags(write=False)
    return alphas, d


def _frames(signal, params):
    x = signal.samples
    w = params.w
    if x.size < w:
        raise ParameterError(f"signal of {x.size} samples is shorter than the {w}-tap window")
    frames = sliding_window_view(x, w)[::params.hop]
    return frames * params.window


def _axes(signal, params, n_frames):
    fs = signal.sample_rate_hz
    times = (np.arange(n_frames) * params.hop + params.w / 2) / fs
    freqs = np.fft.fftfreq(params.fft_bins, d=1.0 / fs)
    return times, freqs


def stft(signal, params):
    """Frame ``f``, bin ``k``: ``sum_u win[u] s[f*hop + u] exp(-2j pi k u / fft_bins)``."""
    fr = _frames(signal, params)
    values = np.fft.fft(fr, n=params.fft_bins, axis=1)
    times, freqs = _axes(signal, params, fr.shape[0])
    return TimeFrequencyGrid(values, times, freqs, np.zeros(values.shape))


def glct_candidates(signal, params):
    """All demodulated STFTs, shape ``(N, frames, bins)``, with their angles."""
    fr = _frames(signal, params)
    alphas, demod = _demodulators(params.w, params.n_chirplets, signal.sample_rate_hz)
    cand = np.fft.fft(fr[None, :, :] * demod[:, None, :], n=params.fft_bins, axis=2)
    return alphas, cand


def glct(signal, params, rtol=1e-12):
    """Per-cell maximum-magnitude chirplet candidate.

    Magnitude ties (within ``rtol``) go to the angle nearest zero, then to the
    negative angle.
    """
    alphas, cand = glct_candidates(signal, params)
    mags = np.abs(cand)
    order = sorted(range(alphas.size), key=lambda i: (abs(alphas[i]), alphas[i] > 0))
    best = order[0]
    best_mag = mags[best].copy()
    choice = np.full(best_mag.shape, best)
    for i in order[1:]:
        better = mags[i] > best_mag * (1 + rtol)
        choice[better] = i
        best_mag[better] = mags[i][better]
    values = np.take_along_axis(cand, choice[None], axis=0)[0]
    times, freqs = _axes(signal, params, values.shape[0])
    return TimeFrequencyGrid(values, times, freqs, alphas[choice])


def renyi_entropy(tfr, order=3):
    """Rényi entropy (bits) of a non-negative time-frequency distribution."""
    p = np.asarray(tfr, dtype=float)
    total = p.sum()
    if total <= 0:
        raise ParameterError("distribution has no energy")
    p = p / total
    return float(np.log2(np.sum(p ** order)) / (1 - order))
