"""Turn-on transient detection (moving variance) and cross-correlation alignment."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import DegenerateSignalError, ParameterError

DEFAULT_VAR_WINDOW = 32
DEFAULT_THRESHOLD_RATIO = 0.2
DEFAULT_SEGMENT_LEN = 1024
DEFAULT_MAX_LAG = 64

# max moving variance below this fraction of the mean power counts as "no transient"
_FLAT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class TransientSegment:
    samples: np.ndarray
    start_index: int
    device_id: int
    source_burst: int
    padding: int = 0
    degenerate: bool = False
    lag: int = 0

    def __post_init__(self):
        s = np.array(self.samples, dtype=np.complex128)
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)
        if self.start_index < 0:
            raise ParameterError("start_index must be >= 0")

    def __len__(self):
        return self.samples.size


def moving_variance(x, window_len):
    """Population variance of every length-``window_len`` window of ``x``."""
    x = np.asarray(x, dtype=float)
    if not 1 <= window_len <= x.size:
        raise ParameterError(f"window_len={window_len} outside [1, {x.size}]")
    return sliding_window_view(x, window_len).var(axis=1)


def detect_transient(burst, var_window=DEFAULT_VAR_WINDOW, threshold_ratio=DEFAULT_THRESHOLD_RATIO,
                     segment_len=DEFAULT_SEGMENT_LEN):
    """Cut ``segment_len`` samples starting where the |IQ| moving variance first
    reaches ``threshold_ratio`` of its maximum.

    A burst with a flat envelope gets ``degenerate=True`` and ``start_index=0``.
    """
    x = burst.signal.samples
    if not 0 < threshold_ratio < 1:
        raise ParameterError("threshold_ratio must lie in (0, 1)")
    if not 1 <= segment_len <= x.size:
        raise ParameterError(f"segment_len={segment_len} outside [1, {x.size}]")
    amp = np.abs(x)
    power = float(np.mean(amp ** 2))
    if power == 0.0:
        raise DegenerateSignalError(f"burst {burst.burst_index} of device {burst.device_id} is all zeros")

    mv = moving_variance(amp, min(var_window, amp.size))
    peak = float(mv.max())
    degenerate = peak <= _FLAT_TOL * power
    start = 0 if degenerate else int(np.argmax(mv >= threshold_ratio * peak))

    seg = x[start:start + segment_len]
    pad = segment_len - seg.size
    if pad:
        seg = np.concatenate([seg, np.zeros(pad, dtype=seg.dtype)])
    return TransientSegment(seg, start, burst.device_id, burst.burst_index, pad, degenerate)


def xcorr_lags(reference, x, max_lag):
    """|circular cross-correlation| of ``reference`` with ``x`` shifted by each lag.

    Entry ``j`` belongs to lag ``j - max_lag``; lag ``L`` scores
    ``|sum(reference * conj(roll(x, L)))|``.
    """
    c = np.fft.ifft(np.fft.fft(reference) * np.conj(np.fft.fft(x)))
    lags = np.arange(-max_lag, max_lag + 1)
    return np.abs(c[lags % x.size])


def best_lag(reference, x, max_lag, rtol=1e-9):
    scores = xcorr_lags(reference, x, max_lag)
    top = scores.max()
    lags = np.arange(-max_lag, max_lag + 1)
    # preference order: smallest |lag|, then negative before positive
    for lag in sorted(lags.tolist(), key=lambda l: (abs(l), l > 0)):
        if scores[lag + max_lag] >= top - rtol * top:
            return lag
    return 0


def align_by_xcorr(segments, reference_index=0, max_lag=DEFAULT_MAX_LAG):
    """Circularly shift every segment onto ``segments[reference_index]``."""
    if not segments:
        raise ParameterError("no segments to align")
    n = len(segments[0])
    if any(len(s) != n for s in segments):
        raise ParameterError("all segments must have equal length")
    if not 0 <= reference_index < len(segments):
        raise ParameterError("reference_index out of range")
    if not 0 <= max_lag < n:
        raise ParameterError(f"max_lag must lie in [0, {n})")

    ref = segments[reference_index].samples
    out = []
    for i, seg in enumerate(segments):
        if i == reference_index:
            out.append(seg)
            continue
        lag = best_lag(ref, seg.samples, max_lag)
        out.append(replace(seg, samples=np.roll(seg.samples, lag), lag=lag))
    return out
