"""Signal types, synthetic emitter fleet, power normalization and AWGN."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateSignalError, InvalidProfileError, ParameterError
from .rng import substream

DEFAULT_SAMPLE_RATE_HZ = 10e6
N_DEVICES = 9
CLEAN = "clean"


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class IQSequence:
    """Complex baseband samples plus their sample rate."""

    samples: np.ndarray
    sample_rate_hz: float = DEFAULT_SAMPLE_RATE_HZ

    def __post_init__(self):
        s = _frozen(np.ravel(self.samples), np.complex128)
        if s.size < 1:
            raise ParameterError("IQSequence needs at least one sample")
        if not np.all(np.isfinite(s)):
            raise ParameterError("IQSequence samples must be finite")
        if not (self.sample_rate_hz > 0 and math.isfinite(self.sample_rate_hz)):
            raise ParameterError(f"sample_rate_hz must be positive, got {self.sample_rate_hz}")
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "sample_rate_hz", float(self.sample_rate_hz))

    def __len__(self):
        return self.samples.size

    @property
    def power(self):
        return float(np.mean(np.abs(self.samples) ** 2))


@dataclass(frozen=True)
class DeviceProfile:
    """Hardware knobs that shape one emitter's turn-on transient."""

    device_id: int
    rise_time_s: float
    ring_freq_hz: float = 0.0
    chirp_rate_hz_per_s: float = 0.0
    overshoot: float = 0.0
    iq_gain_imbalance: float = 0.0
    iq_phase_imbalance_rad: float = 0.0
    jitter_std: float = 0.0

    def validate(self):
        values = [self.rise_time_s, self.ring_freq_hz, self.chirp_rate_hz_per_s, self.overshoot,
                  self.iq_gain_imbalance, self.iq_phase_imbalance_rad, self.jitter_std]
        if not all(math.isfinite(v) for v in values):
            raise InvalidProfileError(f"device {self.device_id}: non-finite profile field")
        if not 0 <= self.device_id < N_DEVICES:
            raise InvalidProfileError(f"device_id {self.device_id} outside [0, {N_DEVICES - 1}]")
        if self.rise_time_s <= 0:
            raise InvalidProfileError(f"device {self.device_id}: rise_time_s must be > 0")
        if self.overshoot < 0 or self.jitter_std < 0:
            raise InvalidProfileError(f"device {self.device_id}: overshoot and jitter_std must be >= 0")
        return self


@dataclass(frozen=True, eq=False)
class BurstRecord:
    signal: IQSequence
    device_id: int
    burst_index: int = 0
    snr_db: float | str = CLEAN

    def __post_init__(self):
        if not 0 <= self.device_id < N_DEVICES:
            raise ParameterError(f"device_id {self.device_id} outside [0, {N_DEVICES - 1}]")
        if self.burst_index < 0:
            raise ParameterError("burst_index must be >= 0")


def default_fleet():
    """Nine devices of one nominal model with small, overlapping hardware spreads."""
    rise_us = [0.8, 1.1, 1.5, 2.0, 2.6, 1.3, 3.3, 1.8, 4.2]
    ring_mhz = [0.45, 0.80, 0.30, 0.65, 1.10, 1.40, 0.55, 0.95, 0.25]
    overshoot = [0.30, 0.15, 0.45, 0.25, 0.35, 0.10, 0.50, 0.40, 0.20]
    chirp = [2e9, -3e9, 0.0, 5e9, -1e9, 1e9, -4e9, 3e9, -2e9]
    gain = [0.02, -0.03, 0.05, 0.0, -0.04, 0.06, 0.01, -0.02, 0.03]
    phase = [0.03, 0.0, -0.05, 0.06, 0.02, -0.02, 0.04, -0.06, 0.0]
    return [
        DeviceProfile(i, rise_us[i] * 1e-6, ring_mhz[i] * 1e6, chirp[i], overshoot[i],
                      gain[i], phase[i], jitter_std=0.05)
        for i in range(N_DEVICES)
    ]


def envelope(t, rise_time_s, overshoot=0.0, ring_freq_hz=0.0):
    """Turn-on amplitude; zero before t = 0."""
    t = np.asarray(t, dtype=float)
    tp = np.maximum(t, 0.0)
    rise = 1.0 - np.exp(-tp / rise_time_s)
    ring = 1.0 + overshoot * np.exp(-tp / (3.0 * rise_time_s)) * np.cos(2 * np.pi * ring_freq_hz * tp)
    return np.where(t >= 0, rise * ring, 0.0)


def apply_iq_imbalance(x, gain, phase_rad):
    i, q = x.real, x.imag
    c, s = math.cos(phase_rad / 2), math.sin(phase_rad / 2)
    return (1 + gain / 2) * (i * c - q * s) + 1j * (1 - gain / 2) * (q * c - i * s)


def synthesize_emission(profile, duration_s, seed, *, burst_index=0,
                        sample_rate_hz=DEFAULT_SAMPLE_RATE_HZ, turn_on_frac=0.2,
                        start_jitter_samples=16):
    """Simulate one burst of ``profile``.

    The burst is silent until a turn-on instant (``turn_on_frac`` of the
    duration plus a random delay of up to ``start_jitter_samples``), then
    follows the ringing exponential envelope on a chirped carrier with a
    random starting phase. Per-burst relative jitter of ``jitter_std`` is
    applied to rise time, ring frequency, overshoot and chirp rate.
    Randomness comes from the substream ``(seed, device_id, burst_index)``.
    """
    profile.validate()
    if not duration_s > 0:
        raise ParameterError("duration_s must be > 0")
    n = int(round(duration_s * sample_rate_hz))
    if n < 64:
        raise ParameterError(f"burst would have {n} samples, need >= 64")

    rng = substream(seed, profile.device_id, burst_index)
    j = profile.jitter_std * rng.standard_normal(4)
    rise = profile.rise_time_s * max(1.0 + j[0], 0.1)
    ring = profile.ring_freq_hz * (1.0 + j[1])
    over = max(profile.overshoot * (1.0 + j[2]), 0.0)
    chirp = profile.chirp_rate_hz_per_s * (1.0 + j[3])
    delay = int(rng.integers(0, start_jitter_samples + 1)) if start_jitter_samples > 0 else 0
    phase0 = rng.uniform(0.0, 2 * np.pi)

    t = (np.arange(n) - (int(turn_on_frac * n) + delay)) / sample_rate_hz
    amp = envelope(t, rise, over, ring)
    carrier = np.exp(1j * (phase0 + np.pi * chirp * t ** 2))
    x = apply_iq_imbalance(amp * carrier, profile.iq_gain_imbalance, profile.iq_phase_imbalance_rad)
    return BurstRecord(IQSequence(x, sample_rate_hz), profile.device_id, burst_index, CLEAN)


def rms(x):
    return float(np.sqrt(np.mean(np.abs(x) ** 2)))


def rms_normalize(burst):
    """Scale a burst to unit RMS; phases are untouched."""
    x = burst.signal.samples
    level = rms(x)
    if level == 0.0:
        raise DegenerateSignalError(f"burst {burst.burst_index} of device {burst.device_id} is all zeros")
    return replace(burst, signal=IQSequence(x / level, burst.signal.sample_rate_hz))


def is_clean(snr_db):
    return snr_db == CLEAN or snr_db is None or (isinstance(snr_db, float) and math.isinf(snr_db) and snr_db > 0)


def add_awgn(signal, snr_db, seed):
    """Add complex white Gaussian noise at ``snr_db`` relative to the signal's mean power.

    ``snr_db`` may be ``"clean"`` or ``+inf`` for a no-op.
    """
    if is_clean(snr_db):
        return signal
    p = signal.power
    if p == 0.0:
        raise DegenerateSignalError("cannot set an SNR on a zero-power signal")
    noise_power = p / 10.0 ** (float(snr_db) / 10.0)
    rng = substream(seed)
    w = rng.standard_normal((2, len(signal)))
    noise = math.sqrt(noise_power / 2.0) * (w[0] + 1j * w[1])
    return IQSequence(signal.samples + noise, signal.sample_rate_hz)


def add_awgn_burst(burst, snr_db, seed):
    return replace(burst, signal=add_awgn(burst.signal, snr_db, seed),
                   snr_db=CLEAN if is_clean(snr_db) else float(snr_db))
