"""End-to-end stages: synthesize, corrupt, detect, align, choose window, extract features."""

from __future__ import annotations

import logging
from dataclasses import dataclass


from .errors import RFFPError, StageError
from .features import LabeledDataset, build_dataset
from .glct import ChirpletParams
from .rng import derive_seed
from .signal import add_awgn_burst, is_clean, rms_normalize, synthesize_emission
from .transient import align_by_xcorr, detect_transient
from .window_opt import sweep_windows

log = logging.getLogger(__name__)


def snr_key(snr_db):
    return 0 if is_clean(snr_db) else int(round(float(snr_db) * 1000)) + 1


def generate_bursts(cfg):
    """Clean, unit-RMS bursts for every device, device-major order."""
    f = cfg.fleet
    bursts = []
    for profile in f.device_profiles():
        for b in range(f.bursts_per_device):
            burst = synthesize_emission(profile, f.duration_s, cfg.seed, burst_index=b,
                                        sample_rate_hz=f.sample_rate_hz,
                                        start_jitter_samples=f.start_jitter_samples)
            bursts.append(rms_normalize(burst))
    return bursts


def _stage(name, burst, fn, *args):
    try:
        return fn(*args)
    except RFFPError as exc:
        raise StageError(name, f"device{burst.device_id}/burst{burst.burst_index}", exc) from exc


def transients(bursts, cfg, snr_db="clean"):
    """Noise (if any) -> RMS normalization -> detection -> alignment onto the first burst."""
    t = cfg.transient
    segs = []
    for burst in bursts:
        seed = derive_seed(cfg.seed, 7, burst.device_id, burst.burst_index, snr_key(snr_db))
        noisy = _stage("noise", burst, add_awgn_burst, burst, snr_db, seed)
        noisy = _stage("normalize", burst, rms_normalize, noisy)
        segs.append(_stage("detect", burst, detect_transient, noisy, t.var_window, t.threshold_ratio,
                           t.segment_len))
    flat = sum(s.degenerate for s in segs)
    if flat:
        log.warning("%d bursts showed no transient", flat)
    return align_by_xcorr(segs, 0, t.max_lag)


def chirplet_params(cfg, window_size):
    g = cfg.glct
    return ChirpletParams.hann(window_size, g.n_chirplets, g.hop, g.fft_bins)


@dataclass
class Extraction:
    dataset: LabeledDataset
    window_size: int
    window_scores: list


def extract(bursts, cfg, snr_db="clean"):
    segs = transients(bursts, cfg, snr_db)
    w = cfg.window_opt
    if w.enabled:
        scores = sweep_windows(segs, w.candidates, w.smooth_k, w.stride)
        window = max(scores, key=lambda s: (s.score, -s.window_size)).window_size
    else:
        scores, window = [], cfg.glct.window_size
    log.info("snr %s: GLCT window %d samples", snr_db, window)
    params = chirplet_params(cfg, window)
    ds = build_dataset(segs, params, cfg.fleet.sample_rate_hz, cfg.features.rows, cfg.features.cols)
    return Extraction(ds, window, scores)
