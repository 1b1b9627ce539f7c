"""Pipeline configuration: one JSON document, every field defaulted."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, is_dataclass
from pathlib import Path

from .errors import ParameterError
from .nn.model import canonical_kind
from .signal import DEFAULT_SAMPLE_RATE_HZ, N_DEVICES, DeviceProfile, default_fleet


@dataclass
class FleetConfig:
    profiles: list = field(default_factory=lambda: [asdict(p) for p in default_fleet()])
    bursts_per_device: int = 120
    duration_s: float = 200e-6
    sample_rate_hz: float = DEFAULT_SAMPLE_RATE_HZ
    start_jitter_samples: int = 16

    def device_profiles(self):
        return [DeviceProfile(**p).validate() for p in self.profiles]


@dataclass
class TransientConfig:
    var_window: int = 32
    threshold_ratio: float = 0.2
    segment_len: int = 1024
    max_lag: int = 64


@dataclass
class GLCTConfig:
    n_chirplets: int = 9
    window_size: int = 64
    hop: int | None = None
    fft_bins: int | None = None


@dataclass
class WindowOptConfig:
    enabled: bool = True
    candidates: list = field(default_factory=lambda: [16, 32, 64, 128, 256])
    smooth_k: int = 9
    stride: int | None = None


@dataclass
class FeatureConfig:
    rows: int = 30
    cols: int = 30


@dataclass
class EvalConfig:
    models: list = field(default_factory=lambda: ["CNN", "BiLSTM", "BiGRU", "CNN-BiGRU"])
    snr_levels: list = field(default_factory=lambda: [10, 20, 30])
    folds: int = 10
    max_epochs: int | None = None
    batch_size: int | None = None

    def model_overrides(self):
        out = {}
        if self.max_epochs is not None:
            out["max_epochs"] = self.max_epochs
        if self.batch_size is not None:
            out["batch_size"] = self.batch_size
        return out


@dataclass
class PipelineConfig:
    fleet: FleetConfig = field(default_factory=FleetConfig)
    transient: TransientConfig = field(default_factory=TransientConfig)
    glct: GLCTConfig = field(default_factory=GLCTConfig)
    window_opt: WindowOptConfig = field(default_factory=WindowOptConfig)
    features: FeatureConfig = field(default_factory=FeatureConfig)
    evaluation: EvalConfig = field(default_factory=EvalConfig)
    dataset_path: str | None = None
    seed: int = 42
    output_dir: str = "runs/default"

    def validate(self):
        f, t, g, w = self.fleet, self.transient, self.glct, self.window_opt
        profiles = f.device_profiles()
        ids = [p.device_id for p in profiles]
        if len(set(ids)) != len(ids):
            raise ParameterError("device ids in the fleet must be unique")
        if not 1 <= len(profiles) <= N_DEVICES:
            raise ParameterError(f"fleet must hold 1..{N_DEVICES} devices")
        if f.bursts_per_device < 1:
            raise ParameterError("bursts_per_device must be >= 1")
        n = int(round(f.duration_s * f.sample_rate_hz))
        if n < 64:
            raise ParameterError("bursts must have >= 64 samples")
        if not 1 <= t.segment_len <= n:
            raise ParameterError(f"segment_len {t.segment_len} must fit in a {n}-sample burst")
        if not 0 < t.threshold_ratio < 1:
            raise ParameterError("threshold_ratio must lie in (0, 1)")
        if not 1 <= t.var_window <= n:
            raise ParameterError("var_window out of range")
        if not 0 <= t.max_lag < t.segment_len:
            raise ParameterError("max_lag must be below segment_len")
        if g.n_chirplets < 1 or g.n_chirplets % 2 == 0:
            raise ParameterError("n_chirplets must be odd")
        sizes = w.candidates if w.enabled else [g.window_size]
        if not sizes:
            raise ParameterError("no GLCT window sizes")
        limit = t.segment_len - (w.smooth_k - 1 if w.enabled else 0)
        for size in sizes:
            if not 2 <= size <= limit:
                raise ParameterError(f"window size {size} outside [2, {limit}]")
        if self.features.rows < 1 or self.features.cols < 1:
            raise ParameterError("feature grid must be at least 1x1")
        ev = self.evaluation
        ev.models = [canonical_kind(m) for m in ev.models]
        if ev.folds < 2:
            raise ParameterError("folds must be >= 2")
        for s in ev.snr_levels:
            if s != "clean" and not isinstance(s, (int, float)):
                raise ParameterError(f"bad SNR level {s!r}")
        return self

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _build(cls, data, path="config"):
    if not isinstance(data, dict):
        raise ParameterError(f"{path} must be a JSON object")
    known = {f.name: f for f in fields(cls)}
    unknown = set(data) - set(known)
    if unknown:
        raise ParameterError(f"unknown keys in {path}: {sorted(unknown)}")
    kwargs = {}
    defaults = cls()
    for name, value in data.items():
        current = getattr(defaults, name)
        if is_dataclass(current):
            kwargs[name] = _build(type(current), value, f"{path}.{name}")
        else:
            kwargs[name] = value
    return cls(**kwargs)


def from_dict(data):
    return _build(PipelineConfig, data).validate()


def load_config(path=None):
    if path is None:
        return PipelineConfig().validate()
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParameterError(f"{path}: invalid JSON ({exc})") from None
    return from_dict(data)
