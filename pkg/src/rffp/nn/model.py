"""Layer specs, model configs for the four architectures, and the sequential model."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, replace

import numpy as np

from ..errors import ParameterError, ShapeError
from ..rng import substream
from .layers import Conv1D, Dense, Dropout, Flatten, MaxPool1D, ReLU
from .losses import softmax_ce
from .recurrent import GRU, LSTM, Bidirectional

N_CLASSES = 9
ARCHITECTURES = ("CNN", "BiLSTM", "BiGRU", "CNN-BiGRU")
_ALIASES = {"cnn": "CNN", "bilstm": "BiLSTM", "lstm": "BiLSTM", "bigru": "BiGRU", "gru": "BiGRU",
            "cnn-bigru": "CNN-BiGRU", "cnn_bigru": "CNN-BiGRU", "cnnbigru": "CNN-BiGRU"}

# trainable-parameter counts and depths published for the four models
PUBLISHED_COMPLEXITY = {
    "CNN": {"depth": 11, "params": 15689},
    "BiLSTM": {"depth": 8, "params": 199449},
    "BiGRU": {"depth": 8, "params": 207129},
    "CNN-BiGRU": {"depth": 14, "params": 83529},
}


def canonical_kind(kind):
    key = str(kind).strip()
    if key in ARCHITECTURES:
        return key
    try:
        return _ALIASES[key.lower()]
    except KeyError:
        raise ParameterError(f"unknown architecture {kind!r}; expected one of {ARCHITECTURES}") from None


@dataclass(frozen=True)
class LayerSpec:
    kind: str
    units: int = 0
    kernel_size: int = 0
    pool: int = 0
    rate: float = 0.0
    recurrent_dropout: float = 0.0
    return_sequences: bool = False

    def to_dict(self):
        return {k: v for k, v in asdict(self).items() if k == "kind" or v != LayerSpec.__dataclass_fields__[k].default}


def conv(out, k):
    return LayerSpec("conv1d", units=out, kernel_size=k)


def dense(n):
    return LayerSpec("dense", units=n)


def drop(rate):
    return LayerSpec("dropout", rate=rate)


def bigru(units, seq, rec=0.0):
    return LayerSpec("bigru", units=units, return_sequences=seq, recurrent_dropout=rec)


def bilstm(units, seq, rec=0.0):
    return LayerSpec("bilstm", units=units, return_sequences=seq, recurrent_dropout=rec)


RELU = LayerSpec("relu")
POOL2 = LayerSpec("maxpool", pool=2)
FLATTEN = LayerSpec("flatten")


@dataclass(frozen=True)
class ModelConfig:
    architecture: str
    layers: tuple
    input_shape: tuple = (900, 1)
    optimizer: str = "adam"
    learning_rate: float = 1e-3
    max_epochs: int = 30
    early_stop_min_delta: float = 1e-4
    early_stop_patience: int = 5
    batch_size: int = 32
    seed: int = 42
    n_classes: int = N_CLASSES

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        object.__setattr__(self, "input_shape", tuple(int(v) for v in self.input_shape))
        if not self.learning_rate > 0:
            raise ParameterError("learning_rate must be > 0")
        if self.optimizer.lower() not in ("adam", "rmsprop"):
            raise ParameterError(f"unknown optimizer {self.optimizer!r}")
        if self.max_epochs < 0 or self.batch_size < 1 or self.early_stop_patience < 1:
            raise ParameterError("max_epochs >= 0, batch_size >= 1 and patience >= 1 required")
        for spec in self.layers:
            for r in (spec.rate, spec.recurrent_dropout):
                if not 0 <= r < 1:
                    raise ParameterError(f"dropout rate {r} outside [0, 1)")
        build_layers(self)

    @property
    def depth(self):
        return len(self.layers)

    def to_dict(self):
        d = asdict(self)
        d["layers"] = [s.to_dict() for s in self.layers]
        d["input_shape"] = list(self.input_shape)
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["layers"] = tuple(LayerSpec(**s) for s in d["layers"])
        return cls(**d)

    def fingerprint(self):
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    @property
    def param_count(self):
        return build_layers(self)[1]


def architecture_config(kind, seed=42, **overrides):
    """Canonical configuration of one of the four classifiers."""
    kind = canonical_kind(kind)
    if kind == "CNN":
        cfg = ModelConfig(
            kind,
            (conv(8, 7), RELU, POOL2, conv(16, 5), RELU, POOL2, FLATTEN, drop(0.3), dense(32), RELU,
             dense(N_CLASSES)),
            input_shape=(900, 1), optimizer="adam", learning_rate=3e-3, early_stop_min_delta=1e-4, seed=seed)
    elif kind in ("BiLSTM", "BiGRU"):
        rec = bilstm if kind == "BiLSTM" else bigru
        cfg = ModelConfig(
            kind,
            (rec(64, True), drop(0.3), rec(32, False), drop(0.3), dense(32), RELU, dense(N_CLASSES)),
            input_shape=(30, 30), optimizer="rmsprop", learning_rate=1e-3, early_stop_min_delta=1e-2,
            seed=seed)
    else:
        cfg = ModelConfig(
            kind,
            (conv(16, 5), RELU, POOL2, bigru(32, True, 0.2), drop(0.3), bigru(16, False, 0.2), drop(0.3),
             dense(32), RELU, dense(N_CLASSES)),
            input_shape=(30, 30), optimizer="adam", learning_rate=1e-3, early_stop_min_delta=1e-4, seed=seed)
    return replace(cfg, **overrides) if overrides else cfg


def _make_layer(spec, shape):
    k = spec.kind
    if k == "conv1d":
        return Conv1D(shape[-1], spec.units, spec.kernel_size)
    if k == "dense":
        if len(shape) != 1:
            raise ShapeError(f"dense layer needs a flat input, got {shape}")
        return Dense(shape[0], spec.units)
    if k == "relu":
        return ReLU()
    if k == "maxpool":
        return MaxPool1D(spec.pool)
    if k == "flatten":
        return Flatten()
    if k == "dropout":
        return Dropout(spec.rate)
    if k in ("bigru", "bilstm", "gru", "lstm"):
        if len(shape) != 2:
            raise ShapeError(f"recurrent layer needs a (steps, features) input, got {shape}")
        cell = GRU if k.endswith("gru") else LSTM
        make = lambda: cell(shape[-1], spec.units, spec.return_sequences, spec.recurrent_dropout)
        return Bidirectional(make(), make()) if k.startswith("bi") else make()
    raise ParameterError(f"unknown layer kind {k!r}")


def build_layers(config):
    shape = config.input_shape
    layers = []
    for spec in config.layers:
        layer = _make_layer(spec, shape)
        shape = layer.output_shape(shape)
        layers.append(layer)
    if shape != (config.n_classes,):
        raise ShapeError(f"model output width must be {config.n_classes}, got shape {shape}")
    return layers, sum(l.n_params for l in layers)


class Model:
    """Sequential network whose parameters live in one flat float64 vector."""

    def __init__(self, config, params=None):
        self.config = config
        self.layers, n = build_layers(config)
        self.params = np.zeros(n)
        self.grads = np.zeros(n)
        off = 0
        for layer in self.layers:
            off = layer.bind(self.params, self.grads, off)
        if params is None:
            rng = substream(config.seed, 0)
            for layer in self.layers:
                layer.init_params(rng)
        else:
            self.set_params(params)

    @property
    def n_params(self):
        return self.params.size

    def set_params(self, flat):
        flat = np.asarray(flat, dtype=float)
        if flat.shape != self.params.shape:
            raise ShapeError(f"expected {self.params.size} parameters, got {flat.size}")
        self.params[...] = flat

    def forward(self, x, train=False, rng=None):
        x = np.asarray(x, dtype=float).reshape((-1,) + self.config.input_shape)
        for layer in self.layers:
            x = layer.forward(x, train, rng)
        return x

    def backward(self, dlogits):
        d = dlogits
        for layer in reversed(self.layers):
            d = layer.backward(d)
        return d

    def loss_and_grad(self, x, y, train=False, rng=None):
        """Loss on a batch; the gradient is left in ``self.grads``."""
        self.grads[...] = 0.0
        loss, d = softmax_ce(self.forward(x, train, rng), y)
        self.backward(d)
        return loss

    def predict_logits(self, x, batch_size=256):
        x = np.asarray(x, dtype=float)
        out = [self.forward(x[i:i + batch_size]) for i in range(0, len(x), batch_size)]
        return np.concatenate(out) if out else np.zeros((0, self.config.n_classes))

    def predict(self, x, batch_size=256):
        return self.predict_logits(x, batch_size).argmax(axis=1)
