"""Mini-batch training with early stopping on validation loss."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import LabelError, ParameterError, TrainingDivergedError
from ..rng import substream
from .losses import softmax_ce
from .model import Model
from .optim import make_optimizer

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EpochLog:
    epoch: int
    train_loss: float
    val_loss: float
    val_accuracy: float


@dataclass
class TrainedModel:
    config: object
    parameters: np.ndarray
    param_count: int
    train_log: list = field(default_factory=list)
    best_epoch: int | None = None

    def __post_init__(self):
        if self.param_count != self.parameters.size:
            raise ParameterError("param_count does not match the parameter vector")

    def model(self):
        return Model(self.config, self.parameters)

    def predict(self, x):
        return self.model().predict(x)


def _xy(ds):
    return (ds.features, ds.labels) if hasattr(ds, "features") else (np.asarray(ds[0]), np.asarray(ds[1]))


def evaluate(model, x, y):
    logits = model.predict_logits(x)
    loss, _ = softmax_ce(logits, y)
    return loss, float(np.mean(logits.argmax(axis=1) == y))


def train(config, train_set, val_set, on_epoch=None):
    """Fit a fresh model; returns the parameters of the lowest-validation-loss epoch.

    Training stops early once validation loss has failed to beat the last
    accepted best by ``early_stop_min_delta`` for ``early_stop_patience``
    consecutive epochs.
    """
    x, y = _xy(train_set)
    vx, vy = _xy(val_set)
    if len(vy) == 0:
        raise ParameterError("validation set is empty")
    for labels in (y, vy):
        if labels.size and (labels.min() < 0 or labels.max() >= config.n_classes):
            raise LabelError(f"labels must lie in [0, {config.n_classes - 1}]")

    model = Model(config)
    opt = make_optimizer(config.optimizer, config.learning_rate)
    history = []
    best_loss, best_params, best_epoch = math.inf, model.params.copy(), None
    ref_loss, wait = math.inf, 0
    n, bs = len(y), config.batch_size

    for epoch in range(config.max_epochs):
        rng = substream(config.seed, 1, epoch)
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, bs):
            idx = order[start:start + bs]
            loss = model.loss_and_grad(x[idx], y[idx], train=True, rng=rng)
            if not math.isfinite(loss):
                raise TrainingDivergedError(f"{config.architecture}: non-finite loss at epoch {epoch + 1}")
            opt.step(model.params, model.grads)
            total += loss * idx.size
        val_loss, val_acc = evaluate(model, vx, vy)
        if not math.isfinite(val_loss):
            raise TrainingDivergedError(f"{config.architecture}: non-finite validation loss at epoch {epoch + 1}")
        entry = EpochLog(epoch + 1, total / n, val_loss, val_acc)
        history.append(entry)
        if on_epoch is not None:
            on_epoch(entry)
        log.debug("%s epoch %d train %.4f val %.4f acc %.4f", config.architecture, *entry.__dict__.values())

        if val_loss < best_loss:
            best_loss, best_params, best_epoch = val_loss, model.params.copy(), epoch + 1
        if val_loss < ref_loss - config.early_stop_min_delta:
            ref_loss, wait = val_loss, 0
        else:
            wait += 1
            if wait >= config.early_stop_patience:
                break

    return TrainedModel(config, best_params, model.n_params, history, best_epoch)
