"""Finite-difference verification of analytic parameter gradients."""

import numpy as np

from .model import Model


def relative_error(a, n, floor=1e-12):
    return np.abs(a - n) / np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)


def grad_check(config, x, y, h=1e-5, params=None):
    """Largest relative error between backprop and central differences over all parameters.

    Runs in evaluation mode, so dropout is inactive. A model without
    parameters scores 0.
    """
    model = Model(config, params)
    if model.n_params == 0:
        return 0.0
    model.loss_and_grad(x, y)
    analytic = model.grads.copy()
    numeric = np.empty_like(analytic)
    theta = model.params
    for i in range(theta.size):
        old = theta[i]
        theta[i] = old + h
        lp = model.loss_and_grad(x, y)
        theta[i] = old - h
        lm = model.loss_and_grad(x, y)
        theta[i] = old
        numeric[i] = (lp - lm) / (2 * h)
    return float(relative_error(analytic, numeric).max())


def tiny_config(kind):
    """A few-hundred-parameter model with the same layer sequence as ``kind``."""
    from .model import (FLATTEN, POOL2, RELU, ModelConfig, bigru, bilstm, canonical_kind, conv, dense,
                        drop)

    kind = canonical_kind(kind)
    if kind == "CNN":
        layers = (conv(3, 3), RELU, POOL2, conv(4, 3), RELU, POOL2, FLATTEN, drop(0.3), dense(5), RELU,
                  dense(9))
        return ModelConfig(kind, layers, input_shape=(20, 1))
    if kind in ("BiLSTM", "BiGRU"):
        rec = bilstm if kind == "BiLSTM" else bigru
        layers = (rec(4, True), drop(0.3), rec(3, False), drop(0.3), dense(5), RELU, dense(9))
        return ModelConfig(kind, layers, input_shape=(5, 4))
    layers = (conv(4, 3), RELU, POOL2, bigru(4, True, 0.2), drop(0.3), bigru(3, False, 0.2), drop(0.3),
              dense(5), RELU, dense(9))
    return ModelConfig(kind, layers, input_shape=(10, 4))


def check_point(config, seed=0, batch=4):
    """Batch, labels and parameters for a gradient check.

    Parameters are drawn from U(-1, 1) rather than the training initializer:
    at Glorot scale the hidden states of a tiny recurrent net are so small that
    many gradient entries fall below the finite-difference noise floor.
    """
    from ..rng import substream

    rng = substream(seed, 5)
    n_in = int(np.prod(config.input_shape))
    x = rng.standard_normal((batch, n_in))
    y = rng.integers(0, config.n_classes, batch)
    params = rng.uniform(-1.0, 1.0, config.param_count)
    return x, y, params


def check_architecture(kind, seed=0, h=1e-5):
    cfg = tiny_config(kind)
    x, y, params = check_point(cfg, seed)
    return grad_check(cfg, x, y, h, params)
