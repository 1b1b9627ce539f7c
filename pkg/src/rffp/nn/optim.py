"""Adam and RMSProp on flat parameter vectors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ParameterError, TrainingDivergedError


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0


@dataclass
class RMSPropState:
    v: np.ndarray


def _check(grads):
    if not np.all(np.isfinite(grads)):
        raise TrainingDivergedError("non-finite gradient")


def adam_step(params, grads, state, lr, beta1=0.9, beta2=0.999, eps=1e-8, t=None):
    """Bias-corrected Adam. Returns new ``(params, state)``; inputs are not modified."""
    _check(grads)
    t = state.t + 1 if t is None else t
    if t < 1:
        raise ParameterError("Adam step counter must be >= 1")
    m = beta1 * state.m + (1 - beta1) * grads
    v = beta2 * state.v + (1 - beta2) * grads * grads
    m_hat = m / (1 - beta1 ** t)
    v_hat = v / (1 - beta2 ** t)
    return params - lr * m_hat / (np.sqrt(v_hat) + eps), AdamState(m, v, t)


def rmsprop_step(params, grads, state, lr, rho=0.9, eps=1e-8):
    _check(grads)
    v = rho * state.v + (1 - rho) * grads * grads
    return params - lr * grads / (np.sqrt(v) + eps), RMSPropState(v)


class Adam:
    def __init__(self, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.state = None

    def step(self, params, grads):
        """In-place update of ``params``."""
        if self.state is None:
            self.state = AdamState(np.zeros_like(params), np.zeros_like(params))
        new, self.state = adam_step(params, grads, self.state, self.lr, self.beta1, self.beta2, self.eps)
        params[...] = new


class RMSProp:
    def __init__(self, lr, rho=0.9, eps=1e-8):
        self.lr, self.rho, self.eps = lr, rho, eps
        self.state = None

    def step(self, params, grads):
        if self.state is None:
            self.state = RMSPropState(np.zeros_like(params))
        new, self.state = rmsprop_step(params, grads, self.state, self.lr, self.rho, self.eps)
        params[...] = new


def make_optimizer(name, lr):
    if lr <= 0:
        raise ParameterError("learning rate must be > 0")
    key = name.lower()
    if key == "adam":
        return Adam(lr)
    if key == "rmsprop":
        return RMSProp(lr)
    raise ParameterError(f"unknown optimizer {name!r}")
