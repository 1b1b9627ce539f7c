"""Feed-forward layers with hand-written backward passes.

Every layer declares its parameter shapes; the owning model binds them as
views into one flat parameter vector (and a matching flat gradient vector),
so optimizers and checkpoints only ever see a single array.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import ParameterError, ShapeError


def glorot(rng, shape, fan_in, fan_out):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


class Layer:
    """Base layer. Subclasses fill ``param_shapes`` and implement forward/backward."""

    param_shapes: dict = {}

    def __init__(self):
        self.params = {}
        self.grads = {}

    @property
    def n_params(self):
        return int(sum(np.prod(s) for s in self.param_shapes.values()))

    def bind(self, flat, flat_grad, offset):
        for name, shape in self.param_shapes.items():
            size = int(np.prod(shape))
            self.params[name] = flat[offset:offset + size].reshape(shape)
            self.grads[name] = flat_grad[offset:offset + size].reshape(shape)
            offset += size
        return offset

    def init_params(self, rng):
        pass

    def output_shape(self, shape):
        return shape

    def forward(self, x, train=False, rng=None):
        raise NotImplementedError

    def backward(self, dout):
        raise NotImplementedError


def conv1d_forward(x, kernel, bias):
    """Valid 1-D convolution: ``out[b,t,o] = bias[o] + sum_{tau,c} x[b,t+tau,c] kernel[tau,c,o]``."""
    if x.ndim != 3 or kernel.ndim != 3 or x.shape[2] != kernel.shape[1] or bias.shape != (kernel.shape[2],):
        raise ShapeError(f"conv1d shapes: input {x.shape}, kernel {kernel.shape}, bias {bias.shape}")
    k = kernel.shape[0]
    if k > x.shape[1]:
        raise ShapeError(f"kernel length {k} exceeds {x.shape[1]} steps")
    cols = sliding_window_view(x, k, axis=1)            # b, t', c, k
    cols = cols.transpose(0, 1, 3, 2).reshape(x.shape[0], x.shape[1] - k + 1, -1)
    return cols @ kernel.reshape(-1, kernel.shape[2]) + bias, cols


class Conv1D(Layer):
    def __init__(self, in_ch, out_ch, kernel_size):
        super().__init__()
        self.in_ch, self.out_ch, self.k = in_ch, out_ch, kernel_size
        self.param_shapes = {"kernel": (kernel_size, in_ch, out_ch), "bias": (out_ch,)}

    def init_params(self, rng):
        self.params["kernel"][...] = glorot(rng, (self.k, self.in_ch, self.out_ch),
                                            self.k * self.in_ch, self.k * self.out_ch)
        self.params["bias"][...] = 0.0

    def output_shape(self, shape):
        steps, ch = shape
        if ch != self.in_ch or steps < self.k:
            raise ShapeError(f"Conv1D({self.in_ch}->{self.out_ch}, k={self.k}) cannot take {shape}")
        return (steps - self.k + 1, self.out_ch)

    def forward(self, x, train=False, rng=None):
        out, self._cols = conv1d_forward(x, self.params["kernel"], self.params["bias"])
        self._in_shape = x.shape
        return out

    def backward(self, dout):
        kernel = self.params["kernel"]
        b, t2, _ = dout.shape
        cols = self._cols.reshape(b * t2, -1)
        self.grads["kernel"][...] += (cols.T @ dout.reshape(b * t2, -1)).reshape(kernel.shape)
        self.grads["bias"][...] += dout.sum(axis=(0, 1))
        dcols = (dout @ kernel.reshape(-1, self.out_ch).T).reshape(b, t2, self.k, self.in_ch)
        dx = np.zeros(self._in_shape)
        for tau in range(self.k):
            dx[:, tau:tau + t2, :] += dcols[:, :, tau, :]
        return dx


class Dense(Layer):
    def __init__(self, n_in, n_out):
        super().__init__()
        self.n_in, self.n_out = n_in, n_out
        self.param_shapes = {"W": (n_in, n_out), "b": (n_out,)}

    def init_params(self, rng):
        self.params["W"][...] = glorot(rng, (self.n_in, self.n_out), self.n_in, self.n_out)
        self.params["b"][...] = 0.0

    def output_shape(self, shape):
        if shape != (self.n_in,):
            raise ShapeError(f"Dense({self.n_in}->{self.n_out}) cannot take {shape}")
        return (self.n_out,)

    def forward(self, x, train=False, rng=None):
        if x.shape[-1] != self.n_in:
            raise ShapeError(f"Dense expects {self.n_in} inputs, got {x.shape}")
        self._x = x
        return x @ self.params["W"] + self.params["b"]

    def backward(self, dout):
        self.grads["W"][...] += self._x.T @ dout
        self.grads["b"][...] += dout.sum(axis=0)
        return dout @ self.params["W"].T


class ReLU(Layer):
    def forward(self, x, train=False, rng=None):
        self._mask = x > 0
        return x * self._mask

    def backward(self, dout):
        return dout * self._mask


class MaxPool1D(Layer):
    """Non-overlapping max pooling over time; a trailing remainder is dropped."""

    def __init__(self, pool=2):
        super().__init__()
        self.pool = pool

    def output_shape(self, shape):
        return (shape[0] // self.pool, shape[1])

    def forward(self, x, train=False, rng=None):
        b, t, c = x.shape
        t2 = t // self.pool
        win = x[:, :t2 * self.pool].reshape(b, t2, self.pool, c)
        self._arg = win.argmax(axis=2)
        self._in_shape = x.shape
        return np.take_along_axis(win, self._arg[:, :, None, :], axis=2)[:, :, 0, :]

    def backward(self, dout):
        b, t, c = self._in_shape
        t2 = dout.shape[1]
        dwin = np.zeros((b, t2, self.pool, c))
        np.put_along_axis(dwin, self._arg[:, :, None, :], dout[:, :, None, :], axis=2)
        dx = np.zeros(self._in_shape)
        dx[:, :t2 * self.pool] = dwin.reshape(b, t2 * self.pool, c)
        return dx


class Flatten(Layer):
    def output_shape(self, shape):
        return (int(np.prod(shape)),)

    def forward(self, x, train=False, rng=None):
        self._in_shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, dout):
        return dout.reshape(self._in_shape)


def dropout_mask(rng, shape, rate):
    """Inverted-dropout mask: kept units carry ``1 / (1 - rate)``."""
    if not 0 <= rate < 1:
        raise ParameterError(f"dropout rate must lie in [0, 1), got {rate}")
    if rate == 0:
        return np.ones(shape)
    return (rng.random(shape) >= rate) / (1.0 - rate)


def dropout(x, rate, train, rng=None):
    """Returns ``(y, mask)``; evaluation mode (and rate 0) is the identity."""
    if not 0 <= rate < 1:
        raise ParameterError(f"dropout rate must lie in [0, 1), got {rate}")
    if not train or rate == 0:
        return x, None
    mask = dropout_mask(rng, x.shape, rate)
    return x * mask, mask


class Dropout(Layer):
    def __init__(self, rate):
        super().__init__()
        if not 0 <= rate < 1:
            raise ParameterError(f"dropout rate must lie in [0, 1), got {rate}")
        self.rate = rate

    def forward(self, x, train=False, rng=None):
        y, self._mask = dropout(x, self.rate, train, rng)
        return y

    def backward(self, dout):
        return dout if self._mask is None else dout * self._mask
