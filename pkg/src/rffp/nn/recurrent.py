"""GRU and LSTM cells, single-direction sequence layers, and the bidirectional wrapper.

Row-vector convention throughout: ``x_t`` is ``(batch, in)``, weights are
``W: (in, G*units)``, ``U: (units, G*units)``, ``b: (G*units,)`` with gate
blocks stacked along the last axis (GRU: z, r, h; LSTM: i, f, g, o).

Recurrent dropout multiplies the previous hidden state by one mask per
sequence wherever it enters a recurrent matrix product; the carried state
itself is never masked.

The sequence kernels take a leading direction axis ``D`` on every array so a
bidirectional layer runs both directions in one time loop.
"""

from __future__ import annotations

import numpy as np

from ..errors import ParameterError, ShapeError
from .layers import Layer, dropout_mask, glorot


def sigmoid(a):
    return 0.5 * (1.0 + np.tanh(0.5 * a))


def _check_cell(x, h, W, U, b, gates):
    u = h.shape[-1]
    if W.shape != (x.shape[-1], gates * u) or U.shape != (u, gates * u) or b.shape != (gates * u,):
        raise ShapeError(f"cell shapes: x {x.shape}, h {h.shape}, W {W.shape}, U {U.shape}, b {b.shape}")


def gru_cell(x, h_prev, W, U, b):
    """One GRU step (reset applied before the candidate's recurrent product)."""
    _check_cell(x, h_prev, W, U, b, 3)
    u = h_prev.shape[-1]
    a = x @ W + b
    zr = sigmoid(a[..., :2 * u] + h_prev @ U[:, :2 * u])
    z, r = zr[..., :u], zr[..., u:]
    hh = np.tanh(a[..., 2 * u:] + (r * h_prev) @ U[:, 2 * u:])
    return (1 - z) * h_prev + z * hh


def lstm_cell(x, state, W, U, b):
    """One LSTM step; ``state`` and the return value are ``(h, c)``."""
    h_prev, c_prev = state
    _check_cell(x, h_prev, W, U, b, 4)
    u = h_prev.shape[-1]
    a = x @ W + h_prev @ U + b
    i, f, o = sigmoid(a[..., :u]), sigmoid(a[..., u:2 * u]), sigmoid(a[..., 3 * u:])
    g = np.tanh(a[..., 2 * u:3 * u])
    c = f * c_prev + i * g
    return o * np.tanh(c), c


def gru_seq_forward(x, W, U, b, m):
    """x: (D, B, T, in); W: (D, in, 3u); U: (D, u, 3u); b: (D, 3u); m: (D, B, u) or None."""
    D, B, T, _ = x.shape
    u = U.shape[1]
    Uzr, Uh = U[:, :, :2 * u], U[:, :, 2 * u:]
    ax = x @ W[:, None] + b[:, None, None, :]
    h = np.zeros((D, B, u))
    hs = np.empty((T, D, B, u))
    cache = np.empty((4, T, D, B, u))   # hm, z, r, hh
    for t in range(T):
        hm = h if m is None else h * m
        a = ax[:, :, t]
        zr = sigmoid(a[..., :2 * u] + hm @ Uzr)
        z, r = zr[..., :u], zr[..., u:]
        hh = np.tanh(a[..., 2 * u:] + (r * hm) @ Uh)
        h = hh + (1 - z) * (h - hh)
        hs[t] = h
        cache[0, t], cache[1, t], cache[2, t], cache[3, t] = hm, z, r, hh
    return hs, cache


def gru_seq_backward(dh_seq, x, W, U, m, hs, cache):
    """dh_seq: (T, D, B, u) gradient on every output state. Returns dx, dW, dU, db."""
    T, D, B, u = dh_seq.shape
    UzrT = U[:, :, :2 * u].transpose(0, 2, 1)
    UhT = U[:, :, 2 * u:].transpose(0, 2, 1)
    da = np.empty((T, D, B, 3 * u))
    dU = np.zeros_like(U)
    dh = np.zeros((D, B, u))
    zeros = np.zeros((D, B, u))
    for t in range(T - 1, -1, -1):
        dh = dh + dh_seq[t]
        hm, z, r, hh = cache[:, t]
        h_prev = hs[t - 1] if t > 0 else zeros
        da_h = dh * z * (1 - hh * hh)
        da_z = dh * (hh - h_prev) * z * (1 - z)
        drh = da_h @ UhT
        da_r = drh * hm * r * (1 - r)
        dat = da[t]
        dat[..., :u] = da_z
        dat[..., u:2 * u] = da_r
        dat[..., 2 * u:] = da_h
        hmT = hm.transpose(0, 2, 1)
        dU[:, :, :2 * u] += hmT @ dat[..., :2 * u]
        dU[:, :, 2 * u:] += (r * hm).transpose(0, 2, 1) @ da_h
        dhm = drh * r + dat[..., :2 * u] @ UzrT
        dh = dh * (1 - z) + (dhm if m is None else dhm * m)
    da = da.transpose(1, 2, 0, 3)                       # D, B, T, G
    D, B, T, n_in = x.shape
    dW = x.reshape(D, B * T, n_in).transpose(0, 2, 1) @ da.reshape(D, B * T, -1)
    return da @ W.transpose(0, 2, 1)[:, None], dW, dU, da.sum(axis=(1, 2))


def lstm_seq_forward(x, W, U, b, m):
    D, B, T, _ = x.shape
    u = U.shape[1]
    ax = x @ W[:, None] + b[:, None, None, :]
    h = np.zeros((D, B, u))
    c = np.zeros((D, B, u))
    hs = np.empty((T, D, B, u))
    cs = np.empty((T, D, B, u))
    gates = np.empty((T, D, B, 4 * u))
    hm_s = np.empty((T, D, B, u))
    for t in range(T):
        hm = h if m is None else h * m
        a = ax[:, :, t] + hm @ U
        g = gates[t]
        g[..., :2 * u] = sigmoid(a[..., :2 * u])
        g[..., 2 * u:3 * u] = np.tanh(a[..., 2 * u:3 * u])
        g[..., 3 * u:] = sigmoid(a[..., 3 * u:])
        c = g[..., u:2 * u] * c + g[..., :u] * g[..., 2 * u:3 * u]
        h = g[..., 3 * u:] * np.tanh(c)
        hs[t], cs[t], hm_s[t] = h, c, hm
    return hs, (cs, gates, hm_s)


def lstm_seq_backward(dh_seq, x, W, U, m, hs, cache):
    cs, gates, hm_s = cache
    T, D, B, u = dh_seq.shape
    UT = U.transpose(0, 2, 1)
    da = np.empty((T, D, B, 4 * u))
    dU = np.zeros_like(U)
    dh = np.zeros((D, B, u))
    dc = np.zeros((D, B, u))
    zeros = np.zeros((D, B, u))
    for t in range(T - 1, -1, -1):
        dh = dh + dh_seq[t]
        g = gates[t]
        i, f, gg, o = g[..., :u], g[..., u:2 * u], g[..., 2 * u:3 * u], g[..., 3 * u:]
        c_prev = cs[t - 1] if t > 0 else zeros
        tc = np.tanh(cs[t])
        dc = dc + dh * o * (1 - tc * tc)
        dat = da[t]
        dat[..., :u] = dc * gg * i * (1 - i)
        dat[..., u:2 * u] = dc * c_prev * f * (1 - f)
        dat[..., 2 * u:3 * u] = dc * i * (1 - gg * gg)
        dat[..., 3 * u:] = dh * tc * o * (1 - o)
        dU += hm_s[t].transpose(0, 2, 1) @ dat
        dhm = dat @ UT
        dh = dhm if m is None else dhm * m
        dc = dc * f
    da = da.transpose(1, 2, 0, 3)
    D, B, T, n_in = x.shape
    dW = x.reshape(D, B * T, n_in).transpose(0, 2, 1) @ da.reshape(D, B * T, -1)
    return da @ W.transpose(0, 2, 1)[:, None], dW, dU, da.sum(axis=(1, 2))


class _Recurrent(Layer):
    gates = 1
    _fwd = _bwd = None

    def __init__(self, n_in, units, return_sequences=True, recurrent_dropout=0.0):
        super().__init__()
        if not 0 <= recurrent_dropout < 1:
            raise ParameterError(f"recurrent dropout must lie in [0, 1), got {recurrent_dropout}")
        self.n_in, self.units = n_in, units
        self.return_sequences = return_sequences
        self.recurrent_dropout = recurrent_dropout
        g = self.gates * units
        self.param_shapes = {"W": (n_in, g), "U": (units, g), "b": (g,)}

    def init_params(self, rng):
        g = self.gates * self.units
        self.params["W"][...] = glorot(rng, (self.n_in, g), self.n_in, g)
        self.params["U"][...] = glorot(rng, (self.units, g), self.units, g)
        self.params["b"][...] = 0.0

    def output_shape(self, shape):
        steps, feat = shape
        if feat != self.n_in:
            raise ShapeError(f"{type(self).__name__}({self.n_in}) cannot take {shape}")
        return (steps, self.units) if self.return_sequences else (self.units,)

    def mask(self, batch, train, rng):
        if train and self.recurrent_dropout > 0:
            return dropout_mask(rng, (batch, self.units), self.recurrent_dropout)
        return None

    # stacked entry points shared with Bidirectional
    def run_forward(self, x, W, U, b, m):
        if x.ndim != 4 or x.shape[2] == 0:
            raise ParameterError(f"{type(self).__name__} needs a non-empty sequence, got {x.shape[1:]}")
        hs, cache = type(self)._fwd(x, W, U, b, m)
        self._cache = (x, W, U, m, hs, cache)
        out = hs.transpose(1, 2, 0, 3)                  # D, B, T, u
        return out if self.return_sequences else out[:, :, -1]

    def run_backward(self, dout):
        x, W, U, m, hs, cache = self._cache
        D, B, T, _ = x.shape
        if self.return_sequences:
            dh_seq = dout.transpose(2, 0, 1, 3)
        else:
            dh_seq = np.zeros((T, D, B, self.units))
            dh_seq[-1] = dout
        return type(self)._bwd(dh_seq, x, W, U, m, hs, cache)

    def forward(self, x, train=False, rng=None):
        if x.ndim != 3:
            raise ParameterError(f"expected (batch, steps, features), got {x.shape}")
        m = self.mask(x.shape[0], train, rng)
        p = self.params
        y = self.run_forward(x[None], p["W"][None], p["U"][None], p["b"][None], None if m is None else m[None])
        return y[0]

    def backward(self, dout):
        dx, dW, dU, db = self.run_backward(dout[None])
        self.grads["W"][...] += dW[0]
        self.grads["U"][...] += dU[0]
        self.grads["b"][...] += db[0]
        return dx[0]


class GRU(_Recurrent):
    gates = 3
    _fwd = staticmethod(gru_seq_forward)
    _bwd = staticmethod(gru_seq_backward)


class LSTM(_Recurrent):
    gates = 4
    _fwd = staticmethod(lstm_seq_forward)
    _bwd = staticmethod(lstm_seq_backward)

    def init_params(self, rng):
        super().init_params(rng)
        self.params["b"][self.units:2 * self.units] = 1.0


class Bidirectional(Layer):
    """Runs ``fwd`` over t = 1..T and ``bwd`` over t = T..1 and concatenates.

    Sequence outputs are concatenated per timestep (the backward pass
    re-reversed into forward time); terminal outputs concatenate the two
    final states. Both directions share one time loop.
    """

    def __init__(self, fwd, bwd):
        super().__init__()
        if type(fwd) is not type(bwd) or fwd.param_shapes != bwd.param_shapes:
            raise ShapeError("both directions must be the same kind of layer")
        self.fwd, self.bwd = fwd, bwd
        self.param_shapes = {f"fwd_{k}": v for k, v in fwd.param_shapes.items()}
        self.param_shapes.update({f"bwd_{k}": v for k, v in bwd.param_shapes.items()})

    def bind(self, flat, flat_grad, offset):
        offset = self.fwd.bind(flat, flat_grad, offset)
        offset = self.bwd.bind(flat, flat_grad, offset)
        self.params = {**{f"fwd_{k}": v for k, v in self.fwd.params.items()},
                       **{f"bwd_{k}": v for k, v in self.bwd.params.items()}}
        self.grads = {**{f"fwd_{k}": v for k, v in self.fwd.grads.items()},
                      **{f"bwd_{k}": v for k, v in self.bwd.grads.items()}}
        return offset

    def init_params(self, rng):
        self.fwd.init_params(rng)
        self.bwd.init_params(rng)

    def output_shape(self, shape):
        a = self.fwd.output_shape(shape)
        return a[:-1] + (2 * a[-1],)

    def forward(self, x, train=False, rng=None):
        if x.ndim != 3 or x.shape[1] == 0:
            raise ParameterError(f"bidirectional layer needs a non-empty sequence, got {x.shape}")
        mf = self.fwd.mask(x.shape[0], train, rng)
        mb = self.bwd.mask(x.shape[0], train, rng)
        m = None if mf is None else np.stack([mf, mb])
        f, b = self.fwd.params, self.bwd.params
        y = self.fwd.run_forward(np.stack([x, x[:, ::-1]]), np.stack([f["W"], b["W"]]),
                                 np.stack([f["U"], b["U"]]), np.stack([f["b"], b["b"]]), m)
        yf, yb = y[0], y[1]
        if self.fwd.return_sequences:
            yb = yb[:, ::-1]
        return np.concatenate([yf, yb], axis=-1)

    def backward(self, dout):
        u = self.fwd.units
        df, db = dout[..., :u], dout[..., u:]
        if self.fwd.return_sequences:
            db = db[:, ::-1]
        dx, dW, dU, dbias = self.fwd.run_backward(np.stack([df, db]))
        for i, layer in enumerate((self.fwd, self.bwd)):
            layer.grads["W"][...] += dW[i]
            layer.grads["U"][...] += dU[i]
            layer.grads["b"][...] += dbias[i]
        return dx[0] + dx[1][:, ::-1]
