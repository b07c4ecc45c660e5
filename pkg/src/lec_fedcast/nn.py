"""Stacked stateless LSTM forecaster: forward pass, exact BPTT, Adam, flat codec.

Conventions used by every routine in this module:

* gate blocks inside each ``4H``-wide weight/bias slab are ordered
  (input, forget, cell, output);
* the flat parameter layout is layer 0 (``w_ih`` row-major, ``w_hh``, ``b``),
  layer 1, ..., last layer, head weight, head bias;
* hidden and cell states start at zero for every window (stateless), so a
  forecast depends only on (parameters, window);
* everything is float64.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np


class ShapeError(ValueError):
    """An array does not have the dimensions the model expects."""


def sigmoid(z: np.ndarray) -> np.ndarray:
    # tanh form is overflow-safe for large |z|
    return 0.5 * (np.tanh(0.5 * z) + 1.0)


@dataclass(frozen=True)
class ModelShape:
    """Static architecture description; determines the flat parameter layout."""

    n_layers: int = 3
    hidden: int = 50
    features: int = 8
    horizon: int = 24

    def layer_input(self, layer: int) -> int:
        return self.features if layer == 0 else self.hidden

    def n_params(self) -> int:
        total = 0
        for layer in range(self.n_layers):
            i = self.layer_input(layer)
            total += 4 * self.hidden * (i + self.hidden + 1)
        total += self.horizon * (self.hidden + 1)
        return total


@dataclass
class LstmLayerWeights:
    """One LSTM layer: w_ih [4H x I], w_hh [4H x H], b [4H]."""

    w_ih: np.ndarray
    w_hh: np.ndarray
    b: np.ndarray

    @property
    def hidden(self) -> int:
        return self.w_hh.shape[1]

    @property
    def input_size(self) -> int:
        return self.w_ih.shape[1]

    def validate(self, layer: int) -> None:
        h = self.hidden
        if self.w_ih.shape != (4 * h, self.input_size) or self.w_hh.shape != (4 * h, h):
            raise ShapeError(f"layer {layer}: inconsistent gate matrices "
                             f"{self.w_ih.shape} / {self.w_hh.shape}")
        if self.b.shape != (4 * h,):
            raise ShapeError(f"layer {layer}: bias shape {self.b.shape}, expected ({4 * h},)")


@dataclass
class ForecastModel:
    """Stacked LSTM with a linear head mapping the final hidden state to the forecast."""

    layers: list[LstmLayerWeights]
    head_w: np.ndarray  # [horizon x H]
    head_b: np.ndarray  # [horizon]

    @property
    def shape(self) -> ModelShape:
        return ModelShape(
            n_layers=len(self.layers),
            hidden=self.layers[0].hidden,
            features=self.layers[0].input_size,
            horizon=self.head_b.shape[0],
        )

    def validate(self) -> None:
        if not self.layers:
            raise ShapeError("model has no LSTM layers")
        h = self.layers[0].hidden
        for idx, layer in enumerate(self.layers):
            layer.validate(idx)
            if layer.hidden != h:
                raise ShapeError(f"layer {idx}: hidden size {layer.hidden} != {h}")
            expected_in = self.layers[0].input_size if idx == 0 else h
            if layer.input_size != expected_in:
                raise ShapeError(f"layer {idx}: input size {layer.input_size}, "
                                 f"expected {expected_in}")
        if self.head_w.shape != (self.head_b.shape[0], h):
            raise ShapeError(f"head: weight shape {self.head_w.shape}, expected "
                             f"({self.head_b.shape[0]}, {h})")


def init_model(shape: ModelShape, rng: np.random.Generator | int) -> ForecastModel:
    """Seeded uniform init in [-1/sqrt(H), +1/sqrt(H)]; forget-gate bias set to 1."""
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    h = shape.hidden
    bound = 1.0 / np.sqrt(h)
    layers = []
    for layer in range(shape.n_layers):
        i = shape.layer_input(layer)
        w_ih = rng.uniform(-bound, bound, size=(4 * h, i))
        w_hh = rng.uniform(-bound, bound, size=(4 * h, h))
        b = rng.uniform(-bound, bound, size=4 * h)
        b[h:2 * h] = 1.0
        layers.append(LstmLayerWeights(w_ih, w_hh, b))
    head_w = rng.uniform(-bound, bound, size=(shape.horizon, h))
    head_b = rng.uniform(-bound, bound, size=shape.horizon)
    return ForecastModel(layers, head_w, head_b)


def zero_model(shape: ModelShape) -> ForecastModel:
    return unflatten(np.zeros(shape.n_params()), shape)


def flatten(model: ForecastModel) -> np.ndarray:
    """Canonical flat vector; unflatten(flatten(m)) round-trips bit-identically."""
    parts = []
    for layer in model.layers:
        parts.extend((layer.w_ih.ravel(), layer.w_hh.ravel(), layer.b))
    parts.extend((model.head_w.ravel(), model.head_b))
    return np.concatenate(parts)


def unflatten(values: np.ndarray, shape: ModelShape) -> ForecastModel:
    values = np.asarray(values, dtype=float)
    expected = shape.n_params()
    if values.ndim != 1 or values.size != expected:
        raise ShapeError(f"parameter vector has {values.size} entries, expected {expected}")
    h = shape.hidden
    pos = 0

    def take(*dims: int) -> np.ndarray:
        nonlocal pos
        size = int(np.prod(dims))
        out = values[pos:pos + size].reshape(dims).copy()
        pos += size
        return out

    layers = []
    for layer in range(shape.n_layers):
        i = shape.layer_input(layer)
        layers.append(LstmLayerWeights(take(4 * h, i), take(4 * h, h), take(4 * h)))
    head_w = take(shape.horizon, h)
    head_b = take(shape.horizon)
    return ForecastModel(layers, head_w, head_b)


@dataclass
class ForwardCache:
    """Per-layer activations kept for BPTT.

    ``x`` is the [B x T x F] input batch; for each layer we keep its input
    sequence, hidden/cell sequences, the four gate activations and tanh(c).
    """

    x: np.ndarray
    layer_inputs: list[np.ndarray]
    h: list[np.ndarray]
    c: list[np.ndarray]
    gates: list[tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]]
    tanh_c: list[np.ndarray]
    preds: np.ndarray


def _forward(model: ForecastModel, x: np.ndarray) -> tuple[np.ndarray, ForwardCache]:
    shape = model.shape
    if x.ndim != 3:
        raise ShapeError(f"window batch must be 3-d [B x T x F], got shape {x.shape}")
    if x.shape[2] != shape.features:
        raise ShapeError(f"layer 0 expects {shape.features} input features, "
                         f"window has {x.shape[2]}")
    b, t, _ = x.shape
    h_size = shape.hidden

    layer_inputs, hs, cs, gates, tanh_cs = [], [], [], [], []
    inp = x
    for layer in model.layers:
        zx = inp @ layer.w_ih.T + layer.b  # [B x T x 4H]
        whh_t = layer.w_hh.T
        h_seq = np.empty((b, t, h_size))
        c_seq = np.empty((b, t, h_size))
        gi = np.empty((b, t, h_size))
        gf = np.empty((b, t, h_size))
        gg = np.empty((b, t, h_size))
        go = np.empty((b, t, h_size))
        tc_seq = np.empty((b, t, h_size))
        h = np.zeros((b, h_size))
        c = np.zeros((b, h_size))
        for step in range(t):
            z = zx[:, step] + h @ whh_t
            i = sigmoid(z[:, :h_size])
            f = sigmoid(z[:, h_size:2 * h_size])
            g = np.tanh(z[:, 2 * h_size:3 * h_size])
            o = sigmoid(z[:, 3 * h_size:])
            c = f * c + i * g
            tc = np.tanh(c)
            h = o * tc
            gi[:, step], gf[:, step], gg[:, step], go[:, step] = i, f, g, o
            c_seq[:, step] = c
            tc_seq[:, step] = tc
            h_seq[:, step] = h
        layer_inputs.append(inp)
        hs.append(h_seq)
        cs.append(c_seq)
        gates.append((gi, gf, gg, go))
        tanh_cs.append(tc_seq)
        inp = h_seq

    preds = hs[-1][:, -1] @ model.head_w.T + model.head_b
    cache = ForwardCache(x, layer_inputs, hs, cs, gates, tanh_cs, preds)
    return preds, cache


def _backward(model: ForecastModel, cache: ForwardCache, dpred: np.ndarray) -> np.ndarray:
    shape = model.shape
    b, t, _ = cache.x.shape
    h_size = shape.hidden

    h_final = cache.h[-1][:, -1]
    d_head_w = dpred.T @ h_final
    d_head_b = dpred.sum(axis=0)

    d_in = np.zeros((b, t, h_size))
    d_in[:, -1] = dpred @ model.head_w

    layer_grads: list[tuple[np.ndarray, np.ndarray, np.ndarray]] = [None] * shape.n_layers
    for idx in range(shape.n_layers - 1, -1, -1):
        layer = model.layers[idx]
        inp = cache.layer_inputs[idx]
        h_seq, c_seq = cache.h[idx], cache.c[idx]
        gi, gf, gg, go = cache.gates[idx]
        tc_seq = cache.tanh_c[idx]

        dz_all = np.empty((b, t, 4 * h_size))
        dh_carry = np.zeros((b, h_size))
        dc_carry = np.zeros((b, h_size))
        for step in range(t - 1, -1, -1):
            i, f, g, o = gi[:, step], gf[:, step], gg[:, step], go[:, step]
            tc = tc_seq[:, step]
            dh = d_in[:, step] + dh_carry
            do = dh * tc
            dc = dc_carry + dh * o * (1.0 - tc * tc)
            c_prev = c_seq[:, step - 1] if step > 0 else 0.0
            dz = dz_all[:, step]
            dz[:, :h_size] = dc * g * i * (1.0 - i)
            dz[:, h_size:2 * h_size] = dc * c_prev * f * (1.0 - f)
            dz[:, 2 * h_size:3 * h_size] = dc * i * (1.0 - g * g)
            dz[:, 3 * h_size:] = do * o * (1.0 - o)
            dh_carry = dz @ layer.w_hh
            dc_carry = dc * f

        d_w_ih = np.tensordot(dz_all, inp, axes=([0, 1], [0, 1]))
        d_w_hh = np.tensordot(dz_all[:, 1:], h_seq[:, :-1], axes=([0, 1], [0, 1]))
        d_b = dz_all.sum(axis=(0, 1))
        layer_grads[idx] = (d_w_ih, d_w_hh, d_b)
        if idx > 0:
            d_in = dz_all @ layer.w_ih

    parts = []
    for d_w_ih, d_w_hh, d_b in layer_grads:
        parts.extend((d_w_ih.ravel(), d_w_hh.ravel(), d_b))
    parts.extend((d_head_w.ravel(), d_head_b))
    return np.concatenate(parts)


def lstm_forward(model: ForecastModel,
                 window: np.ndarray) -> tuple[np.ndarray, ForwardCache]:
    """Forecast one [T x F] window; the cache feeds :func:`backward`."""
    window = np.asarray(window, dtype=float)
    if window.ndim != 2:
        raise ShapeError(f"window must be 2-d [T x F], got shape {window.shape}")
    preds, cache = _forward(model, window[None])
    return preds[0], cache


def forward_batch(model: ForecastModel,
                  windows: np.ndarray) -> tuple[np.ndarray, ForwardCache]:
    """Forecast a [B x T x F] batch of windows in one pass."""
    return _forward(model, np.asarray(windows, dtype=float))


def mse_loss(pred: np.ndarray, target: np.ndarray) -> float:
    pred = np.asarray(pred, dtype=float)
    target = np.asarray(target, dtype=float)
    if pred.shape != target.shape or pred.size == 0:
        raise ShapeError(f"prediction shape {pred.shape} vs target shape {target.shape}")
    diff = pred - target
    return float(np.mean(diff * diff))


def _add_prox(grad: np.ndarray, model: ForecastModel,
              prox: tuple[float, np.ndarray] | None) -> np.ndarray:
    if prox is None:
        return grad
    mu, anchor = prox
    anchor = np.asarray(anchor, dtype=float)
    w = flatten(model)
    if anchor.shape != w.shape:
        raise ShapeError(f"prox anchor has {anchor.size} entries, expected {w.size}")
    return grad + mu * (w - anchor)


def backward(model: ForecastModel, cache: ForwardCache, target: np.ndarray,
             prox: tuple[float, np.ndarray] | None = None) -> np.ndarray:
    """Exact gradient of MSE(pred, target) [+ (mu/2)||w - anchor||^2] for one window."""
    target = np.asarray(target, dtype=float)
    horizon = model.shape.horizon
    if target.shape != (horizon,):
        raise ShapeError(f"target shape {target.shape}, expected ({horizon},)")
    dpred = 2.0 * (cache.preds - target[None]) / horizon
    return _add_prox(_backward(model, cache, dpred), model, prox)


def backward_batch(model: ForecastModel, cache: ForwardCache, targets: np.ndarray,
                   prox: tuple[float, np.ndarray] | None = None) -> np.ndarray:
    """Gradient of the batch-mean window MSE [+ prox term, added once]."""
    targets = np.asarray(targets, dtype=float)
    if targets.shape != cache.preds.shape:
        raise ShapeError(f"targets shape {targets.shape}, expected {cache.preds.shape}")
    b, horizon = targets.shape
    dpred = 2.0 * (cache.preds - targets) / (horizon * b)
    return _add_prox(_backward(model, cache, dpred), model, prox)


@dataclass(frozen=True)
class AdamState:
    """First/second moment vectors plus step counter and hyperparameters."""

    m: np.ndarray
    v: np.ndarray
    t: int = 0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8


def adam_init(n_params: int, lr: float = 1e-3, beta1: float = 0.9,
              beta2: float = 0.999, epsilon: float = 1e-8) -> AdamState:
    return AdamState(m=np.zeros(n_params), v=np.zeros(n_params),
                     t=0, lr=lr, beta1=beta1, beta2=beta2, epsilon=epsilon)


def adam_step(params: np.ndarray, grad: np.ndarray,
              state: AdamState) -> tuple[np.ndarray, AdamState]:
    """One bias-corrected Adam update; pure (returns fresh arrays/state)."""
    params = np.asarray(params, dtype=float)
    grad = np.asarray(grad, dtype=float)
    if params.shape != grad.shape or params.shape != state.m.shape:
        raise ShapeError(f"params/grad/moments length mismatch: "
                         f"{params.shape} / {grad.shape} / {state.m.shape}")
    if not np.all(np.isfinite(grad)):
        raise FloatingPointError(f"non-finite gradient entries at optimizer step {state.t + 1}")
    t = state.t + 1
    m = state.beta1 * state.m + (1.0 - state.beta1) * grad
    v = state.beta2 * state.v + (1.0 - state.beta2) * grad * grad
    m_hat = m / (1.0 - state.beta1 ** t)
    v_hat = v / (1.0 - state.beta2 ** t)
    new_params = params - state.lr * m_hat / (np.sqrt(v_hat) + state.epsilon)
    return new_params, replace(state, m=m, v=v, t=t)
