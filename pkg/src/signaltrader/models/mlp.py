"""Fully connected regression network trained with Adam.

Architecture: ``F -> 64 -> 64 -> 1`` with ReLU on the hidden layers and an
identity output, fitted to the raw change rate with a mean-squared-error
loss.  Weight matrices are stored as ``(fan_out, fan_in)`` so a layer maps
``x`` to ``W @ x + b``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DivergenceError, ShapeError
from .base import TrainConfig


@dataclass(frozen=True, eq=False)
class MlpModel:
    layers: tuple[tuple[np.ndarray, np.ndarray], ...]
    info: dict = field(default_factory=dict)

    kind = "mlp"

    def __post_init__(self):
        prev = None
        for W, b in self.layers:
            if W.ndim != 2 or b.shape != (W.shape[0],):
                raise ShapeError(f"bad layer shapes W{W.shape} b{b.shape}")
            if prev is not None and W.shape[1] != prev:
                raise ShapeError(f"layer expects {W.shape[1]} inputs, previous layer gives {prev}")
            prev = W.shape[0]
        if prev != 1:
            raise ShapeError("output layer must have a single unit")

    @property
    def n_features(self) -> int:
        return self.layers[0][0].shape[1]

    def forward(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n_features:
            raise ShapeError(f"expected {self.n_features} features, got {X.shape[1]}")
        h = X
        last = len(self.layers) - 1
        for k, (W, b) in enumerate(self.layers):
            h = h @ W.T + b
            if k < last:
                h = np.maximum(h, 0.0)
        return h[:, 0]

    def parameters(self) -> list[np.ndarray]:
        return [p for layer in self.layers for p in layer]


def mlp_forward(model: MlpModel, x) -> float:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ShapeError("mlp_forward takes a single feature vector")
    return float(model.forward(x[None, :])[0])


def init_mlp(n_features: int, hidden=(64, 64), seed: int = 0) -> MlpModel:
    """Glorot-uniform weights, zero biases."""
    rng = np.random.default_rng(seed)
    sizes = [n_features, *hidden, 1]
    layers = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        layers.append((rng.uniform(-limit, limit, size=(fan_out, fan_in)), np.zeros(fan_out)))
    return MlpModel(layers=tuple(layers))


def mse_loss(model: MlpModel, X, y) -> float:
    r = model.forward(X) - np.asarray(y, dtype=float)
    return float(np.mean(r * r))


def loss_and_grads(model: MlpModel, X, y) -> tuple[float, list[np.ndarray]]:
    """MSE loss and its gradient, ordered like :meth:`MlpModel.parameters`."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    if y.shape != (X.shape[0],):
        raise ShapeError(f"X has {X.shape[0]} rows but y has shape {y.shape}")
    acts = [X]
    pre = []
    h = X
    last = len(model.layers) - 1
    for k, (W, b) in enumerate(model.layers):
        z = h @ W.T + b
        pre.append(z)
        h = np.maximum(z, 0.0) if k < last else z
        acts.append(h)
    m = X.shape[0]
    r = acts[-1][:, 0] - y
    loss = float(np.mean(r * r))

    grads: list[np.ndarray] = []
    delta = (2.0 / m) * r[:, None]
    for k in range(last, -1, -1):
        W, _ = model.layers[k]
        gW = delta.T @ acts[k]
        gb = delta.sum(axis=0)
        grads[:0] = [gW, gb]
        if k > 0:
            delta = (delta @ W) * (pre[k - 1] > 0)
    return loss, grads


class Adam:
    def __init__(self, params: list[np.ndarray], lr=0.001, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        """Update ``params`` in place."""
        self.t += 1
        c1 = 1.0 - self.beta1**self.t
        c2 = 1.0 - self.beta2**self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def fit_mlp(X, y_change, cfg: TrainConfig = TrainConfig(), callback=None) -> MlpModel:
    """Fit the network to the change rate by minibatch Adam.

    The last ``cfg.validation_fraction`` of the rows is held out and only used
    for the reported validation loss.  Rows are reshuffled every epoch with a
    generator seeded from ``cfg.seed``, so two calls with the same inputs
    produce identical parameters.  ``callback(epoch, model)`` runs after each
    epoch.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y_change, dtype=float)
    if y.shape != (X.shape[0],):
        raise ShapeError(f"X has {X.shape[0]} rows but y has shape {y.shape}")
    n = X.shape[0]
    n_val = int(np.floor(n * cfg.validation_fraction))
    if n - n_val < 1:
        raise ShapeError("no training rows left after the validation hold-out")
    X_fit, y_fit = X[: n - n_val], y[: n - n_val]
    X_val, y_val = X[n - n_val :], y[n - n_val :]

    model = init_mlp(X.shape[1], cfg.hidden_units, seed=cfg.seed)
    params = model.parameters()
    opt = Adam(params, cfg.adam_learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps)
    rng = np.random.default_rng(cfg.seed + 1)

    train_hist, val_hist = [], []
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(X_fit.shape[0])
        total = 0.0
        for start in range(0, order.size, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            loss, grads = loss_and_grads(model, X_fit[idx], y_fit[idx])
            if not np.isfinite(loss):
                raise DivergenceError("epoch", epoch)
            opt.step(params, grads)
            total += loss * idx.size
        train_hist.append(total / order.size)
        if n_val:
            val_hist.append(mse_loss(model, X_val, y_val))
        if callback is not None:
            callback(epoch, model)

    model.info.update(
        epochs=cfg.epochs,
        train_loss=train_hist,
        val_loss=val_hist,
        final_train_loss=mse_loss(model, X_fit, y_fit),
    )
    return model
