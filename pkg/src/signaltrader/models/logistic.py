"""Logistic regression on the cross-entropy loss.

Two trainers share the same loss and gradient: plain gradient descent
(zero start, fixed step, stop on a small parameter change) and BFGS.
The bias is the last entry of ``theta``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DivergenceError, ShapeError
from .base import TrainConfig, cross_entropy, sigmoid
from .bfgs import bfgs_minimize


@dataclass(frozen=True, eq=False)
class LogisticModel:
    theta: np.ndarray
    trained_loss: float
    info: dict = field(default_factory=dict)

    kind = "logistic"

    @property
    def n_features(self) -> int:
        return self.theta.size - 1

    def predict_proba(self, X) -> np.ndarray:
        return sigmoid(with_bias(X) @ self.theta)


def with_bias(X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return np.hstack([X, np.ones((X.shape[0], 1))])


def _expit(z):
    ez = np.exp(-np.abs(z))
    return np.where(z >= 0, 1.0 / (1.0 + ez), ez / (1.0 + ez))


def _check(theta, X, y):
    theta = np.asarray(theta, dtype=float)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    if y.ndim != 1 or X.shape[0] != y.size or theta.shape != (X.shape[1] + 1,):
        raise ShapeError(f"theta {theta.shape}, X {X.shape} and y {y.shape} are inconsistent")
    return theta, X, y


def logistic_loss(theta, X, y) -> float:
    theta, X, y = _check(theta, X, y)
    return cross_entropy(y, sigmoid(with_bias(X) @ theta))


def logistic_grad(theta, X, y) -> np.ndarray:
    """Gradient ``(1/m) Xb^T (h - y)`` where ``Xb`` is ``X`` with a ones column."""
    theta, X, y = _check(theta, X, y)
    Xb = with_bias(X)
    # unclamped h: the clamp only guards the logarithms
    h = _expit(Xb @ theta)
    return Xb.T @ (h - y) / y.size


def fit_logistic_gd(X, y, cfg: TrainConfig = TrainConfig(), callback=None) -> LogisticModel:
    """Fixed-step gradient descent from ``theta = 0``.

    Stops when ``|theta_t - theta_{t-1}| < cfg.epsilon`` or after
    ``cfg.max_iters`` updates.  ``callback(t, theta, loss)`` sees the loss of
    every iterate, including the starting point (``t = 0``).
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    theta = np.zeros(X.shape[1] + 1)
    loss = logistic_loss(theta, X, y)
    if callback is not None:
        callback(0, theta, loss)
    it = 0
    converged = False
    while it < cfg.max_iters:
        step = cfg.learning_rate * logistic_grad(theta, X, y)
        theta = theta - step
        it += 1
        loss = logistic_loss(theta, X, y)
        if not np.isfinite(loss) or not np.all(np.isfinite(theta)):
            raise DivergenceError("iteration", it)
        if callback is not None:
            callback(it, theta, loss)
        if np.linalg.norm(step) < cfg.epsilon:
            converged = True
            break
    return LogisticModel(
        theta=theta,
        trained_loss=loss,
        info={"optimizer": "gd", "iterations": it, "converged": converged},
    )


def fit_logistic_bfgs(X, y, cfg: TrainConfig = TrainConfig(), callback=None) -> LogisticModel:
    """BFGS from ``theta = 0``; stops on ``|grad| < cfg.epsilon`` or ``cfg.max_iters``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)

    def f(theta):
        return logistic_loss(theta, X, y)

    def g(theta):
        return logistic_grad(theta, X, y)

    res = bfgs_minimize(f, g, np.zeros(X.shape[1] + 1), tol=cfg.epsilon, max_iters=cfg.max_iters, callback=callback)
    if not np.isfinite(res.fun) or not np.all(np.isfinite(res.x)):
        raise DivergenceError("iteration", res.iterations)
    return LogisticModel(
        theta=res.x,
        trained_loss=float(res.fun),
        info={
            "optimizer": "bfgs",
            "iterations": res.iterations,
            "converged": res.converged,
            "grad_norm": float(np.linalg.norm(res.grad)),
        },
    )
