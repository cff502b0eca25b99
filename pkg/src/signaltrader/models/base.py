"""Training configuration and the shared probability/loss helpers."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ..errors import ConfigError, ShapeError

PROB_CLIP = 1e-12


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters for every trainer.

    ``learning_rate``, ``epsilon`` and ``max_iters`` drive the logistic
    trainers; ``epsilon`` is the step-norm threshold for gradient descent and
    the gradient-norm threshold for BFGS.  The Adam fields, ``epochs``,
    ``batch_size`` and ``validation_fraction`` drive the network.  ``gamma``,
    ``C``, ``svm_tol`` and ``svm_max_passes`` drive SMO.
    """

    learning_rate: float = 0.01
    epsilon: float = 1e-6
    max_iters: int = 10_000
    epochs: int = 100
    validation_fraction: float = 0.2
    seed: int = 0
    adam_learning_rate: float = 0.001
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    batch_size: int = 32
    hidden_units: tuple[int, ...] = (64, 64)
    gamma: float = 0.1
    C: float = 0.8
    svm_tol: float = 1e-3
    svm_max_passes: int = 100

    def __post_init__(self):
        if not 0.0 < self.validation_fraction < 1.0:
            raise ConfigError("validation_fraction must lie in (0, 1)")
        for name in ("learning_rate", "epsilon", "adam_learning_rate", "gamma", "C", "svm_tol"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        for name in ("max_iters", "epochs", "batch_size", "svm_max_passes"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be a positive count")
        object.__setattr__(self, "hidden_units", tuple(int(h) for h in self.hidden_units))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["hidden_units"] = list(self.hidden_units)
        return d


def sigmoid(z):
    """Logistic function, clamped into ``(1e-12, 1 - 1e-12)``.

    Evaluated in a form that never overflows ``exp``.
    """
    z = np.asarray(z, dtype=float)
    ez = np.exp(-np.abs(z))
    out = np.where(z >= 0, 1.0 / (1.0 + ez), ez / (1.0 + ez))
    out = np.clip(out, PROB_CLIP, 1.0 - PROB_CLIP)
    return out[()] if out.ndim == 0 else out


def cross_entropy(y, y_hat) -> float:
    y = np.asarray(y, dtype=float)
    p = np.asarray(y_hat, dtype=float)
    if y.shape != p.shape or y.ndim != 1 or y.size < 1:
        raise ShapeError(f"labels {y.shape} and probabilities {p.shape} must be equal-length vectors")
    p = np.clip(p, PROB_CLIP, 1.0 - PROB_CLIP)
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log1p(-p)))
