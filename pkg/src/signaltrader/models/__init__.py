"""The three classifiers, their trainers, and signal extraction.

``train_model`` dispatches on a model kind string:

============  ==============================================
kind          trainer
============  ==============================================
logistic      cross-entropy logistic regression, BFGS
logistic-gd   the same model, fixed-step gradient descent
svm           RBF soft-margin SVM, SMO
mlp           64-64-1 ReLU network on the change rate, Adam
============  ==============================================
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError
from .base import TrainConfig, cross_entropy, sigmoid
from .bfgs import BfgsState, bfgs_minimize, bfgs_update
from .io import load_model, loads_model, dumps_model, save_model
from .logistic import LogisticModel, fit_logistic_bfgs, fit_logistic_gd, logistic_grad, logistic_loss
from .mlp import MlpModel, fit_mlp, init_mlp, loss_and_grads, mlp_forward
from .svm import SvmModel, fit_svm_smo, rbf_kernel, svm_predict

MODEL_KINDS = ("logistic", "logistic-gd", "svm", "mlp")

__all__ = [
    "MODEL_KINDS",
    "TrainConfig",
    "sigmoid",
    "cross_entropy",
    "BfgsState",
    "bfgs_update",
    "bfgs_minimize",
    "LogisticModel",
    "logistic_loss",
    "logistic_grad",
    "fit_logistic_gd",
    "fit_logistic_bfgs",
    "SvmModel",
    "rbf_kernel",
    "fit_svm_smo",
    "svm_predict",
    "MlpModel",
    "init_mlp",
    "mlp_forward",
    "loss_and_grads",
    "fit_mlp",
    "train_model",
    "predict_signal",
    "predict_signals",
    "save_model",
    "load_model",
    "dumps_model",
    "loads_model",
]


def train_model(kind: str, X, labels, change, cfg: TrainConfig = TrainConfig()):
    """Fit a model of ``kind``; the network trains on ``change``, the rest on ``labels``."""
    if kind == "logistic":
        return fit_logistic_bfgs(X, labels, cfg)
    if kind == "logistic-gd":
        return fit_logistic_gd(X, labels, cfg)
    if kind == "svm":
        return fit_svm_smo(X, labels, cfg=cfg)
    if kind == "mlp":
        return fit_mlp(X, change, cfg)
    raise ConfigError(f"unknown model kind {kind!r}; expected one of {', '.join(MODEL_KINDS)}")


def predict_signals(model, X) -> np.ndarray:
    """Vector of {0, 1} signals; a score exactly on the boundary gives 0."""
    if isinstance(model, LogisticModel):
        return (model.predict_proba(X) > 0.5).astype(np.int64)
    if isinstance(model, SvmModel):
        return model.predict(X)
    if isinstance(model, MlpModel):
        return (model.forward(X) > 0).astype(np.int64)
    raise TypeError(f"not a trained model: {type(model).__name__}")


def predict_signal(model, x) -> int:
    x = np.asarray(x, dtype=float)
    return int(predict_signals(model, x[None, :])[0])
