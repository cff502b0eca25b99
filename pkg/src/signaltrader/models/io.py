"""JSON persistence for trained models.

Each document carries the model kind, its hyperparameters, the seed and
every parameter array as ``{"shape": [...], "data": [...]}`` in row-major
order.  Floats are written with Python's shortest round-trip repr, so a
save/load cycle reproduces every bit.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import ConfigError
from .logistic import LogisticModel
from .mlp import MlpModel
from .svm import SvmModel

FORMAT_VERSION = 1


def _pack(a) -> dict:
    a = np.asarray(a, dtype=float)
    return {"shape": list(a.shape), "data": [float(v) for v in a.ravel(order="C")]}


def _unpack(d) -> np.ndarray:
    return np.array(d["data"], dtype=float).reshape(d["shape"], order="C")


def model_to_dict(model, seed: int | None = None, hyperparameters: dict | None = None) -> dict:
    doc = {"format": FORMAT_VERSION, "kind": model.kind, "seed": seed}
    if isinstance(model, LogisticModel):
        doc["hyperparameters"] = dict(hyperparameters or {})
        doc["arrays"] = {"theta": _pack(model.theta)}
        doc["trained_loss"] = float(model.trained_loss)
    elif isinstance(model, SvmModel):
        doc["hyperparameters"] = {"gamma": model.gamma, "C": model.C, **(hyperparameters or {})}
        doc["arrays"] = {
            "support_vectors": _pack(model.support_vectors),
            "alphas": _pack(model.alphas),
            "sv_labels": _pack(model.sv_labels),
        }
        doc["bias"] = float(model.bias)
    elif isinstance(model, MlpModel):
        doc["hyperparameters"] = dict(hyperparameters or {})
        arrays = {}
        for k, (W, b) in enumerate(model.layers):
            arrays[f"W{k + 1}"] = _pack(W)
            arrays[f"b{k + 1}"] = _pack(b)
        doc["arrays"] = arrays
    else:
        raise TypeError(f"cannot serialise {type(model).__name__}")
    return doc


def model_from_dict(doc: dict):
    kind = doc.get("kind")
    arrays = doc["arrays"]
    if kind == "logistic":
        return LogisticModel(theta=_unpack(arrays["theta"]), trained_loss=float(doc.get("trained_loss", 0.0)))
    if kind == "svm":
        hp = doc["hyperparameters"]
        sv = _unpack(arrays["support_vectors"])
        return SvmModel(
            support_vectors=sv,
            alphas=_unpack(arrays["alphas"]),
            sv_labels=_unpack(arrays["sv_labels"]),
            bias=float(doc["bias"]),
            gamma=float(hp["gamma"]),
            C=float(hp["C"]),
        )
    if kind == "mlp":
        n = len(arrays) // 2
        layers = tuple((_unpack(arrays[f"W{k}"]), _unpack(arrays[f"b{k}"])) for k in range(1, n + 1))
        return MlpModel(layers=layers)
    raise ConfigError(f"unknown model kind {kind!r}")


def dumps_model(model, seed=None, hyperparameters=None) -> str:
    return json.dumps(model_to_dict(model, seed, hyperparameters), indent=1, sort_keys=True)


def loads_model(text: str):
    return model_from_dict(json.loads(text))


def save_model(model, path, seed=None, hyperparameters=None) -> None:
    Path(path).write_text(dumps_model(model, seed, hyperparameters) + "\n", encoding="utf-8")


def load_model(path):
    return loads_model(Path(path).read_text(encoding="utf-8"))
