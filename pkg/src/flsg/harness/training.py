"""Local logistic-regression training over the flat model-vector format.

The model is a single sigmoid unit: parameters are the weight vector followed
by one bias, flattened to float32 for exchange.  Training runs mini-batch
gradient descent in float64.  A malicious client trains on its pre-mixed
poisoned dataset like any other client and may additionally boost its update,
returning global + boost * (trained - global).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..models import ModelVector
from ..numeric import widen
from .task import SyntheticTask


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.2
    epochs: int = 3
    batch_size: int = 32


@dataclass
class ClientSim:
    """One simulated client and its fixed local dataset."""

    client_id: int
    malicious: bool
    features: np.ndarray
    labels: np.ndarray
    train: TrainConfig
    boost: float = 1.0


def zero_model(task: SyntheticTask) -> ModelVector:
    return ModelVector(np.zeros(task.feature_dim + 1, dtype=np.float32))


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def predict(params: np.ndarray, features: np.ndarray) -> np.ndarray:
    logits = features @ params[:-1] + params[-1]
    return (logits >= 0.0).astype(np.int64)


def accuracy(model: ModelVector, features: np.ndarray, labels: np.ndarray) -> float:
    return float(np.mean(predict(widen(model.params), features) == labels))


def train_local(
    client: ClientSim,
    global_model: ModelVector,
    rng: np.random.Generator,
) -> ModelVector:
    """Mini-batch gradient descent from the current global model.

    Zero epochs return the global model unchanged.
    """
    if global_model.param_count != client.features.shape[1] + 1:
        raise ValueError(
            f"model has {global_model.param_count} parameters, task needs "
            f"{client.features.shape[1] + 1}"
        )
    params = widen(global_model.params).copy()
    cfg = client.train
    m = client.features.shape[0]
    for _ in range(cfg.epochs):
        order = rng.permutation(m)
        for start in range(0, m, cfg.batch_size):
            batch = order[start : start + cfg.batch_size]
            x = client.features[batch]
            y = client.labels[batch]
            err = _sigmoid(x @ params[:-1] + params[-1]) - y
            params[:-1] -= cfg.learning_rate * (x.T @ err) / len(batch)
            params[-1] -= cfg.learning_rate * err.mean()
    if client.boost != 1.0:
        base = widen(global_model.params)
        params = base + client.boost * (params - base)
    return ModelVector(params.astype(np.float32))
