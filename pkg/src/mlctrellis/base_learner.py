"""Logistic-link linear classifier trained by stochastic gradient descent.

Every multi-label method in the package builds on :func:`train_binary`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .data import make_rng
from .errors import ConfigurationError, InputError

PROB_EPS = 1e-12


@dataclass(frozen=True)
class SgdConfig:
    """SGD hyper-parameters. The step size at epoch ``e`` (1-based) is
    ``learning_rate / sqrt(e)``."""

    epochs: int = 100
    learning_rate: float = 0.1
    l2: float = 1e-4
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigurationError("epochs must be >= 1")
        if not self.learning_rate > 0:
            raise ConfigurationError("learning_rate must be positive")
        if self.l2 < 0:
            raise ConfigurationError("l2 must be nonnegative")


@dataclass(frozen=True, eq=False)
class LinearModel:
    weights: np.ndarray
    bias: float

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).reshape(-1)
        if w.size < 1:
            raise InputError("a linear model needs at least one input")
        if not (np.all(np.isfinite(w)) and math.isfinite(self.bias)):
            raise InputError("non-finite model parameters")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", float(self.bias))

    @property
    def d_in(self) -> int:
        return self.weights.shape[0]

    def decision(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != self.d_in:
            raise InputError(f"expected {self.d_in} inputs, got {X.shape[-1]}")
        return X @ self.weights + self.bias

    def predict_proba(self, X) -> np.ndarray:
        return sigmoid(self.decision(X))

    def to_record(self) -> dict:
        return {"weights": [float(v) for v in self.weights], "bias": self.bias}

    @classmethod
    def from_record(cls, record: dict) -> "LinearModel":
        return cls(np.asarray(record["weights"], dtype=float), record["bias"])

    def __eq__(self, other):
        if not isinstance(other, LinearModel):
            return NotImplemented
        return self.bias == other.bias and np.array_equal(self.weights, other.weights)

    __hash__ = None


def sigmoid(z):
    """Numerically stable logistic function, clamped to [1e-12, 1 - 1e-12]."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    np.clip(out, PROB_EPS, 1.0 - PROB_EPS, out=out)
    return out if out.ndim else float(out)


def predict_proba(model: LinearModel, x) -> float:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise InputError("predict_proba expects a single feature vector")
    return float(model.predict_proba(x))


def logistic_loss(weights, bias, X, y, l2=0.0) -> float:
    """Mean negative log-likelihood plus ``l2/2 * ||w||^2`` (bias unpenalised)."""
    p = sigmoid(np.asarray(X, dtype=float) @ weights + bias)
    y = np.asarray(y, dtype=float)
    nll = -(y * np.log(p) + (1 - y) * np.log(1 - p)).mean()
    return float(nll + 0.5 * l2 * np.dot(weights, weights))


def logistic_gradient(weights, bias, X, y, l2=0.0) -> tuple[np.ndarray, float]:
    """Gradient of :func:`logistic_loss` with respect to (weights, bias)."""
    X = np.asarray(X, dtype=float)
    r = sigmoid(X @ weights + bias) - np.asarray(y, dtype=float)
    return X.T @ r / len(r) + l2 * np.asarray(weights), float(r.mean())


@numba.njit(cache=True)
def _sgd_epochs(X, y, orders, lr0, l2):
    n, d = X.shape
    w = np.zeros(d)
    b = 0.0
    for e in range(orders.shape[0]):
        lr = lr0 / math.sqrt(e + 1.0)
        for idx in range(n):
            i = orders[e, idx]
            z = b
            for j in range(d):
                z += w[j] * X[i, j]
            if z >= 0:
                p = 1.0 / (1.0 + math.exp(-z))
            else:
                ez = math.exp(z)
                p = ez / (1.0 + ez)
            r = p - y[i]
            for j in range(d):
                w[j] -= lr * (r * X[i, j] + l2 * w[j])
            b -= lr * r
    return w, b


def train_binary(features, targets, config: SgdConfig = SgdConfig()) -> LinearModel:
    """Fit a logistic model by per-sample SGD with seeded per-epoch shuffling."""
    X = np.ascontiguousarray(features, dtype=float)
    y = np.asarray(targets, dtype=float).reshape(-1)
    if X.ndim != 2 or X.shape[0] != y.shape[0] or X.shape[0] < 1:
        raise InputError("features must be N x D with N matching the targets, N >= 1")
    if not np.all(np.isfinite(X)):
        raise InputError("non-finite feature value")
    if not np.all((y == 0) | (y == 1)):
        raise InputError("targets must be binary")
    rng = make_rng(config.seed)
    n = X.shape[0]
    orders = np.empty((config.epochs, n), dtype=np.int64)
    for e in range(config.epochs):
        orders[e] = rng.permutation(n)
    w, b = _sgd_epochs(X, y, orders, float(config.learning_rate), float(config.l2))
    return LinearModel(w, b)
