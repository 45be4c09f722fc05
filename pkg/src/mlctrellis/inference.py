"""Monte Carlo inference over trained label models.

Directed models (chains, Bayesian chains, trellises) are sampled exactly in
topological order. Dependency models, whose per-label conditionals need not
come from one joint distribution, are sampled with random-scan Gibbs sweeps;
only the per-label conditionals are ever evaluated.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base_learner import sigmoid
from .data import make_rng
from .errors import ConfigurationError, InputError


@dataclass(frozen=True)
class GibbsConfig:
    t_total: int = 100
    t_burn: int = 10
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.t_burn < self.t_total:
            raise ConfigurationError(
                f"need 0 <= t_burn < t_total, got t_burn={self.t_burn}, t_total={self.t_total}"
            )


@dataclass(frozen=True, eq=False)
class SampleBatch:
    samples: np.ndarray

    @property
    def count(self) -> int:
        return self.samples.shape[0]

    def mean(self) -> np.ndarray:
        return self.samples.mean(axis=0)


def _as_rows(x, d_expected):
    X = np.asarray(x, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    if X.shape[1] != d_expected:
        raise InputError(f"expected {d_expected} features, got {X.shape[1]}")
    return X, single


def _split_weights(classifiers, n_features):
    feat_w = np.stack([c.weights[:n_features] for c in classifiers])
    bias = np.array([c.bias for c in classifiers])
    label_w = [c.weights[n_features:] for c in classifiers]
    return feat_w, bias, label_w


def ancestral_sample(model, x, n_samples: int, seed: int = 0) -> SampleBatch:
    """Draw i.i.d. label vectors from a directed model for a single input ``x``."""
    if n_samples < 1:
        raise ConfigurationError("n_samples must be >= 1")
    X, _ = _as_rows(x, model.n_features)
    if X.shape[0] != 1:
        raise InputError("ancestral_sample takes one feature vector")
    feat_w, bias, label_w = _split_weights(model.classifiers, model.n_features)
    base = X[0] @ feat_w.T + bias
    rng = make_rng(seed)
    L = len(model.classifiers)
    S = np.zeros((n_samples, L), dtype=np.uint8)
    U = rng.random((L, n_samples))
    for pos, label in enumerate(model.topo_order):
        pa = list(model.parents[label])
        z = base[label] + (S[:, pa] @ label_w[label] if pa else 0.0)
        S[:, label] = U[pos] < sigmoid(z)
    return SampleBatch(S)


def gibbs_sample(model, x, config: GibbsConfig = GibbsConfig()) -> np.ndarray:
    """Per-label posterior means from Gibbs sweeps over a dependency model.

    The chain starts at all zeros and runs ``t_total`` sweeps; every sweep
    resamples each label once in a fresh seeded random order, conditioning on
    the current neighbour states. States after sweeps ``t_burn+1 .. t_total``
    are averaged. ``x`` may be one vector or an N x D batch (one chain per row).
    """
    X, single = _as_rows(x, model.n_features)
    feat_w, bias, label_w = _split_weights(model.classifiers, model.n_features)
    base = X @ feat_w.T + bias
    L = len(model.classifiers)
    ne = [list(n) for n in model.neighbors]
    rng = make_rng(config.seed)
    S = np.zeros((X.shape[0], L))
    acc = np.zeros_like(S)
    for t in range(1, config.t_total + 1):
        scan = rng.permutation(L)
        U = rng.random((L, X.shape[0]))
        for label in scan:
            nb = ne[label]
            z = base[:, label] + (S[:, nb] @ label_w[label] if nb else 0.0)
            S[:, label] = U[label] < sigmoid(z)
        if t > config.t_burn:
            acc += S
    means = acc / (config.t_total - config.t_burn)
    return means[0] if single else means


def marginal_map(means) -> np.ndarray:
    """Threshold per-label means at 0.5; exactly 0.5 maps to 0."""
    return (np.asarray(means, dtype=float) > 0.5).astype(np.uint8)
