"""Multi-label evaluation scores and Nemenyi rank statistics."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .errors import ConfigurationError, InputError

REPORT_FIELDS = ("dataset", "method", "hamming", "exact", "jaccard", "train_s", "test_s")


def _pair(truth, pred):
    Y = np.asarray(truth).astype(bool)
    P = np.asarray(pred).astype(bool)
    if Y.shape != P.shape or Y.ndim != 2:
        raise InputError(f"truth and prediction shapes differ: {Y.shape} vs {P.shape}")
    if Y.size == 0:
        raise InputError("empty label matrices")
    return Y, P


def hamming_score(truth, pred) -> float:
    Y, P = _pair(truth, pred)
    return float((Y == P).mean())


def exact_match(truth, pred) -> float:
    Y, P = _pair(truth, pred)
    return float(np.all(Y == P, axis=1).mean())


def jaccard_accuracy(truth, pred) -> float:
    """Mean per-row |y AND y_hat| / |y OR y_hat|; rows empty in both score 1."""
    Y, P = _pair(truth, pred)
    inter = (Y & P).sum(axis=1)
    union = (Y | P).sum(axis=1)
    per_row = np.where(union == 0, 1.0, inter / np.maximum(union, 1))
    return float(per_row.mean())


@dataclass
class EvaluationReport:
    hamming: float
    exact_match: float
    jaccard_accuracy: float
    train_seconds: float = 0.0
    test_seconds: float = 0.0
    n: int = 0
    l: int = 0  # noqa: E741


def evaluate(truth, pred, train_seconds=0.0, test_seconds=0.0) -> EvaluationReport:
    Y, _ = _pair(truth, pred)
    return EvaluationReport(
        hamming=hamming_score(truth, pred),
        exact_match=exact_match(truth, pred),
        jaccard_accuracy=jaccard_accuracy(truth, pred),
        train_seconds=train_seconds,
        test_seconds=test_seconds,
        n=Y.shape[0],
        l=Y.shape[1],
    )


def average_ranks(scores, higher_is_better: bool = True) -> np.ndarray:
    """Mean rank of each method (rows) across datasets (columns); ties share the mean rank."""
    S = np.asarray(scores, dtype=float)
    if S.ndim != 2 or S.size == 0:
        raise InputError("scores must be a non-empty methods x datasets matrix")
    keyed = -S if higher_is_better else S
    ranks = np.column_stack([rankdata(keyed[:, j], method="average") for j in range(S.shape[1])])
    return ranks.mean(axis=1)


def nemenyi_cd(n_algorithms: int, n_datasets: int, q_p: float) -> float:
    """Critical rank difference q_p * sqrt(N_A (N_A + 1) / (6 N_D))."""
    if n_algorithms < 2 or n_datasets < 1:
        raise ConfigurationError("need at least 2 algorithms and 1 dataset")
    if not q_p > 0:
        raise ConfigurationError("q_p must be positive")
    return q_p * math.sqrt(n_algorithms * (n_algorithms + 1) / (6.0 * n_datasets))
