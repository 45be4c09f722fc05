"""Datasets, CSV I/O, fold splitting and the synthetic Bayesian-network generator.

All random draws go through ``numpy.random.Generator(PCG64(seed))``; normal
variates use the generator's ``standard_normal`` so a given seed reproduces
the same data bit for bit on a given numpy release.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigurationError, DatasetParseError, InputError


def make_rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True, eq=False)
class Dataset:
    """N instances of D real features with L binary labels.

    ``labels`` is stored as ``uint8`` and ``features`` as ``float64``.
    """

    features: np.ndarray
    labels: np.ndarray
    feature_names: Sequence[str] = field(default=())
    label_names: Sequence[str] = field(default=())

    def __post_init__(self):
        X = np.asarray(self.features, dtype=float)
        Y = np.asarray(self.labels)
        if X.ndim != 2 or Y.ndim != 2:
            raise InputError("features and labels must be 2-D")
        if X.shape[0] != Y.shape[0]:
            raise InputError(
                f"row count mismatch: {X.shape[0]} feature rows, {Y.shape[0]} label rows"
            )
        if X.shape[0] < 1:
            raise InputError("no instances")
        if X.shape[1] < 1 or Y.shape[1] < 1:
            raise InputError("need at least one feature and one label")
        if not np.all((Y == 0) | (Y == 1)):
            raise InputError("label entries must be 0 or 1")
        fnames = tuple(self.feature_names) or tuple(f"x{i + 1}" for i in range(X.shape[1]))
        lnames = tuple(self.label_names) or tuple(f"y{i + 1}" for i in range(Y.shape[1]))
        if len(fnames) != X.shape[1] or len(lnames) != Y.shape[1]:
            raise InputError("name lists must match the feature and label counts")
        X = X.copy()
        Y = Y.astype(np.uint8)
        X.setflags(write=False)
        Y.setflags(write=False)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", Y)
        object.__setattr__(self, "feature_names", fnames)
        object.__setattr__(self, "label_names", lnames)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    @property
    def l(self) -> int:  # noqa: E743
        return self.labels.shape[1]

    def subset(self, rows) -> "Dataset":
        rows = np.asarray(rows)
        return Dataset(self.features[rows], self.labels[rows], self.feature_names, self.label_names)


@dataclass(frozen=True, eq=False)
class GroundTruthGraph:
    """Known label structure of a generated dataset (at most one parent per label)."""

    parent: tuple
    weights: np.ndarray
    alpha: float
    sigma2: float
    delta: float
    t: int

    @property
    def parents(self) -> list[tuple[int, ...]]:
        return [() if p is None else (p,) for p in self.parent]

    def edges(self) -> set[frozenset]:
        return {frozenset((c, p)) for c, p in enumerate(self.parent) if p is not None}


@dataclass(frozen=True, eq=False)
class FoldPlan:
    k: int
    assignments: np.ndarray

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments != fold)


def load_dataset(path, label_count: int) -> Dataset:
    """Read the CSV dialect: header line, labels in the leftmost ``label_count`` columns."""
    if label_count < 1:
        raise ConfigurationError("label_count must be >= 1")
    with open(path, encoding="utf-8", newline="") as fh:
        lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise DatasetParseError("empty file (missing header)", line=1)
    header = lines[0].rstrip("\r").split(",")
    ncol = len(header)
    if label_count >= ncol:
        raise ConfigurationError(
            f"label_count={label_count} leaves no feature columns ({ncol} columns)"
        )
    labels, features = [], []
    for lineno, raw in enumerate(lines[1:], start=2):
        cells = raw.rstrip("\r").split(",")
        if len(cells) != ncol:
            raise DatasetParseError(f"expected {ncol} cells, found {len(cells)}", line=lineno)
        row_y = []
        for cell in cells[:label_count]:
            if cell not in ("0", "1"):
                raise DatasetParseError(f"label cell {cell!r} is not 0 or 1", line=lineno)
            row_y.append(cell == "1")
        try:
            row_x = [float(c) for c in cells[label_count:]]
        except ValueError:
            raise DatasetParseError("non-numeric feature cell", line=lineno) from None
        labels.append(row_y)
        features.append(row_x)
    if not labels:
        raise DatasetParseError("no instances")
    return Dataset(
        features=np.array(features, dtype=float),
        labels=np.array(labels, dtype=np.uint8),
        feature_names=header[label_count:],
        label_names=header[:label_count],
    )


def save_dataset(dataset: Dataset, path) -> None:
    if dataset.n < 1:
        raise InputError("no instances")
    header = ",".join(list(dataset.label_names) + list(dataset.feature_names))
    out = [header]
    for y, x in zip(dataset.labels, dataset.features):
        out.append(",".join([str(int(v)) for v in y] + [repr(float(v)) for v in x]))
    Path(path).write_text("\n".join(out) + "\n", encoding="utf-8")


def kfold_split(n: int, k: int, seed: int = 0) -> FoldPlan:
    if k < 2 or k > n:
        raise ConfigurationError(f"need 2 <= k <= n, got k={k}, n={n}")
    perm = make_rng(seed).permutation(n)
    assignments = np.empty(n, dtype=np.int64)
    assignments[perm] = np.arange(n) % k
    return FoldPlan(k=k, assignments=assignments)


def label_cardinality(dataset: Dataset) -> float:
    return float(dataset.labels.sum(axis=1).mean())


def generate_bn_dataset(
    n: int,
    d: int,
    l: int,  # noqa: E741
    t: int,
    alpha: float = 1.0,
    sigma2: float = 1.0,
    delta: float = 0.0,
    seed: int = 0,
) -> tuple[Dataset, GroundTruthGraph]:
    """Sample labels from a random one-parent DAG over linear-Gaussian label rules.

    Label ``l`` is on iff ``w_l . x / sqrt(t) + eps_l >= delta`` with
    ``eps_l ~ N(alpha * s_pa, sigma2)``, where ``s_pa`` is the parent label in
    {-1, +1} (0 for roots). Each non-first label independently gets no parent or
    a uniformly chosen earlier label with probability 1/2 each, so index order is
    a topological order.
    """
    if n < 1 or d < 1 or l < 1:
        raise ConfigurationError("n, d and l must be positive")
    if not 1 <= t <= d:
        raise ConfigurationError(f"need 1 <= t <= d, got t={t}, d={d}")
    if not sigma2 > 0:
        raise ConfigurationError("sigma2 must be positive")
    rng = make_rng(seed)
    parent: list[Optional[int]] = [None]
    for j in range(1, l):
        if rng.random() < 0.5:
            parent.append(None)
        else:
            parent.append(int(rng.integers(j)))
    weights = np.zeros((l, d), dtype=np.uint8)
    for j in range(l):
        weights[j, rng.choice(d, size=t, replace=False)] = 1
    X = rng.standard_normal((n, d))
    signs = np.zeros((n, l))
    sd = math.sqrt(sigma2)
    drive = X @ weights.T.astype(float) / math.sqrt(t)
    for j in range(l):
        mean = 0.0 if parent[j] is None else alpha * signs[:, parent[j]]
        eps = mean + sd * rng.standard_normal(n)
        signs[:, j] = np.where(drive[:, j] + eps >= delta, 1.0, -1.0)
    labels = (signs > 0).astype(np.uint8)
    truth = GroundTruthGraph(
        parent=tuple(parent), weights=weights, alpha=alpha, sigma2=sigma2, delta=delta, t=t
    )
    return Dataset(X, labels), truth
