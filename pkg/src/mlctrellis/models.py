"""Multi-label methods: independent classifiers, classifier chains and their
ensembles, Bayesian chains, classifier trellises and dependency trellises.

During training every label classifier sees the *true* values of its parent
(or neighbour) labels, appended to the features as 0/1 columns. At prediction
time the parents are the model's own earlier predictions.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .base_learner import LinearModel, SgdConfig, train_binary
from .data import Dataset, make_rng
from .errors import ConfigurationError, InputError
from .inference import GibbsConfig, gibbs_sample, marginal_map
from .structure import (
    DEFAULT_PATTERN,
    DirectedStructure,
    build_trellis,
    format_structure,
    mutual_information_matrix,
    parse_structure,
    spanning_tree_structure,
)


def _label_config(base: SgdConfig, label: int) -> SgdConfig:
    return replace(base, seed=base.seed + label)


def _member_config(base: SgdConfig, member: int, n_labels: int) -> SgdConfig:
    return replace(base, seed=base.seed + member * n_labels)


def _check_rows(X, n_features):
    X = np.asarray(X, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    if X.shape[1] != n_features:
        raise InputError(f"expected {n_features} features, got {X.shape[1]}")
    return X, single


@dataclass(frozen=True, eq=False)
class StructuredModel:
    """One classifier per label conditioned on its parents in a DAG."""

    structure: DirectedStructure
    classifiers: tuple
    n_features: int

    def __post_init__(self):
        for label, (clf, ps) in enumerate(zip(self.classifiers, self.structure.parents)):
            if clf.d_in != self.n_features + len(ps):
                raise InputError(f"classifier {label} arity does not match its parent count")

    @property
    def parents(self):
        return self.structure.parents

    @property
    def topo_order(self):
        return self.structure.topo_order

    def predict(self, X) -> np.ndarray:
        X, single = _check_rows(X, self.n_features)
        Y = np.zeros((X.shape[0], len(self.classifiers)), dtype=np.uint8)
        for label in self.topo_order:
            pa = list(self.parents[label])
            inp = np.hstack([X, Y[:, pa]]) if pa else X
            Y[:, label] = self.classifiers[label].predict_proba(inp) > 0.5
        return Y[0] if single else Y


@dataclass(frozen=True, eq=False)
class ChainModel:
    """Classifier at chain position ``j`` sees the features and labels ``order[:j]``."""

    order: tuple
    classifiers: tuple
    n_features: int

    def __post_init__(self):
        for j, clf in enumerate(self.classifiers):
            if clf.d_in != self.n_features + j:
                raise InputError(f"chain classifier {j} has arity {clf.d_in}")

    def predict(self, X) -> np.ndarray:
        X, single = _check_rows(X, self.n_features)
        Y = np.zeros((X.shape[0], len(self.order)), dtype=np.uint8)
        for j, label in enumerate(self.order):
            prev = list(self.order[:j])
            inp = np.hstack([X, Y[:, prev]]) if prev else X
            Y[:, label] = self.classifiers[j].predict_proba(inp) > 0.5
        return Y[0] if single else Y


@dataclass(frozen=True, eq=False)
class DependencyModel:
    """Per-label conditionals on a symmetric neighbourhood; predicted by Gibbs sampling."""

    neighbors: tuple
    classifiers: tuple
    n_features: int
    gibbs: GibbsConfig = field(default_factory=GibbsConfig)

    def __post_init__(self):
        for label, ne in enumerate(self.neighbors):
            if label in ne:
                raise InputError(f"label {label} lists itself as a neighbour")
            for other in ne:
                if label not in self.neighbors[other]:
                    raise InputError("neighbour relation is not symmetric")
            if self.classifiers[label].d_in != self.n_features + len(ne):
                raise InputError(f"classifier {label} arity does not match its neighbour count")

    def predict_means(self, X, config: Optional[GibbsConfig] = None) -> np.ndarray:
        return gibbs_sample(self, X, config or self.gibbs)

    def predict(self, X, config: Optional[GibbsConfig] = None) -> np.ndarray:
        return marginal_map(self.predict_means(X, config))


@dataclass(frozen=True, eq=False)
class EnsembleModel:
    members: tuple
    vote_threshold: float = 0.5

    def __post_init__(self):
        if len(self.members) < 1:
            raise ConfigurationError("an ensemble needs at least one member")
        if not 0 < self.vote_threshold < 1:
            raise ConfigurationError("vote_threshold must lie in (0, 1)")

    def predict(self, X) -> np.ndarray:
        votes = np.mean([m.predict(X) for m in self.members], axis=0)
        return (votes > self.vote_threshold).astype(np.uint8)


def _augment(dataset: Dataset, labels: Sequence[int]) -> np.ndarray:
    labels = list(labels)
    if not labels:
        return dataset.features
    return np.hstack([dataset.features, dataset.labels[:, labels].astype(float)])


def train_bcc(dataset: Dataset, structure: DirectedStructure, base: SgdConfig = SgdConfig()) -> StructuredModel:
    if structure.l != dataset.l:
        raise InputError("structure and dataset disagree on the number of labels")
    classifiers = tuple(
        train_binary(_augment(dataset, ps), dataset.labels[:, label], _label_config(base, label))
        for label, ps in enumerate(structure.parents)
    )
    return StructuredModel(structure, classifiers, dataset.d)


def train_ic(dataset: Dataset, base: SgdConfig = SgdConfig()) -> StructuredModel:
    return train_bcc(dataset, DirectedStructure(parents=((),) * dataset.l), base)


def train_cc(dataset: Dataset, order: Optional[Sequence[int]] = None, base: SgdConfig = SgdConfig()) -> ChainModel:
    order = tuple(range(dataset.l)) if order is None else tuple(int(v) for v in order)
    if sorted(order) != list(range(dataset.l)):
        raise ConfigurationError("order must be a permutation of the label indices")
    classifiers = tuple(
        train_binary(_augment(dataset, order[:j]), dataset.labels[:, label], _label_config(base, label))
        for j, label in enumerate(order)
    )
    return ChainModel(order, classifiers, dataset.d)


def predict_cc(model: ChainModel, x) -> np.ndarray:
    return model.predict(x)


def predict_structured(model: StructuredModel, x) -> np.ndarray:
    return model.predict(x)


def predict_vote(ensemble: EnsembleModel, x) -> np.ndarray:
    return ensemble.predict(x)


def _random_orders(n_labels: int, m: int, seed: int):
    rng = make_rng(seed)
    return [tuple(int(v) for v in rng.permutation(n_labels)) for _ in range(m)]


def train_ensemble_cc(dataset: Dataset, m: int = 10, base: SgdConfig = SgdConfig(), seed: int = 0) -> EnsembleModel:
    if m < 1:
        raise ConfigurationError("m must be >= 1")
    members = tuple(
        train_cc(dataset, order, _member_config(base, i, dataset.l))
        for i, order in enumerate(_random_orders(dataset.l, m, seed))
    )
    return EnsembleModel(members)


def exact_match_rate(truth, pred) -> float:
    return float(np.all(np.asarray(truth) == np.asarray(pred), axis=1).mean())


def select_mcc(dataset: Dataset, m: int = 10, base: SgdConfig = SgdConfig(), seed: int = 0) -> ChainModel:
    """Best of ``m`` random chains by training-set exact match (first wins ties)."""
    ensemble = train_ensemble_cc(dataset, m, base, seed)
    scores = [exact_match_rate(dataset.labels, c.predict(dataset.features)) for c in ensemble.members]
    return ensemble.members[int(np.argmax(scores))]


def train_ebcc(dataset: Dataset, m: Optional[int] = None, base: SgdConfig = SgdConfig(), seed: int = 0) -> EnsembleModel:
    """Bayesian chains over the MI maximum spanning tree, each rooted differently."""
    m = min(10, dataset.l) if m is None else m
    if m < 1:
        raise ConfigurationError("m must be >= 1")
    mi = mutual_information_matrix(dataset.labels)
    members = tuple(
        train_bcc(dataset, spanning_tree_structure(mi, seed + i), _member_config(base, i, dataset.l))
        for i in range(m)
    )
    return EnsembleModel(members)


def train_ct(
    dataset: Dataset,
    width: Optional[int] = None,
    pattern: str = DEFAULT_PATTERN,
    base: SgdConfig = SgdConfig(),
    seed: int = 0,
) -> StructuredModel:
    trellis = build_trellis(mutual_information_matrix(dataset.labels), width, pattern, seed)
    return train_bcc(dataset, trellis, base)


def train_ect(
    dataset: Dataset,
    m: int = 10,
    width: Optional[int] = None,
    pattern: str = DEFAULT_PATTERN,
    base: SgdConfig = SgdConfig(),
    seed: int = 0,
) -> EnsembleModel:
    if m < 1:
        raise ConfigurationError("m must be >= 1")
    mi = mutual_information_matrix(dataset.labels)
    members = tuple(
        train_bcc(dataset, build_trellis(mi, width, pattern, seed + i), _member_config(base, i, dataset.l))
        for i in range(m)
    )
    return EnsembleModel(members)


def train_cdt(
    dataset: Dataset,
    width: Optional[int] = None,
    base: SgdConfig = SgdConfig(),
    seed: int = 0,
    gibbs: Optional[GibbsConfig] = None,
) -> DependencyModel:
    """Undirected trellis: each label is conditioned on all its trellis neighbours."""
    trellis = build_trellis(mutual_information_matrix(dataset.labels), width, DEFAULT_PATTERN, seed)
    neighbors = trellis.neighbors()
    classifiers = tuple(
        train_binary(_augment(dataset, ne), dataset.labels[:, label], _label_config(base, label))
        for label, ne in enumerate(neighbors)
    )
    return DependencyModel(neighbors, classifiers, dataset.d, gibbs or GibbsConfig(seed=seed))


def predict_cdt(model: DependencyModel, x, t_total: int = 100, t_burn: int = 10, seed: int = 0) -> np.ndarray:
    return model.predict(x, GibbsConfig(t_total, t_burn, seed))


def save_model_bundle(model, directory) -> None:
    """Write per-label classifier records plus a structure file into ``directory``."""
    root = Path(directory)
    root.mkdir(parents=True, exist_ok=True)
    if isinstance(model, EnsembleModel):
        meta = {"kind": "ensemble", "vote_threshold": model.vote_threshold, "members": len(model.members)}
        for i, member in enumerate(model.members):
            save_model_bundle(member, root / f"member_{i:03d}")
    else:
        meta = {"kind": type(model).__name__, "n_features": model.n_features}
        if isinstance(model, StructuredModel):
            (root / "structure.txt").write_text(format_structure(model.structure))
            meta["topo_order"] = list(model.topo_order)
        elif isinstance(model, ChainModel):
            meta["order"] = list(model.order)
        elif isinstance(model, DependencyModel):
            (root / "structure.txt").write_text(format_structure(DirectedStructure(
                parents=tuple(tuple(p for p in ne if p < c) for c, ne in enumerate(model.neighbors)))))
            meta["gibbs"] = [model.gibbs.t_total, model.gibbs.t_burn, model.gibbs.seed]
        for j, clf in enumerate(model.classifiers):
            (root / f"label_{j:05d}.json").write_text(json.dumps(clf.to_record()))
    (root / "model.json").write_text(json.dumps(meta))


def load_model_bundle(directory):
    root = Path(directory)
    meta = json.loads((root / "model.json").read_text())
    if meta["kind"] == "ensemble":
        members = tuple(load_model_bundle(root / f"member_{i:03d}") for i in range(meta["members"]))
        return EnsembleModel(members, meta["vote_threshold"])
    files = sorted(root.glob("label_*.json"))
    classifiers = tuple(LinearModel.from_record(json.loads(f.read_text())) for f in files)
    if meta["kind"] == "ChainModel":
        return ChainModel(tuple(meta["order"]), classifiers, meta["n_features"])
    structure = parse_structure((root / "structure.txt").read_text())
    if meta["kind"] == "StructuredModel":
        structure = DirectedStructure(structure.parents, tuple(meta["topo_order"]))
        return StructuredModel(structure, classifiers, meta["n_features"])
    if meta["kind"] == "DependencyModel":
        return DependencyModel(structure.neighbors(), classifiers, meta["n_features"], GibbsConfig(*meta["gibbs"]))
    raise InputError(f"unknown model kind {meta['kind']!r}")
