"""Label-dependence structures.

Pairwise mutual information between label columns drives every learner here:
the trellis placement, the frequent-sets (FS) and residual-error (LEAD) graphs,
and the maximum spanning trees used by ensembles of Bayesian chains.
"""
from __future__ import annotations

import graphlib
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numba
import numpy as np

from .base_learner import SgdConfig, train_binary
from .data import Dataset, make_rng
from .errors import ConfigurationError, InputError

# (row offset, column offset) of each parent relative to its child.
PARENT_PATTERNS = {
    "left+above": ((0, -1), (-1, 0)),
    "left+above+upleft": ((0, -1), (-1, -1), (-1, 0)),
    "left+above+diagonals": ((0, -1), (-1, -1), (-1, 0), (-1, 1)),
}
DEFAULT_PATTERN = "left+above"


@dataclass(frozen=True, eq=False)
class MIMatrix:
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise InputError("MI matrix must be square")
        object.__setattr__(self, "values", v)

    @property
    def l(self) -> int:  # noqa: E743
        return self.values.shape[0]


@dataclass(frozen=True)
class DirectedStructure:
    """Parent sets over labels plus a topological order consistent with them."""

    parents: tuple
    topo_order: tuple = None

    def __post_init__(self):
        parents = tuple(tuple(map(int, sorted(ps))) for ps in self.parents)
        L = len(parents)
        sizes = [len(ps) for ps in parents]
        child = np.repeat(np.arange(L), sizes)
        parent = np.fromiter((p for ps in parents for p in ps), dtype=np.int64, count=child.size)
        if child.size:
            if parent.min() < 0 or parent.max() >= L or np.any(parent == child):
                raise InputError("parent index out of range or a self-loop")
            flat = child * L + parent
            if np.unique(flat).size != flat.size:
                raise InputError("a label lists the same parent twice")
        if self.topo_order is None:
            sorter = graphlib.TopologicalSorter({c: ps for c, ps in enumerate(parents)})
            try:
                order = tuple(sorter.static_order())
            except graphlib.CycleError as exc:
                raise InputError(f"structure has a directed cycle: {exc.args[1]}") from None
        else:
            order = tuple(int(v) for v in self.topo_order)
            position = np.full(L, -1, dtype=np.int64)
            position[list(order)] = np.arange(len(order))
            if len(order) != L or np.any(position < 0):
                raise InputError("topo_order is not a permutation of the labels")
            if child.size and np.any(position[parent] >= position[child]):
                raise InputError("topo_order places a label before one of its parents")
        object.__setattr__(self, "parents", parents)
        object.__setattr__(self, "topo_order", order)

    @property
    def l(self) -> int:  # noqa: E743
        return len(self.parents)

    @classmethod
    def _trusted(cls, **fields):
        # skips validation; only for structures that are DAGs by construction
        obj = object.__new__(cls)
        for key, value in fields.items():
            object.__setattr__(obj, key, value)
        return obj

    def edges(self) -> set[frozenset]:
        return {frozenset((c, p)) for c, ps in enumerate(self.parents) for p in ps}

    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        """Undirected neighbour sets obtained by dropping edge directions."""
        ne = [set() for _ in self.parents]
        for c, ps in enumerate(self.parents):
            for p in ps:
                ne[c].add(p)
                ne[p].add(c)
        return tuple(tuple(sorted(s)) for s in ne)


@dataclass(frozen=True)
class TrellisStructure(DirectedStructure):
    """Directed trellis: ``topo_order[i]`` is the label at trellis position ``i``
    (row ``i // width``, column ``i % width``)."""

    width: int = 1
    pattern: str = DEFAULT_PATTERN

    @property
    def order(self) -> tuple[int, ...]:
        return self.topo_order

    def grid(self) -> list[list[int]]:
        o = self.topo_order
        return [list(o[i:i + self.width]) for i in range(0, len(o), self.width)]


def mutual_information_matrix(labels) -> MIMatrix:
    """Plug-in pairwise MI (nats) of binary columns, with 0 ln 0 = 0 and zero diagonal."""
    Y = np.asarray(labels, dtype=float)
    if Y.ndim != 2 or Y.shape[0] < 1:
        raise InputError("labels must be an N x L matrix with N >= 1")
    n = Y.shape[0]
    p1 = Y.mean(axis=0)
    p0 = 1.0 - p1
    p11 = (Y.T @ Y) / n
    p10 = p1[:, None] - p11
    p01 = p1[None, :] - p11
    p00 = 1.0 - p11 - p10 - p01
    mi = np.zeros_like(p11)
    for joint, a, b in ((p11, p1, p1), (p10, p1, p0), (p01, p0, p1), (p00, p0, p0)):
        denom = np.outer(a, b)
        mask = joint > 1e-15
        mi[mask] += joint[mask] * np.log(joint[mask] / denom[mask])
    mi = 0.5 * (mi + mi.T)
    np.maximum(mi, 0.0, out=mi)
    np.fill_diagonal(mi, 0.0)
    return MIMatrix(mi)


def trellis_parent_positions(n_labels: int, width: int, pattern: str = DEFAULT_PATTERN) -> np.ndarray:
    """(L, P) table of parent trellis positions per position, -1 where the
    pattern reaches past the border. Valid entries come first in each row."""
    if pattern not in PARENT_PATTERNS:
        raise ConfigurationError(
            f"unknown parent pattern {pattern!r}; choose from {sorted(PARENT_PATTERNS)}"
        )
    offsets = PARENT_PATTERNS[pattern]
    pos = np.arange(n_labels)
    r, c = pos // width, pos % width
    table = np.full((n_labels, len(offsets)), -1, dtype=np.int64)
    for q, (dr, dc) in enumerate(offsets):
        rr, cc = r + dr, c + dc
        ok = (rr >= 0) & (cc >= 0) & (cc < width)
        table[ok, q] = (rr * width + cc)[ok]
    # push the -1 entries to the end of each row
    return -np.sort(-table, axis=1)


@numba.njit(cache=True)
def _hill_climb(mi, perm, parent_pos):
    L = perm.shape[0]
    order = np.empty(L, dtype=np.int64)
    placed = np.zeros(L, dtype=np.bool_)
    order[0] = perm[0]
    placed[perm[0]] = True
    for pos in range(1, L):
        best = -1
        best_score = -np.inf
        for idx in range(L):
            k = perm[idx]
            if placed[k]:
                continue
            s = 0.0
            for q in range(parent_pos.shape[1]):
                pp = parent_pos[pos, q]
                if pp < 0:
                    break
                s += mi[order[pp], k]
            if s > best_score:
                best = k
                best_score = s
        order[pos] = best
        placed[best] = True
    return order


def default_width(n_labels: int) -> int:
    return max(1, math.ceil(math.sqrt(n_labels)))


def build_trellis(
    mi, width: Optional[int] = None, pattern: str = DEFAULT_PATTERN, seed: int = 0
) -> TrellisStructure:
    """Place labels into a fixed trellis by greedy mutual-information hill climbing.

    The first trellis position takes the first label of a seeded shuffle; each
    later position takes the unplaced label whose summed MI with the labels
    already sitting at that position's parent slots is largest. Ties go to the
    label that comes first in the shuffle. Cost is O(L^2).
    """
    values = mi.values if isinstance(mi, MIMatrix) else np.asarray(mi)
    L = values.shape[0]
    if width is None:
        width = default_width(L)
    if width < 1 or width > L:
        raise ConfigurationError(f"need 1 <= width <= L, got width={width}, L={L}")
    table = trellis_parent_positions(L, width, pattern)
    perm = make_rng(seed).permutation(L).astype(np.int64)
    order = _hill_climb(np.ascontiguousarray(values), perm, table)
    labels_at = np.sort(np.where(table >= 0, order[np.maximum(table, 0)], -1), axis=1)
    n_par = (table >= 0).sum(axis=1)
    P = table.shape[1]
    by_pos = [tuple(row[P - k:]) for row, k in zip(labels_at.tolist(), n_par.tolist())]
    position = np.empty(L, dtype=np.int64)
    position[order] = np.arange(L)
    parents = tuple(by_pos[i] for i in position.tolist())
    # every parent sits at an earlier trellis position, so the order is topological
    return TrellisStructure._trusted(
        parents=parents, topo_order=tuple(order.tolist()), width=width, pattern=pattern
    )


def _top_predecessor_parents(mi: np.ndarray, ordering: Sequence[int], max_parents: int, threshold: float):
    L = mi.shape[0]
    parents = [()] * L
    for i, child in enumerate(ordering):
        preds = [p for p in ordering[:i] if mi[child, p] > threshold]
        # highest MI first, lowest label index on ties
        preds.sort(key=lambda p: (-mi[child, p], p))
        parents[child] = tuple(preds[:max_parents])
    return DirectedStructure(parents=tuple(parents), topo_order=tuple(ordering))


def fs_structure(labels, max_parents: int = 2, threshold: float = 0.0, seed: int = 0) -> DirectedStructure:
    """Frequent-sets style graph: under a seeded random ordering each label takes
    its ``max_parents`` highest-MI predecessors whose MI exceeds ``threshold``."""
    if max_parents < 1:
        raise ConfigurationError("max_parents must be >= 1")
    if threshold < 0:
        raise ConfigurationError("threshold must be nonnegative")
    mi = mutual_information_matrix(labels).values
    ordering = [int(v) for v in make_rng(seed).permutation(mi.shape[0])]
    return _top_predecessor_parents(mi, ordering, max_parents, threshold)


def residual_errors(dataset: Dataset, base: SgdConfig = SgdConfig()) -> np.ndarray:
    """N x L indicator of training-set mistakes made by independent classifiers."""
    errors = np.zeros(dataset.labels.shape, dtype=np.uint8)
    for j in range(dataset.l):
        cfg = SgdConfig(base.epochs, base.learning_rate, base.l2, base.seed + j)
        model = train_binary(dataset.features, dataset.labels[:, j], cfg)
        pred = model.predict_proba(dataset.features) > 0.5
        errors[:, j] = pred != dataset.labels[:, j].astype(bool)
    return errors


def lead_structure(
    dataset: Dataset,
    base: SgdConfig = SgdConfig(),
    max_parents: int = 2,
    threshold: float = 0.0,
    seed: int = 0,
) -> DirectedStructure:
    """FS edge rule applied to the residual-error matrix of independent classifiers."""
    return fs_structure(residual_errors(dataset, base), max_parents, threshold, seed)


def spanning_tree_structure(mi, seed: int = 0) -> DirectedStructure:
    """Maximum-weight spanning tree over MI, rooted at a seeded random label.

    Kruskal over edges sorted by decreasing weight, ties by lowest (i, j).
    """
    values = mi.values if isinstance(mi, MIMatrix) else np.asarray(mi)
    L = values.shape[0]
    if L < 1:
        raise InputError("need at least one label")
    iu, ju = np.triu_indices(L, k=1)
    w = values[iu, ju]
    idx = np.lexsort((ju, iu, -w))
    root_of = list(range(L))

    def find(a):
        while root_of[a] != a:
            root_of[a] = root_of[root_of[a]]
            a = root_of[a]
        return a

    adj = [[] for _ in range(L)]
    n_edges = 0
    for e in idx:
        if n_edges == L - 1:
            break
        a, b = int(iu[e]), int(ju[e])
        ra, rb = find(a), find(b)
        if ra != rb:
            root_of[ra] = rb
            adj[a].append(b)
            adj[b].append(a)
            n_edges += 1
    root = int(make_rng(seed).integers(L))
    parents = [()] * L
    order = [root]
    seen = {root}
    head = 0
    while head < len(order):
        u = order[head]
        head += 1
        for v in sorted(adj[u]):
            if v not in seen:
                seen.add(v)
                parents[v] = (u,)
                order.append(v)
    return DirectedStructure(parents=tuple(parents), topo_order=tuple(order))


def _edge_set(structure) -> set[frozenset]:
    if hasattr(structure, "edges"):
        return set(structure.edges())
    return {frozenset((c, p)) for c, ps in enumerate(structure) for p in ps}


def edge_f_measure(predicted, truth) -> float:
    """F-measure between undirected edge sets (1.0 when both are empty)."""
    if len(predicted.parents) != len(truth.parents):
        raise InputError("structures cover different numbers of labels")
    pe, te = _edge_set(predicted), _edge_set(truth)
    if not pe and not te:
        return 1.0
    hits = len(pe & te)
    if hits == 0:
        return 0.0
    precision, recall = hits / len(pe), hits / len(te)
    return 2 * precision * recall / (precision + recall)


def format_structure(structure) -> str:
    """Adjacency-list text: one ``child: parent,parent`` line per label."""
    return "".join(f"{c}: {','.join(str(p) for p in ps)}\n" for c, ps in enumerate(structure.parents))


def parse_structure(text: str) -> DirectedStructure:
    entries = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        child, sep, rest = line.partition(":")
        if not sep:
            raise InputError(f"line {lineno}: expected 'child: parents'")
        try:
            ps = tuple(int(v) for v in rest.split(",") if v.strip())
            entries[int(child)] = ps
        except ValueError:
            raise InputError(f"line {lineno}: non-integer label index") from None
    L = len(entries)
    if sorted(entries) != list(range(L)):
        raise InputError("structure must list every label 0..L-1 exactly once")
    return DirectedStructure(parents=tuple(entries[c] for c in range(L)))


def is_acyclic(parents: Iterable[Sequence[int]]) -> bool:
    try:
        tuple(graphlib.TopologicalSorter({c: tuple(ps) for c, ps in enumerate(parents)}).static_order())
    except graphlib.CycleError:
        return False
    return True
