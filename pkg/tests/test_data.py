import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import norm

from mlctrellis.data import (
    Dataset,
    generate_bn_dataset,
    kfold_split,
    label_cardinality,
    load_dataset,
    make_rng,
    save_dataset,
)
from mlctrellis.errors import ConfigurationError, DatasetParseError, InputError


def write(tmp_path, text, name="d.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_load_single_row(tmp_path):
    ds = load_dataset(write(tmp_path, "y1,y2,x1\n1,0,0.5\n"), 2)
    assert (ds.n, ds.l, ds.d) == (1, 2, 1)
    assert ds.labels.tolist() == [[1, 0]]
    assert ds.features.tolist() == [[0.5]]
    assert ds.label_names == ("y1", "y2") and ds.feature_names == ("x1",)


def test_load_empty_data_section(tmp_path):
    with pytest.raises(DatasetParseError, match="no instances"):
        load_dataset(write(tmp_path, "y1,y2,x1\n"), 2)


def test_load_non_binary_label_names_line(tmp_path):
    with pytest.raises(DatasetParseError) as info:
        load_dataset(write(tmp_path, "y1,y2,x1\n1,0,0.1\n1,2,0.5\n"), 2)
    assert info.value.line == 3
    assert "line 3" in str(info.value)


@pytest.mark.parametrize("row", ["1,0", "1,0,0.5,7", "1,0,abc"])
def test_load_malformed_rows(tmp_path, row):
    with pytest.raises(DatasetParseError) as info:
        load_dataset(write(tmp_path, f"y1,y2,x1\n{row}\n"), 2)
    assert info.value.line == 2


def test_label_count_covers_all_columns(tmp_path):
    with pytest.raises(ConfigurationError):
        load_dataset(write(tmp_path, "y1,y2\n1,0\n"), 2)


def test_save_minimal_dataset(tmp_path):
    ds = Dataset(np.array([[0.25]]), np.array([[1]]))
    path = tmp_path / "one.csv"
    save_dataset(ds, path)
    assert path.read_text().splitlines() == ["y1,x1", "1,0.25"]


def test_dataset_rejects_zero_rows():
    with pytest.raises(InputError):
        Dataset(np.zeros((0, 2)), np.zeros((0, 1)))


def test_dataset_rejects_non_binary_labels():
    with pytest.raises(InputError):
        Dataset(np.zeros((2, 1)), np.array([[0], [2]]))


@settings(max_examples=30, deadline=None)
@given(
    n=st.integers(1, 12),
    d=st.integers(1, 4),
    l=st.integers(1, 5),
    seed=st.integers(0, 2**32 - 1),
)
def test_save_load_round_trip(tmp_path_factory, n, d, l, seed):
    rng = make_rng(seed)
    ds = Dataset(rng.standard_normal((n, d)) * 1e3, rng.integers(0, 2, (n, l)))
    path = tmp_path_factory.mktemp("rt") / "ds.csv"
    save_dataset(ds, path)
    back = load_dataset(path, l)
    assert np.array_equal(back.labels, ds.labels)
    assert np.array_equal(back.features, ds.features)
    assert back.label_names == ds.label_names


def test_generated_round_trip(tmp_path, easy_bn):
    ds, _ = easy_bn
    save_dataset(ds, tmp_path / "bn.csv")
    assert np.array_equal(load_dataset(tmp_path / "bn.csv", ds.l).labels, ds.labels)


def test_kfold_even_split():
    plan = kfold_split(10, 5, seed=0)
    assert [plan.test_indices(f).size for f in range(5)] == [2] * 5


def test_kfold_uneven_split():
    plan = kfold_split(7, 5, seed=4)
    assert sorted(plan.test_indices(f).size for f in range(5)) == [1, 1, 1, 2, 2]


def test_kfold_deterministic():
    assert np.array_equal(kfold_split(50, 3, 9).assignments, kfold_split(50, 3, 9).assignments)


@pytest.mark.parametrize("n,k", [(4, 5), (10, 1), (3, 0)])
def test_kfold_bad_k(n, k):
    with pytest.raises(ConfigurationError):
        kfold_split(n, k)


@settings(max_examples=50, deadline=None)
@given(n=st.integers(2, 200), data=st.data())
def test_kfold_partitions(n, data):
    k = data.draw(st.integers(2, n))
    plan = kfold_split(n, k, data.draw(st.integers(0, 1000)))
    tests = [plan.test_indices(f) for f in range(k)]
    assert np.array_equal(np.sort(np.concatenate(tests)), np.arange(n))
    sizes = [t.size for t in tests]
    assert max(sizes) - min(sizes) <= 1
    for f in range(k):
        assert np.intersect1d(plan.train_indices(f), tests[f]).size == 0
        assert plan.train_indices(f).size + tests[f].size == n


def test_generator_symmetric_at_alpha_zero():
    ds, _ = generate_bn_dataset(10_000, 10, 4, 3, alpha=0.0, sigma2=1.0, delta=0.0, seed=1)
    assert np.all(np.abs(ds.labels.mean(axis=0) - 0.5) <= 0.02)


@pytest.mark.parametrize("delta,sigma2", [(0.5, 1.0), (-0.8, 2.0), (1.0, 0.5)])
def test_generator_root_rate_matches_tail_probability(delta, sigma2):
    n = 20_000
    ds, truth = generate_bn_dataset(n, 6, 6, 4, alpha=1.0, sigma2=sigma2, delta=delta, seed=2)
    q = norm.sf(delta / math.sqrt(1.0 + sigma2))
    se = math.sqrt(q * (1 - q) / n)
    roots = [j for j, p in enumerate(truth.parent) if p is None]
    assert roots
    for j in roots:
        assert abs(ds.labels[:, j].mean() - q) <= 3 * se


def _agreement(ds, truth):
    pairs = [(c, p) for c, p in enumerate(truth.parent) if p is not None]
    return np.mean([(ds.labels[:, c] == ds.labels[:, p]).mean() for c, p in pairs])


def test_generator_easy_setting_couples_parent_and_child():
    easy = generate_bn_dataset(10_000, 20, 6, 5, alpha=1.0, sigma2=1.0, seed=5)
    flat = generate_bn_dataset(10_000, 20, 6, 5, alpha=0.0, sigma2=1.0, seed=5)
    assert easy[1].parent == flat[1].parent
    assert any(p is not None for p in easy[1].parent)
    assert _agreement(*easy) > _agreement(*flat) + 0.05


def test_generator_single_label_has_no_edges():
    _, truth = generate_bn_dataset(50, 3, 1, 2)
    assert truth.edges() == set()


def test_generator_weight_rows_have_t_ones():
    _, truth = generate_bn_dataset(10, 12, 5, 4, seed=8)
    assert truth.weights.sum(axis=1).tolist() == [4] * 5
    for c, p in enumerate(truth.parent):
        assert p is None or 0 <= p < c


def test_generator_reproducible():
    a, ta = generate_bn_dataset(100, 5, 4, 2, seed=13)
    b, tb = generate_bn_dataset(100, 5, 4, 2, seed=13)
    assert np.array_equal(a.features, b.features) and np.array_equal(a.labels, b.labels)
    assert ta.parent == tb.parent


def test_generator_t_above_d():
    with pytest.raises(ConfigurationError):
        generate_bn_dataset(10, 3, 2, 4)


def test_label_cardinality_examples():
    x = np.zeros((2, 1))
    assert label_cardinality(Dataset(x, [[1, 0], [1, 1]])) == 1.5
    assert label_cardinality(Dataset(x, np.zeros((2, 6)))) == 0.0
    assert label_cardinality(Dataset(x, np.ones((2, 6)))) == 6.0
