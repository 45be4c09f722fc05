import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from mlctrellis.errors import ConfigurationError, InputError
from mlctrellis.metrics import (
    average_ranks,
    evaluate,
    exact_match,
    hamming_score,
    jaccard_accuracy,
    nemenyi_cd,
)
from oracles import naive_scores


def test_hamming_examples():
    assert hamming_score([[1, 0, 1]], [[1, 0, 1]]) == 1.0
    assert hamming_score([[1, 0, 1]], [[1, 1, 1]]) == pytest.approx(2 / 3)
    assert hamming_score([[1, 0], [0, 1]], [[0, 1], [1, 0]]) == 0.0


def test_exact_match_examples():
    y = np.array([[1, 0], [0, 1]])
    assert exact_match(y, y) == 1.0
    assert exact_match(y, [[1, 0], [0, 0]]) == 0.5
    assert exact_match(y, 1 - y) == 0.0


def test_jaccard_examples():
    assert jaccard_accuracy([[1, 0, 1]], [[1, 1, 0]]) == pytest.approx(1 / 3)
    assert jaccard_accuracy([[1, 0, 1]], [[1, 0, 1]]) == 1.0
    assert jaccard_accuracy([[0, 0, 0]], [[0, 0, 0]]) == 1.0


def test_shape_mismatch():
    with pytest.raises(InputError):
        hamming_score([[1, 0]], [[1, 0, 1]])


pair = st.integers(1, 20).flatmap(
    lambda n: st.integers(1, 15).flatmap(
        lambda l: st.tuples(
            arrays(np.uint8, (n, l), elements=st.integers(0, 1)),
            arrays(np.uint8, (n, l), elements=st.integers(0, 1)),
        )
    )
)


@settings(max_examples=200, deadline=None)
@given(pair)
def test_metrics_match_naive_oracle(yp):
    Y, P = yp
    h, e, j = naive_scores(Y.tolist(), P.tolist())
    assert hamming_score(Y, P) == pytest.approx(h, abs=1e-15)
    assert exact_match(Y, P) == pytest.approx(e, abs=1e-15)
    assert jaccard_accuracy(Y, P) == pytest.approx(j, abs=1e-15)


@settings(max_examples=100, deadline=None)
@given(pair, st.randoms(use_true_random=False))
def test_metric_invariants(yp, rnd):
    Y, P = yp
    r = evaluate(Y, P)
    for v in (r.hamming, r.exact_match, r.jaccard_accuracy):
        assert 0.0 <= v <= 1.0
    assert r.exact_match <= r.jaccard_accuracy + 1e-12
    assert r.exact_match <= r.hamming + 1e-12
    assert hamming_score(Y, Y) == exact_match(Y, Y) == jaccard_accuracy(Y, Y) == 1.0
    perm = list(range(Y.shape[0]))
    rnd.shuffle(perm)
    assert evaluate(Y[perm], P[perm]).jaccard_accuracy == pytest.approx(r.jaccard_accuracy)
    assert evaluate(Y[perm], P[perm]).hamming == pytest.approx(r.hamming)


def test_average_ranks():
    dominant = np.array([[0.9, 0.8, 0.7], [0.5, 0.4, 0.3]])
    assert average_ranks(dominant).tolist() == [1.0, 2.0]
    assert average_ranks(dominant, higher_is_better=False).tolist() == [2.0, 1.0]
    tied = np.array([[0.5, 0.6], [0.5, 0.6]])
    assert average_ranks(tied).tolist() == [1.5, 1.5]
    # three methods, four datasets: ranks by hand
    s = np.array([[3, 1, 2, 2], [2, 2, 3, 1], [1, 3, 1, 3]], dtype=float)
    assert np.allclose(average_ranks(s), [(1 + 3 + 2 + 2) / 4, (2 + 2 + 1 + 3) / 4, (3 + 1 + 3 + 1) / 4])


def test_nemenyi_values():
    assert nemenyi_cd(2, 6, 1.0) == pytest.approx(math.sqrt(6 / 36))
    assert nemenyi_cd(2, 6, 1.0) == pytest.approx(0.4082, abs=1e-4)
    assert nemenyi_cd(7, 8, 2.693) == pytest.approx(2.909, abs=1e-3)
    assert nemenyi_cd(5, 20, 2.0) == pytest.approx(nemenyi_cd(5, 10, 2.0) / math.sqrt(2))


@pytest.mark.parametrize("args", [(1, 5, 2.0), (3, 0, 2.0), (3, 5, 0.0)])
def test_nemenyi_errors(args):
    with pytest.raises(ConfigurationError):
        nemenyi_cd(*args)
