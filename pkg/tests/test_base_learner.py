import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mlctrellis.base_learner import (
    LinearModel,
    SgdConfig,
    logistic_gradient,
    logistic_loss,
    predict_proba,
    sigmoid,
    train_binary,
)
from mlctrellis.data import make_rng
from mlctrellis.errors import ConfigurationError, InputError


def test_constant_negative_targets():
    X = make_rng(0).standard_normal((40, 3))
    model = train_binary(X, np.zeros(40), SgdConfig(seed=1))
    assert np.all(model.predict_proba(X) < 0.5)


def test_separable_one_dimensional():
    X = np.array([[-1.0]] * 50 + [[1.0]] * 50)
    y = np.array([0] * 50 + [1] * 50)
    model = train_binary(X, y, SgdConfig(epochs=100))
    assert np.mean((model.predict_proba(X) > 0.5) == y) == 1.0


def test_training_is_deterministic():
    rng = make_rng(3)
    X, y = rng.standard_normal((60, 4)), rng.integers(0, 2, 60)
    assert train_binary(X, y, SgdConfig(seed=5)) == train_binary(X, y, SgdConfig(seed=5))


def test_predict_proba_examples():
    assert predict_proba(LinearModel(np.zeros(3), 0.0), [4.0, -1.0, 2.0]) == 0.5
    assert predict_proba(LinearModel([1.0], 0.0), [0.0]) == 0.5
    assert predict_proba(LinearModel([1.0], 0.0), [math.log(3.0)]) == pytest.approx(0.75, abs=1e-15)


def test_predict_proba_dimension_mismatch():
    with pytest.raises(InputError):
        predict_proba(LinearModel([1.0, 2.0], 0.0), [1.0])


def test_non_finite_feature_rejected():
    with pytest.raises(InputError):
        train_binary(np.array([[1.0], [np.nan]]), np.array([0, 1]))


def test_non_binary_targets_rejected():
    with pytest.raises(InputError):
        train_binary(np.ones((2, 1)), np.array([0, 2]))


def test_config_validation():
    with pytest.raises(ConfigurationError):
        SgdConfig(epochs=0)
    with pytest.raises(ConfigurationError):
        SgdConfig(learning_rate=0.0)


@pytest.mark.parametrize("seed", range(10))
def test_gradient_matches_central_difference(seed):
    rng = make_rng(seed)
    n, d = int(rng.integers(1, 8)), int(rng.integers(1, 5))
    X, y = rng.standard_normal((n, d)), rng.integers(0, 2, n)
    w, b, l2 = rng.standard_normal(d), float(rng.standard_normal()), 0.1
    gw, gb = logistic_gradient(w, b, X, y, l2)
    h = 1e-6
    fd = np.empty(d + 1)
    for k in range(d):
        e = np.zeros(d)
        e[k] = h
        fd[k] = (logistic_loss(w + e, b, X, y, l2) - logistic_loss(w - e, b, X, y, l2)) / (2 * h)
    fd[d] = (logistic_loss(w, b + h, X, y, l2) - logistic_loss(w, b - h, X, y, l2)) / (2 * h)
    analytic = np.append(gw, gb)
    assert np.linalg.norm(analytic - fd) <= 1e-4 * max(1.0, np.linalg.norm(fd))


@pytest.mark.parametrize("seed", range(5))
def test_single_sgd_step_follows_negative_gradient(seed):
    rng = make_rng(seed)
    x, y = rng.standard_normal((1, 3)), rng.integers(0, 2, 1)
    lr = 0.05
    model = train_binary(x, y, SgdConfig(epochs=1, learning_rate=lr, l2=0.3))
    gw, gb = logistic_gradient(np.zeros(3), 0.0, x, y, 0.3)
    assert np.allclose(model.weights, -lr * gw, rtol=1e-12, atol=1e-15)
    assert model.bias == pytest.approx(-lr * gb, rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(
    w=st.lists(st.floats(-5, 5), min_size=1, max_size=4),
    base=st.lists(st.floats(-5, 5), min_size=4, max_size=4),
    k=st.integers(0, 3),
    step=st.floats(0, 10),
)
def test_monotone_in_positive_weight_feature(w, base, k, step):
    w = np.array(w)
    k = k % w.size
    w[k] = abs(w[k])
    x = np.array(base[: w.size])
    model = LinearModel(w, 0.3)
    x2 = x.copy()
    x2[k] += step
    assert predict_proba(model, x2) >= predict_proba(model, x)


@settings(max_examples=100, deadline=None)
@given(z=st.floats(-1e6, 1e6))
def test_sigmoid_strictly_inside_unit_interval(z):
    p = sigmoid(z)
    assert 0.0 < p < 1.0


def test_record_round_trip():
    m = LinearModel([0.1, -2.5], 0.75)
    assert LinearModel.from_record(m.to_record()) == m
    with pytest.raises(InputError):
        LinearModel([np.inf], 0.0)
