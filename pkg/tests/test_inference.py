import numpy as np
import pytest
from scipy.special import expit, logit

from mlctrellis.base_learner import LinearModel
from mlctrellis.errors import ConfigurationError
from mlctrellis.inference import GibbsConfig, SampleBatch, ancestral_sample, gibbs_sample, marginal_map
from mlctrellis.models import DependencyModel, StructuredModel
from mlctrellis.structure import DirectedStructure


def lm(bias, *label_weights):
    # one feature column (always fed 0) followed by the parent label weights
    return LinearModel([0.0, *label_weights], bias)


def chain(p0, p1_given0, p1_given1):
    s = DirectedStructure(parents=((), (0,)))
    c1 = lm(logit(p1_given0), logit(p1_given1) - logit(p1_given0))
    return StructuredModel(s, (lm(logit(p0)), c1), 1)


def pair_dependency(a0, b0, a1, b1):
    return DependencyModel(((1,), (0,)), (lm(a0, b0), lm(a1, b1)), 1)


def stationary_marginals(a0, b0, a1, b1):
    """Marginals of the stationary law of the random-scan sweep chain on {0,1}^2."""
    states = [(0, 0), (0, 1), (1, 0), (1, 1)]
    idx = {s: i for i, s in enumerate(states)}

    def update(j, a, b):
        K = np.zeros((4, 4))
        for s in states:
            p = expit(a + b * s[1 - j])
            for v, pv in ((1, p), (0, 1 - p)):
                t = list(s)
                t[j] = v
                K[idx[s], idx[tuple(t)]] += pv
        return K

    K0, K1 = update(0, a0, b0), update(1, a1, b1)
    K = 0.5 * (K0 @ K1 + K1 @ K0)
    vals, vecs = np.linalg.eig(K.T)
    pi = np.real(vecs[:, np.argmin(np.abs(vals - 1))])
    pi /= pi.sum()
    return np.array([pi[2] + pi[3], pi[1] + pi[3]])


def test_ancestral_forced_assignment():
    model = chain(1 - 1e-12, 1e-12, 1 - 1e-12)
    batch = ancestral_sample(model, [0.0], 500, seed=1)
    assert isinstance(batch, SampleBatch) and batch.count == 500
    assert np.all(batch.samples == 1)


def test_ancestral_single_label_rate():
    model = StructuredModel(DirectedStructure(parents=((),)), (lm(logit(0.3)),), 1)
    assert abs(ancestral_sample(model, [0.0], 10_000, seed=3).mean()[0] - 0.3) <= 0.03


def test_ancestral_joint_matches_product_form():
    p0, q0, q1 = 0.3, 0.2, 0.8
    n = 40_000
    S = ancestral_sample(chain(p0, q0, q1), [0.0], n, seed=5).samples
    joint = {
        (0, 0): (1 - p0) * (1 - q0), (0, 1): (1 - p0) * q0,
        (1, 0): p0 * (1 - q1), (1, 1): p0 * q1,
    }
    for (a, b), p in joint.items():
        emp = np.mean((S[:, 0] == a) & (S[:, 1] == b))
        assert abs(emp - p) <= 3 * np.sqrt(p * (1 - p) / n)


def test_ancestral_deterministic():
    m = chain(0.4, 0.3, 0.6)
    assert np.array_equal(ancestral_sample(m, [0.0], 100, 9).samples, ancestral_sample(m, [0.0], 100, 9).samples)


def test_gibbs_single_label():
    model = DependencyModel(((),), (LinearModel([0.0], logit(0.8)),), 1)
    assert gibbs_sample(model, [0.0], GibbsConfig(2000, 100, seed=4))[0] == pytest.approx(0.8, abs=0.05)


def test_gibbs_absorbing_state():
    model = pair_dependency(40.0, 0.0, 40.0, 0.0)
    assert gibbs_sample(model, [0.0], GibbsConfig(50, 0, seed=0)).tolist() == [1.0, 1.0]


def test_gibbs_matches_stationary_oracle():
    params = (-0.4, 1.5, 0.3, -1.2)
    means = gibbs_sample(pair_dependency(*params), [0.0], GibbsConfig(20_000, 200, seed=7))
    assert np.allclose(means, stationary_marginals(*params), atol=0.02)


def test_gibbs_retained_sample_count():
    model = pair_dependency(0.1, 0.5, -0.2, 0.7)
    T, Tc = 37, 12
    means = gibbs_sample(model, np.zeros((6, 1)), GibbsConfig(T, Tc, seed=1))
    counts = means * (T - Tc)
    assert np.allclose(counts, np.round(counts))
    assert np.all((means >= 0) & (means <= 1))


def test_gibbs_deterministic_and_batched():
    model = pair_dependency(0.1, 0.5, -0.2, 0.7)
    cfg = GibbsConfig(60, 5, seed=11)
    a = gibbs_sample(model, np.zeros((3, 1)), cfg)
    assert np.array_equal(a, gibbs_sample(model, np.zeros((3, 1)), cfg))
    assert a.shape == (3, 2)


def test_gibbs_config_invariant():
    with pytest.raises(ConfigurationError):
        GibbsConfig(10, 10)
    with pytest.raises(ConfigurationError):
        GibbsConfig(10, -1)


def test_marginal_map_rules():
    assert marginal_map([0.5]).tolist() == [0]
    assert marginal_map([0.9, 0.1]).tolist() == [1, 0]
    bits = np.array([[0, 1], [1, 1]])
    assert np.array_equal(marginal_map(marginal_map(bits)), bits)
