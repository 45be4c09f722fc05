import numpy as np
import pytest

from mlctrellis.data import Dataset, generate_bn_dataset


@pytest.fixture(scope="session")
def easy_bn():
    """Small easy Bayesian-network dataset with its true structure."""
    return generate_bn_dataset(400, 8, 5, 3, alpha=1.0, sigma2=1.0, seed=3)


@pytest.fixture
def copy_label_dataset():
    """Two labels where y2 is an exact copy of y1, plus independent noise labels."""
    rng = np.random.default_rng(11)
    X = rng.standard_normal((300, 4))
    y1 = (X[:, 0] + 0.3 * rng.standard_normal(300) > 0).astype(np.uint8)
    noise = (rng.random((300, 2)) < 0.5).astype(np.uint8)
    Y = np.column_stack([y1, y1, noise])
    return Dataset(X, Y)


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record one acceptance line; call with (label, passed, detail)."""

    def record(label, passed, detail):
        line = f"[{'PASS' if passed else 'FAIL'}] {label}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
