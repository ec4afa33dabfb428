import numpy as np
import pytest

from autotune.data import Dataset


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_binary(n=60, p=3, seed=0, shift=1.5):
    r = np.random.default_rng(seed)
    y = np.arange(n) % 2
    X = r.normal(size=(n, p))
    X[:, 0] += shift * (2 * y - 1)
    return Dataset(X, y.astype(float), "binary")


def make_regression(n=80, p=3, seed=0, noise=0.3):
    r = np.random.default_rng(seed)
    X = r.normal(size=(n, p))
    y = 2.0 * X[:, 0] - X[:, 1] + noise * r.normal(size=n)
    return Dataset(X, y, "continuous")


XOR = Dataset(np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]]),
              np.array([0.0, 0.0, 1.0, 1.0]), "binary")


@pytest.fixture
def binary_data():
    return make_binary()


@pytest.fixture
def regression_data():
    return make_regression()


@pytest.fixture
def xor():
    return XOR


# criterion number -> one-line verdict, filled in by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
