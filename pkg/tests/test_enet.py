import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize

from autotune.data import Dataset
from autotune.learners import (EnetConfig, EnetModel, enet_fit, enet_path, lambda_max, predict,
                               soft_threshold)
from autotune.learners.enet import sweep_objectives
from conftest import make_binary, make_regression


def orthonormal_design(n=40, p=4, seed=0):
    """Centred columns with Z'Z / n = I, so standardisation leaves them unchanged."""
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(n, p))
    A -= A.mean(axis=0)
    Q, _ = np.linalg.qr(A)
    return Q * np.sqrt(n)


def standardized(d):
    mean, scale = d.features.mean(0), d.features.std(0)
    return (d.features - mean) / scale


@pytest.mark.parametrize("z,g,out", [(3, 1, 2), (-0.5, 1, 0), (1.7, 0, 1.7), (-4, 1.5, -2.5)])
def test_soft_threshold_examples(z, g, out):
    assert soft_threshold(z, g) == pytest.approx(out)


def test_soft_threshold_negative_threshold():
    with pytest.raises(ValueError):
        soft_threshold(1.0, -0.1)


@pytest.mark.parametrize("alpha", [0.0, 0.5, 1.0])
def test_lambda_zero_is_ols(alpha):
    d = make_regression(n=50, p=4, seed=1)
    m = enet_fit(d, EnetConfig(alpha=alpha, lam=0.0))
    A = np.hstack([np.ones((d.n, 1)), d.features])
    coef, *_ = np.linalg.lstsq(A, d.response, rcond=None)
    np.testing.assert_allclose(m.coefficients, coef[1:], atol=1e-6)
    assert m.intercept == pytest.approx(coef[0], abs=1e-6)


@pytest.mark.parametrize("alpha", [0.1, 0.5, 1.0])
def test_lambda_max_zeroes_everything(alpha):
    d = make_regression(n=60, p=5, seed=2)
    top = lambda_max(d, alpha)
    for lam in (top, 2 * top):
        m = enet_fit(d, EnetConfig(alpha=alpha, lam=lam))
        assert np.all(m.coefficients == 0.0)
        assert m.intercept == pytest.approx(d.response.mean(), rel=1e-12)
        np.testing.assert_allclose(m.predict(d.features[:7]), d.response.mean())
    # just below the threshold one coefficient comes alive
    m = enet_fit(d, EnetConfig(alpha=alpha, lam=0.99 * top))
    assert np.count_nonzero(m.coefficients) >= 1


@pytest.mark.parametrize("lam", [0.0, 0.05, 0.3, 1.0])
def test_orthonormal_lasso_is_soft_threshold(lam):
    Z = orthonormal_design()
    rng = np.random.default_rng(5)
    y = Z @ np.array([1.0, -0.5, 0.2, 0.0]) + 0.3 * rng.normal(size=Z.shape[0]) + 2.0
    d = Dataset(Z, y, "continuous")
    m = enet_fit(d, EnetConfig(alpha=1.0, lam=lam))
    ols = Z.T @ (y - y.mean()) / Z.shape[0]
    expected = [soft_threshold(b, lam) for b in ols]
    np.testing.assert_allclose(m.coefficients, expected, atol=1e-6)


@pytest.mark.parametrize("alpha,lam", [(0.3, 0.05), (1.0, 0.02), (0.0, 0.5)])
def test_sweep_objective_non_increasing(alpha, lam):
    d = make_regression(n=80, p=6, seed=3)
    hist = sweep_objectives(d, EnetConfig(alpha=alpha, lam=lam))
    assert hist.size >= 1
    assert np.all(np.diff(hist) <= 1e-12 * np.abs(hist[:-1]) + 1e-15)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), alpha=st.floats(0.0, 1.0), frac=st.floats(0.001, 0.9))
def test_subgradient_optimality(seed, alpha, frac):
    d = make_regression(n=50, p=4, seed=seed, noise=0.5)
    lam = frac * lambda_max(d, max(alpha, 0.05))
    m = enet_fit(d, EnetConfig(alpha=alpha, lam=lam))
    Z = standardized(d)
    beta = m.std_coefficients
    r = d.response - d.response.mean() - (Z @ beta - (Z @ beta).mean())
    grad = -Z.T @ r / d.n + lam * (1 - alpha) * beta
    for j in range(d.p):
        if beta[j] != 0.0:
            assert abs(grad[j] + lam * alpha * np.sign(beta[j])) <= 1e-6
        else:
            assert abs(grad[j]) <= lam * alpha + 1e-6


def test_ridge_norm_shrinks_with_lambda():
    d = make_regression(n=60, p=5, seed=4)
    lams = np.logspace(-3, 2, 12)
    norms = [np.linalg.norm(enet_fit(d, EnetConfig(0.0, lam)).std_coefficients) for lam in lams]
    assert np.all(np.diff(norms) < 0)


def test_lasso_support_shrinks_along_path():
    Z = orthonormal_design(n=50, p=6, seed=2)
    y = Z @ np.array([2.0, -1.5, 1.0, 0.5, -0.25, 0.1]) + np.random.default_rng(1).normal(size=50)
    d = Dataset(Z, y, "continuous")
    lams = np.logspace(np.log10(lambda_max(d, 1.0)), -3, 40)
    counts = [np.count_nonzero(m.coefficients) for m in enet_path(d, 1.0, lams)]
    assert counts[0] == 0
    assert np.all(np.diff(counts) >= 0)  # lambda decreasing, so support grows
    assert counts[-1] == 6


def test_path_matches_cold_fits():
    d = make_regression(n=60, p=4, seed=6)
    lams = np.logspace(np.log10(lambda_max(d, 0.5)), -2, 8)
    for lam, warm in zip(lams, enet_path(d, 0.5, lams)):
        cold = enet_fit(d, EnetConfig(0.5, lam))
        np.testing.assert_allclose(warm.coefficients, cold.coefficients, atol=1e-6)


def test_binary_matches_generic_optimizer():
    d = make_binary(n=120, p=3, seed=3, shift=1.0)
    alpha, lam = 0.0, 0.02
    m = enet_fit(d, EnetConfig(alpha, lam))
    Z = standardized(d)
    y = d.response

    def objective(theta):
        eta = theta[0] + Z @ theta[1:]
        return np.mean(np.logaddexp(0, eta) - y * eta) + 0.5 * lam * theta[1:] @ theta[1:]

    res = minimize(objective, np.zeros(d.p + 1), method="BFGS", options={"gtol": 1e-10})
    np.testing.assert_allclose(m.std_coefficients, res.x[1:], atol=1e-5)
    assert m.converged
    labels, prob = predict(m, d.features)
    assert ((prob > 0.5) == (labels == 1)).all()


def test_binary_lasso_lambda_max_gives_base_rate():
    d = make_binary(n=80, seed=1)
    m = enet_fit(d, EnetConfig(1.0, lambda_max(d, 1.0) * 1.01))
    assert np.all(m.coefficients == 0)
    np.testing.assert_allclose(m.predict_proba(d.features), d.response.mean(), rtol=1e-9)


def test_json_round_trip():
    d = make_regression(seed=7)
    m = enet_fit(d, EnetConfig(0.4, 0.01))
    back = EnetModel.from_dict(m.to_dict())
    np.testing.assert_array_equal(back.coefficients, m.coefficients)
    np.testing.assert_array_equal(back.predict(d.features), m.predict(d.features))
    assert (back.alpha, back.lam) == (0.4, 0.01)


def test_config_validation():
    with pytest.raises(ValueError):
        EnetConfig(alpha=1.5)
    with pytest.raises(ValueError):
        EnetConfig(lam=-1)


@pytest.mark.parametrize("use_numba", [True, False])
def test_backends_agree(use_numba):
    d = make_regression(n=70, p=5, seed=8)
    ref = enet_fit(d, EnetConfig(0.7, 0.03), use_numba=True)
    m = enet_fit(d, EnetConfig(0.7, 0.03), use_numba=use_numba)
    np.testing.assert_allclose(m.coefficients, ref.coefficients, atol=1e-10)
