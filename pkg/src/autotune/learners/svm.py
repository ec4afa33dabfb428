"""RBF-kernel support vector classification and epsilon-regression via SMO."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import _kernels
from ..data import Dataset, ResponseKind
from .base import FitError, LearnerKind, Model, check_rows, standardize_fit

KKT_TOL = 1e-3


@dataclass(frozen=True)
class SvmConfig:
    cost: float = 1.0
    gamma: float = 0.1
    epsilon: float = 0.1

    def __post_init__(self):
        if not self.cost > 0:
            raise ValueError(f"cost must be > 0, got {self.cost}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")
        if not self.epsilon >= 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")


def rbf_kernel(x, x2, gamma: float) -> float:
    """exp(-gamma * ||x - x2||^2) for two feature rows."""
    a = np.asarray(x, dtype=np.float64).ravel()
    b = np.asarray(x2, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.size} vs {b.size}")
    d = a - b
    return float(np.exp(-gamma * np.dot(d, d)))


def rbf_matrix(A, B, gamma: float) -> np.ndarray:
    """Gram matrix K[i, j] = exp(-gamma * ||A_i - B_j||^2)."""
    sq = (A * A).sum(axis=1)[:, None] + (B * B).sum(axis=1)[None, :] - 2.0 * (A @ B.T)
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-gamma * sq)


@dataclass(frozen=True, eq=False)
class SvmModel(Model):
    """f(x) = bias + sum_i dual_coefs[i] * K(x, support_vectors[i]).

    ``support_vectors`` are raw training rows; the standardisation learned at
    fit time is applied to both sides of the kernel.
    """

    support_vectors: np.ndarray
    dual_coefs: np.ndarray
    bias: float
    gamma: float
    cost: float
    mean: np.ndarray
    scale: np.ndarray
    response: ResponseKind
    n_iter: int = 0
    kkt_violation: float = 0.0
    learner = LearnerKind.SVM

    @property
    def n_features(self) -> int:
        return self.mean.shape[0]

    def decision_function(self, X) -> np.ndarray:
        X = check_rows(X, self.n_features)
        if self.dual_coefs.size == 0:
            return np.full(X.shape[0], self.bias)
        Z = (X - self.mean) / self.scale
        S = (self.support_vectors - self.mean) / self.scale
        return rbf_matrix(Z, S, self.gamma) @ self.dual_coefs + self.bias


def _gram(train: Dataset, gamma: float):
    mean, scale = standardize_fit(train.features)
    Z = (train.features - mean) / scale
    K = rbf_matrix(Z, Z, gamma)
    if not np.isfinite(K).all():
        raise FitError("non-finite kernel values")
    return K, mean, scale


def _finish(train, a, G, y, idx, coef_full, C, cfg, mean, scale, n_iter, kind):
    rho = _kernels.smo_rho(a, G, y, C)
    viol = _kernels.smo_violation(a, G, y, C)
    sv = np.flatnonzero(coef_full != 0.0)
    return SvmModel(
        support_vectors=train.features[sv].copy(),
        dual_coefs=coef_full[sv].copy(),
        bias=-rho,
        gamma=cfg.gamma,
        cost=C,
        mean=mean,
        scale=scale,
        response=kind,
        n_iter=int(n_iter),
        kkt_violation=viol,
    )


def svm_fit(train: Dataset, cfg: SvmConfig, *, tol: float = KKT_TOL, use_numba=None) -> SvmModel:
    """Soft-margin C-SVM classifier; labels 0/1 are mapped to -1/+1 internally."""
    if not train.is_binary:
        raise FitError("svm_fit needs a binary response; use svr_fit for regression")
    ypm = 2.0 * train.response - 1.0
    if np.all(ypm == ypm[0]):
        raise FitError("single-class training data")
    K, mean, scale = _gram(train, cfg.gamma)
    n = train.n
    idx = np.arange(n)
    a, G, n_iter = _kernels.smo_solve(K, idx, ypm, -np.ones(n), cfg.cost, tol, use_numba=use_numba)
    return _finish(train, a, G, ypm, idx, a * ypm, cfg.cost, cfg, mean, scale, n_iter,
                   ResponseKind.BINARY)


def svr_fit(train: Dataset, cfg: SvmConfig, *, tol: float = KKT_TOL, use_numba=None) -> SvmModel:
    """Epsilon-insensitive support vector regression (2n-variable dual)."""
    if train.is_binary:
        raise FitError("svr_fit needs a continuous response")
    n = train.n
    y = train.response
    K, mean, scale = _gram(train, cfg.gamma)
    idx = np.concatenate([np.arange(n), np.arange(n)])
    signs = np.concatenate([np.ones(n), -np.ones(n)])
    lin = np.concatenate([cfg.epsilon - y, cfg.epsilon + y])
    a, G, n_iter = _kernels.smo_solve(K, idx, signs, lin, cfg.cost, tol, use_numba=use_numba)
    coef = a[:n] - a[n:]
    return _finish(train, a, G, signs, idx, coef, cfg.cost, cfg, mean, scale, n_iter,
                   ResponseKind.CONTINUOUS)


def fit(train: Dataset, cfg: SvmConfig, **kw) -> SvmModel:
    return svm_fit(train, cfg, **kw) if train.is_binary else svr_fit(train, cfg, **kw)
