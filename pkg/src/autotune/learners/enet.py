"""Elastic net by cyclic coordinate descent (Gaussian) and IRLS + CD (binomial).

The penalty is ``lam * (alpha * |b|_1 + (1 - alpha) / 2 * |b|_2^2)`` on
standardised features with the squared-error loss scaled by 1/(2n).  In terms
of separate l1/l2 weights this is ``l1 = lam * alpha`` and
``l2 = lam * (1 - alpha) / 2``.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

from .. import _kernels
from ..data import Dataset, ResponseKind
from .base import LearnerKind, Model, check_rows, sigmoid, standardize_fit

ALPHA_FLOOR = 1e-3
# lambda_max is nudged up by this relative amount so that a fit at exactly
# lambda_max is all-zero despite rounding in the solver's gradient sums.
LAMBDA_MAX_PAD = 1e-9
IRLS_MAX_OUTER = 100
IRLS_TOL = 1e-10
IRLS_MAX_HALVINGS = 30
# floor on the IRLS weight p(1 - p); the working residual uses the exact p
WEIGHT_FLOOR = 1e-5


@dataclass(frozen=True)
class EnetConfig:
    alpha: float = 0.5
    lam: float = 0.01

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if not self.lam >= 0.0:
            raise ValueError(f"lambda must be >= 0, got {self.lam}")


@dataclass(frozen=True, eq=False)
class EnetModel(Model):
    """Linear predictor ``intercept + X @ coefficients`` on the original feature scale."""

    coefficients: np.ndarray
    intercept: float
    mean: np.ndarray
    scale: np.ndarray
    response: ResponseKind
    alpha: float
    lam: float
    converged: bool = True
    learner = LearnerKind.ELASTIC_NET

    @property
    def n_features(self) -> int:
        return self.coefficients.shape[0]

    @property
    def std_coefficients(self) -> np.ndarray:
        return self.coefficients * self.scale

    def decision_function(self, X) -> np.ndarray:
        X = check_rows(X, self.n_features)
        return self.intercept + X @ self.coefficients

    def to_dict(self) -> dict:
        return {
            "learner": self.learner.value,
            "response": self.response.value,
            "alpha": self.alpha,
            "lambda": self.lam,
            "coefficients": self.coefficients.tolist(),
            "intercept": self.intercept,
            "standardization": {"mean": self.mean.tolist(), "scale": self.scale.tolist()},
            "converged": self.converged,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "EnetModel":
        st = d["standardization"]
        return cls(np.asarray(d["coefficients"], dtype=np.float64), float(d["intercept"]),
                   np.asarray(st["mean"], dtype=np.float64), np.asarray(st["scale"], dtype=np.float64),
                   ResponseKind(d["response"]), float(d["alpha"]), float(d["lambda"]),
                   bool(d.get("converged", True)))


def soft_threshold(z: float, g: float) -> float:
    """sign(z) * max(|z| - g, 0)."""
    if g < 0:
        raise ValueError("threshold must be non-negative")
    return float(np.sign(z) * max(abs(z) - g, 0.0))


def _standardized(train: Dataset):
    mean, scale = standardize_fit(train.features)
    return (train.features - mean) / scale, mean, scale


def lambda_max(train: Dataset, alpha: float) -> float:
    """Smallest lambda for which every coefficient is exactly zero.

    For ``alpha == 0`` no finite value zeroes a ridge fit; the value for
    ``alpha = 1e-3`` is returned instead, as path-based tools do.  The
    value carries a relative pad of 1e-9 against solver rounding.
    """
    Z, _, _ = _standardized(train)
    r = train.response - train.response.mean()
    grad = np.abs(Z.T @ r) / train.n
    return float(grad.max() / max(alpha, ALPHA_FLOOR) * (1.0 + LAMBDA_MAX_PAD))


def _to_model(beta_s, b0_s, mean, scale, kind, cfg, converged):
    coef = beta_s / scale
    intercept = b0_s - float(np.dot(coef, mean))
    return EnetModel(coef, float(intercept), mean, scale, kind, cfg.alpha, cfg.lam, converged)


class _Solver:
    """Standardised design plus warm-start state, shared along a lambda path."""

    def __init__(self, train: Dataset, use_numba=None):
        self.Z, self.mean, self.scale = _standardized(train)
        self.y = train.response
        self.kind = train.kind
        self.n = train.n
        self.use_numba = use_numba
        self.beta = np.zeros(train.p)
        if train.is_binary:
            q = float(np.clip(self.y.mean(), 1e-12, 1 - 1e-12))
            self.b0 = float(np.log(q / (1 - q)))
        else:
            self.b0 = float(self.y.mean())
        self.history: list[np.ndarray] = []

    def solve(self, cfg: EnetConfig, max_sweeps=100_000, tol=1e-14):
        if self.kind is ResponseKind.CONTINUOUS:
            w = np.ones(self.n)
            beta, b0, hist, conv = _kernels.cd_solve(self.Z, self.y, w, self.beta, self.b0, cfg.lam,
                                                     cfg.alpha, max_sweeps, tol,
                                                     use_numba=self.use_numba)
            self.history = [hist]
        else:
            beta, b0, conv = self._irls(cfg, max_sweeps, tol)
        self.beta, self.b0 = beta, b0
        return _to_model(beta, b0, self.mean, self.scale, self.kind, cfg, conv)

    def _penalized_nll(self, beta, b0, cfg):
        eta = b0 + self.Z @ beta
        nll = float(np.mean(np.logaddexp(0.0, eta) - self.y * eta))
        pen = cfg.lam * (cfg.alpha * np.abs(beta).sum() + 0.5 * (1 - cfg.alpha) * np.dot(beta, beta))
        return nll + pen

    def _irls(self, cfg, max_sweeps, tol):
        """Proximal Newton: each quadratic model is solved by CD, then the step is
        halved toward the previous iterate until the penalised likelihood drops."""
        beta, b0 = self.beta.copy(), self.b0
        obj = self._penalized_nll(beta, b0, cfg)
        self.history = []
        converged = False
        for _ in range(IRLS_MAX_OUTER):
            eta = b0 + self.Z @ beta
            p = sigmoid(eta)
            w = np.maximum(p * (1 - p), WEIGHT_FLOOR)
            z = eta + (self.y - p) / w
            nb, nb0, hist, _ = _kernels.cd_solve(self.Z, z, w, beta, b0, cfg.lam, cfg.alpha,
                                                 max_sweeps, tol, use_numba=self.use_numba)
            self.history.append(hist)
            t = 1.0
            for _ in range(IRLS_MAX_HALVINGS):
                cand_beta, cand_b0 = beta + t * (nb - beta), b0 + t * (nb0 - b0)
                cand = self._penalized_nll(cand_beta, cand_b0, cfg)
                if cand <= obj:
                    break
                t *= 0.5
            else:
                # no descent left along the Newton direction: numerically optimal
                converged = True
                break
            done = obj - cand <= IRLS_TOL * (abs(cand) + 1e-10)
            beta, b0, obj = cand_beta, cand_b0, cand
            if done:
                converged = True
                break
        if not converged:
            warnings.warn(f"elastic net IRLS did not converge in {IRLS_MAX_OUTER} iterations "
                          f"(alpha={cfg.alpha}, lambda={cfg.lam}); returning best iterate",
                          RuntimeWarning, stacklevel=3)
        return beta, b0, converged


def enet_fit(train: Dataset, cfg: EnetConfig, *, use_numba=None, max_sweeps=100_000,
             tol=1e-14) -> EnetModel:
    return _Solver(train, use_numba).solve(cfg, max_sweeps, tol)


def enet_path(train: Dataset, alpha: float, lambdas, *, use_numba=None, max_sweeps=100_000,
              tol=1e-12) -> list[EnetModel]:
    """Fit a sequence of lambdas (expected decreasing) with warm starts."""
    solver = _Solver(train, use_numba)
    return [solver.solve(EnetConfig(alpha, float(lam)), max_sweeps, tol) for lam in lambdas]


def sweep_objectives(train: Dataset, cfg: EnetConfig, *, use_numba=None) -> np.ndarray:
    """Penalised objective after each coordinate sweep of a Gaussian fit (for diagnostics)."""
    s = _Solver(train, use_numba)
    s.solve(cfg)
    return s.history[0]
