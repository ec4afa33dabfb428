"""Gradient boosting machines and discrete AdaBoost over depth-bounded trees."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import _kernels
from ..data import Dataset, ResponseKind
from .base import FitError, LearnerKind, Model, check_rows


def _check_int(name, v, lo=1):
    if int(v) != v or v < lo:
        raise ValueError(f"{name} must be an integer >= {lo}, got {v}")


@dataclass(frozen=True)
class BoostConfig:
    n_trees: int = 100
    depth: int = 3
    shrinkage: float = 0.1
    min_node: int = 10

    def __post_init__(self):
        _check_int("n_trees", self.n_trees)
        _check_int("depth", self.depth)
        _check_int("min_node", self.min_node)
        if not 0.0 < self.shrinkage <= 1.0:
            raise ValueError(f"shrinkage must be in (0, 1], got {self.shrinkage}")


@dataclass(frozen=True)
class AdaConfig:
    n_iters: int = 50
    depth: int = 1
    shrinkage: float = 1.0

    def __post_init__(self):
        _check_int("n_iters", self.n_iters)
        _check_int("depth", self.depth)
        if not 0.0 < self.shrinkage <= 1.0:
            raise ValueError(f"shrinkage must be in (0, 1], got {self.shrinkage}")


@dataclass(frozen=True, eq=False)
class TreeEnsemble:
    """Trees stored back to back; tree ``t`` spans ``offsets[t]:offsets[t+1]``."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    offsets: np.ndarray

    @property
    def n_trees(self) -> int:
        return self.offsets.shape[0] - 1

    def weighted_sum(self, X, weights, n_trees: int | None = None) -> np.ndarray:
        t = self.n_trees if n_trees is None else min(int(n_trees), self.n_trees)
        if t == 0:
            return np.zeros(X.shape[0])
        end = self.offsets[t]
        return _kernels.ensemble_sum(X, self.feature[:end], self.threshold[:end], self.left[:end],
                                     self.right[:end], self.value[:end], self.offsets[:t + 1],
                                     np.asarray(weights, dtype=np.float64)[:t])


@dataclass(frozen=True, eq=False)
class GbmModel(Model):
    init: float
    shrinkage: float
    trees: TreeEnsemble
    response: ResponseKind
    n_features: int
    train_loss: np.ndarray
    learner = LearnerKind.GBM

    def decision_function(self, X, n_trees: int | None = None) -> np.ndarray:
        """F_0 + shrinkage * (sum of the first ``n_trees`` trees); logit scale for binary."""
        X = check_rows(X, self.n_features)
        w = np.full(self.trees.n_trees, self.shrinkage)
        return self.init + self.trees.weighted_sum(X, w, n_trees)


def gbm_fit(train: Dataset, cfg: BoostConfig, *, use_numba=None) -> GbmModel:
    """Least-squares boosting (continuous) or logistic boosting with Newton leaves (binary).

    A constant response is not an error: every tree is a single leaf with zero
    update and predictions equal the initial constant.
    """
    if cfg.min_node > train.n:
        raise FitError(f"min_node={cfg.min_node} exceeds training size {train.n}")
    clf = train.is_binary
    f0, feat, thr, lft, rgt, val, offsets, losses = _kernels.gbm_boost(
        train.features, train.response, cfg.n_trees, cfg.depth, cfg.min_node, cfg.shrinkage, clf,
        use_numba=use_numba)
    trees = TreeEnsemble(feat, thr, lft, rgt, val, offsets)
    return GbmModel(float(f0), cfg.shrinkage, trees, train.kind, train.p, losses)


@dataclass(frozen=True, eq=False)
class AdaModel(Model):
    """Score = sum_t alpha_t h_t(x) with h_t in {-1, +1}; decision = 2 * score."""

    trees: TreeEnsemble
    alphas: np.ndarray
    weighted_errors: np.ndarray
    fallback: float
    n_features: int
    response: ResponseKind = ResponseKind.BINARY
    learner = LearnerKind.ADABOOST

    def score(self, X, n_rounds: int | None = None) -> np.ndarray:
        X = check_rows(X, self.n_features)
        return self.trees.weighted_sum(X, self.alphas, n_rounds)

    def decision_function(self, X, n_rounds: int | None = None) -> np.ndarray:
        if self.trees.n_trees == 0:
            X = check_rows(X, self.n_features)
            return np.full(X.shape[0], self.fallback)
        return 2.0 * self.score(X, n_rounds)


def adaboost_fit(train: Dataset, cfg: AdaConfig, *, use_numba=None) -> AdaModel:
    """Discrete AdaBoost; the learner weight is (shrinkage / 2) ln((1 - err) / err).

    Boosting stops early when a weak learner reaches zero weighted error (it
    is kept, with its error floored at 1e-10) or error >= 0.5 (discarded).
    """
    if not train.is_binary:
        raise FitError("adaboost is only defined for a binary response")
    ypm = 2.0 * train.response - 1.0
    feat, thr, lft, rgt, vote, offsets, alphas, errs = _kernels.ada_boost(
        train.features, ypm, cfg.n_iters, cfg.depth, cfg.shrinkage, use_numba=use_numba)
    q = float(np.clip(train.response.mean(), 1e-12, 1 - 1e-12))
    return AdaModel(TreeEnsemble(feat, thr, lft, rgt, vote, offsets), alphas, errs,
                    float(np.log(q / (1 - q))), train.p)
