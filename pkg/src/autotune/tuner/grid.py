"""The glmnet-style baseline: a fixed alpha grid, a cross-validated lambda path per alpha."""

from __future__ import annotations

import logging
import time
from enum import Enum

import numpy as np

from ..data import DataError, Dataset, vfold
from ..learners import enet_path, lambda_max
from ..learners.base import FitError
from ..metrics import misclassification, rmse
from .objective import CrossValidation
from .search import TuneResult
from .space import Dim, Scale, SearchSpace

log = logging.getLogger(__name__)

ALPHAS = tuple(round(0.1 * i, 1) for i in range(11))
N_LAMBDA = 100
LAMBDA_DECADES = 4.0


class LambdaRule(str, Enum):
    MIN = "min"
    ONE_SE = "1se"


def lambda_path(train: Dataset, alpha: float, n: int = N_LAMBDA,
                decades: float = LAMBDA_DECADES) -> np.ndarray:
    """``n`` log-spaced values from the all-zero lambda down ``decades`` powers of ten."""
    top = lambda_max(train, alpha)
    if not top > 0:
        top = 1.0
    return np.logspace(np.log10(top), np.log10(top) - decades, n)


def select_lambda(cv_mean, cv_se, rule: LambdaRule | str) -> int:
    """Index into a decreasing lambda path.

    ``MIN`` takes the smallest CV loss (the largest lambda among exact ties);
    ``ONE_SE`` takes the largest lambda whose loss is within one standard
    error of that minimum.
    """
    rule = LambdaRule(rule)
    cv_mean = np.asarray(cv_mean, dtype=np.float64)
    best = int(np.argmin(cv_mean))
    if rule is LambdaRule.MIN or not np.isfinite(cv_mean[best]):
        return best
    bound = cv_mean[best] + cv_se[best]
    return int(np.flatnonzero(cv_mean <= bound)[0])


def grid_alpha_lambda(train: Dataset, strategy: CrossValidation = CrossValidation(10),
                      rule: LambdaRule | str = LambdaRule.ONE_SE, seed: int = 0, *,
                      alphas=ALPHAS, n_lambda: int = N_LAMBDA, use_numba=None) -> TuneResult:
    """Cross-validated elastic net over an alpha grid.

    Every alpha shares one fold assignment.  For each alpha a warm-started
    lambda path is fitted per fold, the held-out loss (misclassification or
    RMSE) is averaged over folds with standard error ``sd / sqrt(k)``, and
    one lambda is chosen by ``rule``.

    Under ``MIN`` the per-alpha choice with the lowest CV loss wins, exact
    ties going to the larger alpha.  Under ``ONE_SE`` the same parsimony
    principle is applied across alphas as well: among the per-alpha choices
    whose loss is within one standard error of the lowest, the largest alpha
    (the most l1-weighted, sparsest fit) is returned, so ``best_loss`` may
    exceed the minimum of the trace in that mode.

    The trace holds one entry per alpha.  ``details["paths"]`` keeps the
    lambda path and CV curves for inspection.
    """
    if not isinstance(strategy, CrossValidation):
        raise TypeError("the alpha grid needs a CrossValidation strategy")
    rule = LambdaRule(rule)
    t0 = time.perf_counter()
    folds = vfold(train, strategy.k, seed=seed)
    parts = []
    for f in range(1, folds.k + 1):
        held = folds.held_out(f)
        try:
            fit_part = train.subset(folds.fit_rows(f))
        except DataError as exc:
            log.warning("fold %d unusable: %s", f, exc)
            fit_part = None
        parts.append((fit_part, train.features[held], train.response[held]))
    loss_fn = misclassification if train.is_binary else rmse

    picks, paths = [], []
    for alpha in alphas:
        lambdas = lambda_path(train, alpha, n_lambda)
        losses = np.full((folds.k, lambdas.size), np.inf)
        for i, (fit_part, Xh, yh) in enumerate(parts):
            if fit_part is None:
                continue
            try:
                models = enet_path(fit_part, alpha, lambdas, use_numba=use_numba)
            except (FitError, ValueError, ArithmeticError) as exc:
                log.warning("alpha=%g fold %d failed: %s", alpha, i + 1, exc)
                continue
            for j, m in enumerate(models):
                est = m.predict(Xh)
                if np.isfinite(est).all():
                    losses[i, j] = loss_fn(yh, est)
        finite = np.isfinite(losses).all(axis=0)
        cv_mean = np.where(finite, losses.mean(axis=0), np.inf)
        with np.errstate(invalid="ignore"):
            cv_se = np.where(finite, losses.std(axis=0, ddof=1) / np.sqrt(folds.k), np.inf)
        j = select_lambda(cv_mean, cv_se, rule)
        picks.append((float(alpha), float(lambdas[j]), float(cv_mean[j]), float(cv_se[j])))
        paths.append({"alpha": float(alpha), "lambda": lambdas.tolist(), "cv_mean": cv_mean.tolist(),
                      "cv_se": cv_se.tolist(), "selected": j})

    lam_all = [p[1] for p in picks]
    space = SearchSpace((Dim("alpha", min(0.0, min(alphas)), max(1.0, max(alphas))),
                         Dim("lambda", min(lam_all) / 10.0, max(lam_all) * 10.0, Scale.LOG10)))
    trace = [(space.from_natural({"alpha": a, "lambda": lam}), loss) for a, lam, loss, _ in picks]
    best_i = min(range(len(picks)), key=lambda i: (picks[i][2], -picks[i][0]))
    if rule is LambdaRule.ONE_SE and np.isfinite(picks[best_i][2]):
        bound = picks[best_i][2] + picks[best_i][3]
        within = [i for i in range(len(picks)) if picks[i][2] <= bound]
        best_i = max(within, key=lambda i: (picks[i][0], picks[i][1]))
    return TuneResult(trace[best_i][0], picks[best_i][2], len(trace), time.perf_counter() - t0,
                      trace, optimizer="alpha-grid", learner="en", strategy=strategy.describe(),
                      details={"rule": rule.value, "paths": paths})
