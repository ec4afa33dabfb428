"""Hyperparameter search: spaces, resampled losses, optimizers and the alpha-grid baseline."""

from __future__ import annotations

from ..data import Dataset
from ..learners import LearnerKind
from .grid import ALPHAS, LambdaRule, grid_alpha_lambda, lambda_path, select_lambda
from .objective import (CrossValidation, EvaluationStrategy, FastHoldout, Objective,
                        parse_strategy)
from .search import TuneResult, genetic_search, hooke_jeeves
from .space import CandidateConfig, Dim, Scale, SearchSpace, default_space, round_half_down

__all__ = [
    "ALPHAS", "CandidateConfig", "CrossValidation", "Dim", "EvaluationStrategy", "FastHoldout",
    "LambdaRule", "Objective", "Scale", "SearchSpace", "TuneResult", "default_space",
    "genetic_search", "grid_alpha_lambda", "hooke_jeeves", "lambda_path", "parse_strategy",
    "round_half_down", "select_lambda", "tune",
]

OPTIMIZERS = ("hj", "ga", "grid")


def tune(train: Dataset, learner: LearnerKind | str, optimizer: str = "hj",
         strategy: EvaluationStrategy | None = None, seed: int = 0, *,
         space: SearchSpace | None = None, use_numba=None, **opts) -> TuneResult:
    """Tune ``learner`` on ``train`` and return the best configuration found.

    ``optimizer`` is ``"hj"``, ``"ga"`` or ``"grid"`` (elastic net only).
    Extra keyword options go to the optimizer (``budget``, ``tol``,
    ``population``, ``generations``, ``jobs``, ``rule``...).  The GA is
    seeded with ``seed`` as well, unless ``opts`` carries its own.
    """
    learner = LearnerKind.parse(learner)
    optimizer = optimizer.lower()
    if optimizer not in OPTIMIZERS:
        raise ValueError(f"unknown optimizer {optimizer!r}; choose from {OPTIMIZERS}")
    strategy = strategy or FastHoldout(0.5)
    if optimizer == "grid":
        if learner is not LearnerKind.ELASTIC_NET:
            raise ValueError("the alpha grid only applies to the elastic net")
        if not isinstance(strategy, CrossValidation):
            raise ValueError("the alpha grid needs cross-validation")
        return grid_alpha_lambda(train, strategy, seed=seed, use_numba=use_numba, **opts)
    space = space or default_space(learner, train.kind)
    objective = Objective(train, learner, strategy, seed, use_numba=use_numba)
    if optimizer == "hj":
        return hooke_jeeves(objective, space, **opts)
    opts.setdefault("seed", seed)
    return genetic_search(objective, space, **opts)
