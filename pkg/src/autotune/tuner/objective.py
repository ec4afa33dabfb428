"""Loss of a candidate configuration under cross-validation or a fast holdout."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .. import learners
from ..data import DataError, Dataset, fast_holdout, vfold
from ..learners import FitError, LearnerKind
from ..metrics import MetricKind, misclassification, rmse
from .space import CandidateConfig

log = logging.getLogger(__name__)

# Exceptions that mean "this configuration cannot be fitted here", not a bug.
FIT_FAILURES = (FitError, DataError, ValueError, ArithmeticError, np.linalg.LinAlgError)


@dataclass(frozen=True)
class CrossValidation:
    k: int = 10

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 2:
            raise ValueError(f"cross-validation needs an integer k >= 2, got {self.k}")

    def describe(self) -> str:
        return f"cv{self.k}"


@dataclass(frozen=True)
class FastHoldout:
    fraction: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.fraction < 1.0:
            raise ValueError(f"fast holdout fraction must be in (0, 1), got {self.fraction}")

    def describe(self) -> str:
        return f"fast{self.fraction:g}"


EvaluationStrategy = CrossValidation | FastHoldout


def parse_strategy(text: str) -> EvaluationStrategy:
    """``"cv10"`` or ``"fast0.5"`` (the format written by ``describe``)."""
    t = text.strip().lower()
    if t.startswith("cv"):
        return CrossValidation(int(t[2:]))
    if t.startswith("fast"):
        return FastHoldout(float(t[4:]))
    raise ValueError(f"unknown evaluation strategy {text!r}")


Fitter = Callable[[Dataset, dict], object]


class Objective:
    """Deterministic loss for natural-unit configurations of one learner.

    The resampling (folds or holdout) is drawn once here and reused for every
    candidate, so differences in loss reflect the configurations only.  The
    object holds no mutable state after construction and may be evaluated
    from several threads at once.

    Parameters
    ----------
    train : Dataset
        Training part; test rows must never be passed in.
    learner : LearnerKind or str
        Model family to tune.
    strategy : CrossValidation or FastHoldout
    seed : int
        Seed of the resampling.
    fitter : callable, optional
        ``fitter(dataset, config) -> model`` replacing the built-in learner;
        the returned model needs a ``predict(X)`` method.
    use_numba : bool, optional
        Kernel backend override for the built-in learners.
    """

    def __init__(self, train: Dataset, learner: LearnerKind | str, strategy: EvaluationStrategy,
                 seed: int = 0, *, fitter: Fitter | None = None, use_numba=None):
        self.learner = LearnerKind.parse(learner)
        if self.learner is LearnerKind.ADABOOST and not train.is_binary and fitter is None:
            raise ValueError("adaboost needs a binary response")
        self.train = train
        self.strategy = strategy
        self.seed = int(seed)
        self.fitter = fitter
        self.use_numba = use_numba
        self.loss_kind = MetricKind.MISCLASSIFICATION if train.is_binary else MetricKind.RMSE
        if isinstance(strategy, CrossValidation):
            folds = vfold(train, strategy.k, seed=self.seed)
            self.splits = tuple((folds.fit_rows(f), folds.held_out(f)) for f in range(1, folds.k + 1))
        elif isinstance(strategy, FastHoldout):
            split = fast_holdout(train, strategy.fraction, seed=self.seed)
            self.splits = ((split.train, split.test),)
        else:
            raise TypeError(f"unsupported strategy {strategy!r}")
        self._parts = tuple(self._subset(fit_rows) for fit_rows, _ in self.splits)

    def _subset(self, rows):
        try:
            return self.train.subset(rows)
        except DataError as exc:  # e.g. a fold with one class only
            log.warning("resampling part unusable: %s", exc)
            return None

    def fit(self, train: Dataset, config: dict):
        if self.fitter is not None:
            return self.fitter(train, config)
        return learners.fit(self.learner, train, config, use_numba=self.use_numba)

    def part_loss(self, model, held_rows) -> float:
        X = self.train.features[held_rows]
        y = self.train.response[held_rows]
        est = np.asarray(model.predict(X), dtype=np.float64)
        if not np.isfinite(est).all():
            return float("inf")
        if self.loss_kind is MetricKind.MISCLASSIFICATION:
            return misclassification(y, est)
        return rmse(y, est)

    def evaluate(self, config: CandidateConfig | dict) -> float:
        """Mean held-out loss over the fixed resampling; ``inf`` if any part fails."""
        values = config.natural() if isinstance(config, CandidateConfig) else dict(config)
        losses = []
        for part, (_, held) in zip(self._parts, self.splits):
            if part is None:
                return float("inf")
            try:
                model = self.fit(part, values)
                loss = self.part_loss(model, held)
            except FIT_FAILURES as exc:
                log.info("fit failed for %s: %s", values, exc)
                return float("inf")
            if not np.isfinite(loss):
                return float("inf")
            losses.append(loss)
        return float(np.mean(losses))

    __call__ = evaluate

    def used_rows(self) -> np.ndarray:
        """Sorted indices into ``train`` touched by any fit or held-out part."""
        parts = [np.concatenate([a, b]) for a, b in self.splits]
        return np.unique(np.concatenate(parts))
