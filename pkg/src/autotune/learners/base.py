from __future__ import annotations

from enum import Enum

import numpy as np

from ..data import ResponseKind


class LearnerKind(str, Enum):
    SVM = "svm"
    GBM = "gbm"
    ADABOOST = "ada"
    ELASTIC_NET = "en"

    @classmethod
    def parse(cls, value: "LearnerKind | str") -> "LearnerKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"adaboost": "ada", "elasticnet": "en", "enet": "en", "elastic-net": "en",
                   "elastic_net": "en", "glmnet": "en", "svr": "svm"}
        return cls(aliases.get(key, key))


class FitError(RuntimeError):
    """A learner could not produce a usable model for the given data/config."""


def sigmoid(f):
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(f, dtype=np.float64)))


def check_rows(X, p: int) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :] if p > 1 else X[:, None]
    if X.shape[1] != p:
        raise ValueError(f"expected {p} feature columns, got {X.shape[1]}")
    return X


class Model:
    """Common surface of fitted models.

    Subclasses implement :meth:`decision_function`; binary models squash it
    to a probability for class 1, continuous models return it directly.
    """

    learner: LearnerKind
    response: ResponseKind
    n_features: int

    def decision_function(self, X) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError

    def predict_proba(self, X) -> np.ndarray:
        if self.response is not ResponseKind.BINARY:
            raise TypeError("predict_proba is only defined for binary responses")
        return sigmoid(self.decision_function(X))

    def predict(self, X) -> np.ndarray:
        f = self.decision_function(X)
        if self.response is ResponseKind.BINARY:
            return (f > 0.0).astype(np.float64)
        return f


def standardize_fit(X, ddof: int = 0):
    mean = X.mean(axis=0)
    scale = X.std(axis=0, ddof=ddof)
    scale = np.where(scale > 0.0, scale, 1.0)
    return mean, scale
