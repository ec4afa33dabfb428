"""The four tunable model families behind one fit/predict surface."""

from __future__ import annotations

import numpy as np

from ..data import Dataset, ResponseKind
from .base import FitError, LearnerKind, Model, sigmoid
from .enet import EnetConfig, EnetModel, enet_fit, enet_path, lambda_max, soft_threshold
from .svm import SvmConfig, SvmModel, rbf_kernel, rbf_matrix, svm_fit, svr_fit
from .trees import AdaConfig, AdaModel, BoostConfig, GbmModel, adaboost_fit, gbm_fit

__all__ = [
    "AdaConfig", "AdaModel", "BoostConfig", "EnetConfig", "EnetModel", "FitError", "GbmModel",
    "LearnerKind", "Model", "SvmConfig", "SvmModel", "adaboost_fit", "config_for", "enet_fit",
    "enet_path", "fit", "gbm_fit", "lambda_max", "predict", "rbf_kernel", "rbf_matrix", "sigmoid",
    "soft_threshold", "svm_fit", "svr_fit",
]


def config_for(learner: LearnerKind | str, values: dict):
    """Build the config object for ``learner`` from natural-unit hyperparameter values."""
    learner = LearnerKind.parse(learner)
    if learner is LearnerKind.SVM:
        return SvmConfig(**values)
    if learner is LearnerKind.GBM:
        return BoostConfig(**{k: int(v) if k != "shrinkage" else float(v) for k, v in values.items()})
    if learner is LearnerKind.ADABOOST:
        return AdaConfig(**{k: int(v) if k != "shrinkage" else float(v) for k, v in values.items()})
    values = dict(values)
    if "lambda" in values:
        values["lam"] = values.pop("lambda")
    return EnetConfig(**values)


def fit(learner: LearnerKind | str, train: Dataset, cfg, **kw) -> Model:
    learner = LearnerKind.parse(learner)
    if isinstance(cfg, dict):
        cfg = config_for(learner, cfg)
    if learner is LearnerKind.SVM:
        return svm_fit(train, cfg, **kw) if train.is_binary else svr_fit(train, cfg, **kw)
    if learner is LearnerKind.GBM:
        return gbm_fit(train, cfg, **kw)
    if learner is LearnerKind.ADABOOST:
        return adaboost_fit(train, cfg, **kw)
    return enet_fit(train, cfg, **kw)


def predict(model: Model, rows):
    """Binary models: ``(labels, probability of class 1)``; continuous: predicted values."""
    if model.response is ResponseKind.BINARY:
        f = model.decision_function(rows)
        return (f > 0.0).astype(np.float64), sigmoid(f)
    return model.decision_function(rows)
