"""Performance and loss metrics for binary classification and regression."""

from __future__ import annotations

from enum import Enum

import numpy as np
from scipy.stats import rankdata

LOG_LOSS_CLIP = 1e-12


class MetricKind(str, Enum):
    ACCURACY = "accuracy"
    MISCLASSIFICATION = "misclassification"
    AUC = "auc"
    RMSE = "rmse"
    MAE = "mae"
    MSE = "mse"
    LOG_LOSS = "log_loss"

    @property
    def higher_is_better(self) -> bool:
        return self in (MetricKind.ACCURACY, MetricKind.AUC)


def _pair(truth, other, what="estimate"):
    t = np.asarray(truth, dtype=np.float64).ravel()
    o = np.asarray(other, dtype=np.float64).ravel()
    if t.shape != o.shape:
        raise ValueError(f"length mismatch: truth has {t.size}, {what} has {o.size}")
    if t.size == 0:
        raise ValueError("empty input")
    return t, o


def accuracy(truth, predicted) -> float:
    t, p = _pair(truth, predicted, "predicted")
    return float(np.mean(t == p))


def misclassification(truth, predicted) -> float:
    """Fraction of wrong labels, ``1 - accuracy``."""
    t, p = _pair(truth, predicted, "predicted")
    return float(np.mean(t != p))


def auc(truth, scores) -> float:
    """Area under the ROC curve via the Mann-Whitney rank sum (ties count one half)."""
    t, s = _pair(truth, scores, "scores")
    pos = t == 1
    n_pos = int(pos.sum())
    n_neg = t.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs both classes in truth")
    ranks = rankdata(s)
    u = ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def mse(truth, estimate) -> float:
    t, e = _pair(truth, estimate)
    return float(np.mean((t - e) ** 2))


def rmse(truth, estimate) -> float:
    return float(np.sqrt(mse(truth, estimate)))


def mae(truth, estimate) -> float:
    t, e = _pair(truth, estimate)
    return float(np.mean(np.abs(t - e)))


def log_loss(truth, probs) -> float:
    t, p = _pair(truth, probs, "probs")
    p = np.clip(p, LOG_LOSS_CLIP, 1.0 - LOG_LOSS_CLIP)
    return float(-np.mean(t * np.log(p) + (1.0 - t) * np.log1p(-p)))


def compute(kind: MetricKind | str, truth, estimate) -> float:
    kind = MetricKind(kind)
    fn = {
        MetricKind.ACCURACY: accuracy,
        MetricKind.MISCLASSIFICATION: misclassification,
        MetricKind.AUC: auc,
        MetricKind.RMSE: rmse,
        MetricKind.MAE: mae,
        MetricKind.MSE: mse,
        MetricKind.LOG_LOSS: log_loss,
    }[kind]
    return fn(truth, estimate)
