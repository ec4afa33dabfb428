"""Derivative-free hyperparameter tuning for SVM, GBM, AdaBoost and elastic net."""

__version__ = "0.1.0"

from .data import Dataset, ResponseKind, initial_split, load_csv, load_dataset  # noqa: E402
from .learners import LearnerKind  # noqa: E402
from .tuner import (CrossValidation, FastHoldout, Objective, SearchSpace,  # noqa: E402
                    default_space, genetic_search, grid_alpha_lambda, hooke_jeeves, tune)

__all__ = [
    "CrossValidation", "Dataset", "FastHoldout", "LearnerKind", "Objective", "ResponseKind",
    "SearchSpace", "default_space", "genetic_search", "grid_alpha_lambda", "hooke_jeeves",
    "initial_split", "load_csv", "load_dataset", "tune",
]
