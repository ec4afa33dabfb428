"""Datasets, CSV ingestion and resampling (train/test split, v-fold, fast holdout)."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path

import numpy as np


class DataError(ValueError):
    """Raised for malformed input files or invalid resampling requests."""


class ResponseKind(str, Enum):
    BINARY = "binary"
    CONTINUOUS = "continuous"


@dataclass(frozen=True)
class Dataset:
    """Numeric feature matrix plus a binary (0/1) or continuous response.

    Instances are treated as immutable; the arrays are flagged read-only so a
    dataset can be shared between concurrent evaluations.
    """

    features: np.ndarray
    response: np.ndarray
    kind: ResponseKind
    feature_names: tuple[str, ...] = ()
    name: str = ""
    classes: tuple[str, str] | None = None

    def __post_init__(self):
        X = np.array(self.features, dtype=np.float64)
        if X.ndim == 1:
            X = X[:, None]
        y = np.array(self.response, dtype=np.float64).ravel()
        if X.ndim != 2 or X.shape[0] < 2 or X.shape[1] < 1:
            raise DataError(f"need an n x p feature matrix with n >= 2, p >= 1; got shape {X.shape}")
        if y.shape[0] != X.shape[0]:
            raise DataError(f"response length {y.shape[0]} != row count {X.shape[0]}")
        if not np.isfinite(X).all():
            raise DataError("features contain missing or non-finite values")
        if not np.isfinite(y).all():
            raise DataError("response contains missing or non-finite values")
        kind = ResponseKind(self.kind)
        if kind is ResponseKind.BINARY:
            if not np.isin(y, (0.0, 1.0)).all():
                raise DataError("binary response must be coded 0/1")
            if y.min() == y.max():
                raise DataError("binary response needs both classes present")
        names = tuple(self.feature_names) or tuple(f"x{j + 1}" for j in range(X.shape[1]))
        if len(names) != X.shape[1]:
            raise DataError("feature_names length does not match column count")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "response", y)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "feature_names", names)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def p(self) -> int:
        return self.features.shape[1]

    @property
    def is_binary(self) -> bool:
        return self.kind is ResponseKind.BINARY

    def subset(self, rows) -> "Dataset":
        rows = np.asarray(rows, dtype=np.int64)
        return Dataset(self.features[rows], self.response[rows], self.kind, self.feature_names,
                       self.name, self.classes)


@dataclass(frozen=True)
class TrainTestSplit:
    train: np.ndarray
    test: np.ndarray

    def __post_init__(self):
        for attr in ("train", "test"):
            a = np.asarray(getattr(self, attr), dtype=np.int64)
            a.setflags(write=False)
            object.__setattr__(self, attr, a)


@dataclass(frozen=True)
class FoldAssignment:
    """``fold_of[i]`` is the fold id (1..k) of training row ``i``."""

    fold_of: np.ndarray
    k: int

    def held_out(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of == fold)

    def fit_rows(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of != fold)

    def sizes(self) -> np.ndarray:
        return np.bincount(self.fold_of, minlength=self.k + 1)[1:]


# ---------------------------------------------------------------------------
# CSV loading
# ---------------------------------------------------------------------------

BUNDLED = {
    "sonar": ("sonar.csv", "Class"),
    "pima": ("pima.csv", "diabetes"),
    "breast-cancer": ("breast_cancer.csv", "Class"),
}
_ALIASES = {"breastcancer": "breast-cancer", "breast_cancer": "breast-cancer", "bc": "breast-cancer"}


def _parse_float(cell: str):
    try:
        v = float(cell)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def load_csv(path, target: str, name: str | None = None) -> Dataset:
    """Read a comma separated file with a header row into a :class:`Dataset`.

    Columns whose every cell parses as a number are kept as numeric features;
    any other column is one-hot encoded (one indicator per level, sorted).
    A numeric target gives a continuous response unless it is coded 0/1.  For
    two-level string targets the lexicographically larger label maps to 1.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if len(rows) < 2:
        raise DataError(f"{path}: need a header and at least one data row")
    header = [h.strip() for h in rows[0]]
    body = rows[1:]
    for lineno, r in enumerate(body, start=2):
        if len(r) != len(header):
            raise DataError(f"{path}:{lineno}: expected {len(header)} fields, got {len(r)}")
    if target not in header:
        raise DataError(f"{path}: target column {target!r} not in header {header}")
    t_col = header.index(target)

    raw_y = [r[t_col].strip() for r in body]
    if any(c == "" or c.upper() == "NA" for c in raw_y):
        raise DataError(f"{path}: target column has missing values")
    y_num = [_parse_float(c) for c in raw_y]
    levels = sorted(set(raw_y))
    if len(levels) < 2:
        raise DataError(f"{path}: target {target!r} is constant")
    classes = None
    numeric = all(v is not None for v in y_num)
    if numeric and set(y_num) != {0.0, 1.0}:
        y = np.asarray(y_num, dtype=np.float64)
        kind = ResponseKind.CONTINUOUS
    elif len(levels) == 2:
        if numeric:
            levels = sorted(levels, key=float)
        classes = (levels[0], levels[1])
        y = np.asarray([1.0 if c == levels[1] else 0.0 for c in raw_y])
        kind = ResponseKind.BINARY
    else:
        raise DataError(f"{path}: target {target!r} has {len(levels)} non-numeric levels; "
                        "only binary or numeric targets are supported")

    columns, names = [], []
    for j, h in enumerate(header):
        if j == t_col:
            continue
        cells = [r[j].strip() for r in body]
        for lineno, c in enumerate(cells, start=2):
            if c == "" or c.upper() == "NA":
                raise DataError(f"{path}:{lineno}: missing value in column {h!r}")
        nums = [_parse_float(c) for c in cells]
        if all(v is not None for v in nums):
            columns.append(np.asarray(nums, dtype=np.float64))
            names.append(h)
        else:
            for lvl in sorted(set(cells)):
                columns.append(np.asarray([1.0 if c == lvl else 0.0 for c in cells]))
                names.append(f"{h}_{lvl}")
    if not columns:
        raise DataError(f"{path}: no feature columns besides the target")
    X = np.column_stack(columns)
    return Dataset(X, y, kind, tuple(names), name or path.stem, classes)


def bundled_path(name: str) -> Path:
    key = _ALIASES.get(name.lower(), name.lower())
    if key not in BUNDLED:
        raise DataError(f"unknown dataset {name!r}; bundled: {sorted(BUNDLED)}")
    return Path(str(resources.files("autotune") / "datasets" / BUNDLED[key][0]))


def load_bundled(name: str) -> Dataset:
    key = _ALIASES.get(name.lower(), name.lower())
    path = bundled_path(key)
    return load_csv(path, BUNDLED[key][1], name=key)


def load_dataset(spec: str, target: str | None = None) -> Dataset:
    """Resolve a bundled dataset name or a CSV path."""
    key = _ALIASES.get(spec.lower(), spec.lower())
    if key in BUNDLED and (target is None or target == BUNDLED[key][1]) and not Path(spec).is_file():
        return load_bundled(key)
    if target is None:
        raise DataError(f"{spec!r} is not a bundled dataset; a --target column is required")
    return load_csv(spec, target)


# ---------------------------------------------------------------------------
# Resampling
# ---------------------------------------------------------------------------


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def _check_fraction(v, what):
    if not (0.0 < v < 1.0):
        raise DataError(f"{what} must lie strictly between 0 and 1, got {v}")


def _random_split(y, n_first, stratify, rng):
    """Choose ``n_first`` rows for the first part; per-class quotas when stratified."""
    n = y.shape[0]
    if not stratify:
        perm = rng.permutation(n)
        return np.sort(perm[:n_first]), np.sort(perm[n_first:])
    classes = np.unique(y)
    members = [np.flatnonzero(y == c) for c in classes]
    frac = n_first / n
    exact = np.array([m.size * frac for m in members])
    quota = np.floor(exact).astype(int)
    # largest remainders get the leftover slots
    short = n_first - quota.sum()
    for c in np.argsort(-(exact - quota), kind="stable")[:short]:
        quota[c] += 1
    first, second = [], []
    for m, q in zip(members, quota):
        perm = rng.permutation(m)
        first.append(perm[:q])
        second.append(perm[q:])
    return np.sort(np.concatenate(first)), np.sort(np.concatenate(second))


def initial_split(d: Dataset, proportion: float = 0.75, stratify: bool | None = None,
                  seed: int = 0) -> TrainTestSplit:
    """Random train/test partition with ``round(proportion * n)`` training rows.

    ``stratify`` defaults to True for binary responses and is rejected for
    continuous ones.
    """
    _check_fraction(proportion, "proportion")
    if stratify is None:
        stratify = d.is_binary
    if stratify and not d.is_binary:
        raise DataError("stratified splitting requires a binary response")
    n_train = _round_half_up(proportion * d.n)
    if n_train < 1 or n_train > d.n - 1:
        raise DataError(f"proportion {proportion} leaves an empty part for n={d.n}")
    rng = np.random.default_rng(seed)
    train, test = _random_split(d.response, n_train, stratify, rng)
    return TrainTestSplit(train, test)


def vfold(d_train: Dataset, k: int = 10, stratify: bool | None = None, seed: int = 0) -> FoldAssignment:
    """Assign each training row to one of ``k`` folds of near-equal size.

    Stratified assignment deals each class round-robin (after shuffling) so
    per-class fold counts differ by at most one.
    """
    n = d_train.n
    if k < 2:
        raise DataError(f"k must be >= 2, got {k}")
    if k > n:
        raise DataError(f"k={k} exceeds the number of training rows ({n})")
    if stratify is None:
        stratify = d_train.is_binary
    if stratify and not d_train.is_binary:
        raise DataError("stratified folds require a binary response")
    rng = np.random.default_rng(seed)
    fold_of = np.empty(n, dtype=np.int64)
    if stratify:
        # deal classes in sequence so overall sizes also stay within one
        order = np.concatenate([rng.permutation(np.flatnonzero(d_train.response == c))
                                for c in np.unique(d_train.response)])
    else:
        order = rng.permutation(n)
    fold_of[order] = np.arange(n) % k + 1
    return FoldAssignment(fold_of, int(k))


def fast_holdout(d_train: Dataset, fraction: float = 0.5, stratify: bool | None = None,
                 seed: int = 0) -> TrainTestSplit:
    """Single random split of the training data: ``round(fraction * n)`` rows to fit on."""
    _check_fraction(fraction, "fraction")
    if stratify is None:
        stratify = d_train.is_binary
    if stratify and not d_train.is_binary:
        raise DataError("stratified holdout requires a binary response")
    n_fit = _round_half_up(fraction * d_train.n)
    n_fit = min(max(n_fit, 1), d_train.n - 1)
    if d_train.n < 2:
        raise DataError("need at least two rows for a holdout split")
    rng = np.random.default_rng(seed)
    fit, held = _random_split(d_train.response, n_fit, stratify, rng)
    return TrainTestSplit(fit, held)
