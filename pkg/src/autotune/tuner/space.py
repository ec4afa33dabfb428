"""Search spaces: named, bounded dimensions searched in (possibly log) scaled coordinates."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from ..data import ResponseKind
from ..learners import LearnerKind


class Scale(str, Enum):
    LINEAR = "linear"
    LOG2 = "log2"
    LOG10 = "log10"

    def forward(self, x: float) -> float:
        if self is Scale.LOG2:
            return math.log2(x)
        if self is Scale.LOG10:
            return math.log10(x)
        return float(x)

    def inverse(self, v: float) -> float:
        if self is Scale.LOG2:
            return 2.0 ** v
        if self is Scale.LOG10:
            return 10.0 ** v
        return float(v)


def round_half_down(v: float) -> int:
    """Nearest integer, with exact halves going to the smaller neighbour."""
    return int(math.ceil(v - 0.5))


@dataclass(frozen=True)
class Dim:
    """One hyperparameter.  ``lower``/``upper`` are in natural (model) units."""

    name: str
    lower: float
    upper: float
    scale: Scale = Scale.LINEAR
    integral: bool = False

    def __post_init__(self):
        object.__setattr__(self, "scale", Scale(self.scale))
        if not (math.isfinite(self.lower) and math.isfinite(self.upper)):
            raise ValueError(f"{self.name}: bounds must be finite")
        if not self.lower < self.upper:
            raise ValueError(f"{self.name}: need lower < upper, got [{self.lower}, {self.upper}]")
        if self.scale is not Scale.LINEAR and self.lower <= 0:
            raise ValueError(f"{self.name}: {self.scale.value} scale needs lower > 0")

    @property
    def lo(self) -> float:
        return self.scale.forward(self.lower)

    @property
    def hi(self) -> float:
        return self.scale.forward(self.upper)

    def natural(self, v: float):
        x = self.scale.inverse(min(max(v, self.lo), self.hi))
        if self.integral:
            return min(max(round_half_down(x), math.ceil(self.lower)), math.floor(self.upper))
        return min(max(x, self.lower), self.upper)

    def scaled(self, x: float) -> float:
        if not self.lower <= x <= self.upper:
            raise ValueError(f"{self.name}={x} outside [{self.lower}, {self.upper}]")
        return self.scale.forward(x)


@dataclass(frozen=True)
class SearchSpace:
    dims: tuple[Dim, ...]

    def __post_init__(self):
        dims = tuple(self.dims)
        names = [d.name for d in dims]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate dimension names: {names}")
        object.__setattr__(self, "dims", dims)

    def __len__(self) -> int:
        return len(self.dims)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(d.name for d in self.dims)

    @property
    def lower(self) -> np.ndarray:
        return np.array([d.lo for d in self.dims])

    @property
    def upper(self) -> np.ndarray:
        return np.array([d.hi for d in self.dims])

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    def clamp(self, values) -> np.ndarray:
        return np.clip(np.asarray(values, dtype=np.float64), self.lower, self.upper)

    def contains(self, values) -> bool:
        v = np.asarray(values, dtype=np.float64)
        return v.shape == (len(self),) and bool(np.all((v >= self.lower) & (v <= self.upper)))

    def candidate(self, values) -> "CandidateConfig":
        return CandidateConfig(self, values)

    def center(self) -> "CandidateConfig":
        return CandidateConfig(self, 0.5 * (self.lower + self.upper))

    def from_natural(self, mapping: dict) -> "CandidateConfig":
        missing = set(self.names) - set(mapping)
        if missing:
            raise ValueError(f"missing values for {sorted(missing)}")
        return CandidateConfig(self, [d.scaled(float(mapping[d.name])) for d in self.dims])

    def with_bounds(self, name: str, lower: float, upper: float) -> "SearchSpace":
        """Copy with one dimension's natural-unit bounds replaced."""
        if name not in self.names:
            raise KeyError(f"no dimension {name!r}; have {list(self.names)}")
        return SearchSpace(tuple(replace(d, lower=float(lower), upper=float(upper))
                                 if d.name == name else d for d in self.dims))


class CandidateConfig:
    """A point of a :class:`SearchSpace`, held in scaled coordinates."""

    __slots__ = ("space", "values")

    def __init__(self, space: SearchSpace, values):
        v = np.array(values, dtype=np.float64).ravel()
        if not space.contains(v):
            raise ValueError(f"candidate {v.tolist()} outside the search box")
        v.setflags(write=False)
        self.space = space
        self.values = v

    def natural(self) -> dict:
        return {d.name: d.natural(float(x)) for d, x in zip(self.space.dims, self.values)}

    def key(self) -> tuple:
        """Hashable identity after rounding to model units (integral dims collapse)."""
        return tuple(self.natural().values())

    def __eq__(self, other):
        return (isinstance(other, CandidateConfig) and other.space == self.space
                and np.array_equal(other.values, self.values))

    def __hash__(self):
        return hash(self.values.tobytes())

    def __repr__(self):
        return f"CandidateConfig({self.natural()})"


def default_space(learner: LearnerKind | str, response: ResponseKind | str) -> SearchSpace:
    """Search box for each learner.

    The ranges are this package's own choices; they cover the values the
    usual defaults and published tuning studies land on.
    """
    learner = LearnerKind.parse(learner)
    response = ResponseKind(response)
    if learner is LearnerKind.SVM:
        dims = [Dim("cost", 2.0 ** -5, 2.0 ** 15, Scale.LOG2),
                Dim("gamma", 2.0 ** -15, 2.0 ** 3, Scale.LOG2)]
        if response is ResponseKind.CONTINUOUS:
            dims.append(Dim("epsilon", 0.0, 0.5))
        return SearchSpace(tuple(dims))
    if learner is LearnerKind.GBM:
        return SearchSpace((Dim("n_trees", 50, 3000, integral=True),
                            Dim("depth", 1, 10, integral=True),
                            Dim("shrinkage", 1e-3, 10 ** -0.5, Scale.LOG10),
                            Dim("min_node", 5, 15, integral=True)))
    if learner is LearnerKind.ADABOOST:
        if response is not ResponseKind.BINARY:
            raise ValueError("adaboost needs a binary response")
        return SearchSpace((Dim("n_iters", 50, 2000, integral=True),
                            Dim("depth", 1, 10, integral=True),
                            Dim("shrinkage", 0.01, 1.0, Scale.LOG10)))
    return SearchSpace((Dim("alpha", 0.0, 1.0), Dim("lambda", 1e-4, 1e2, Scale.LOG10)))
