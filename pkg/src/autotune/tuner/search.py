"""Derivative-free optimizers over a :class:`SearchSpace`: Hooke-Jeeves and a real-coded GA.

Both minimise ``objective(candidate)`` where ``candidate`` is a
:class:`CandidateConfig`; any callable with that signature works, including
:class:`Objective`.  Evaluations are memoised on the candidate's natural
(rounded) values, so revisiting a configuration is free and does not appear
twice in the trace.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .space import CandidateConfig, SearchSpace

HJ_STEP = 0.25
HJ_TOL = 1e-3
HJ_BUDGET = 500
GA_POPULATION = 20
GA_GENERATIONS = 25
GA_MUTATION_RATE = 0.1
GA_MUTATION_SCALE = 0.1
GA_BLEND = 0.5


@dataclass
class TuneResult:
    """Outcome of a search.  ``trace`` lists every distinct evaluation in order."""

    best: CandidateConfig
    best_loss: float
    n_evals: int
    elapsed: float
    trace: list = field(default_factory=list)
    optimizer: str = ""
    learner: str = ""
    strategy: str = ""
    details: dict = field(default_factory=dict)

    @property
    def best_config(self) -> dict:
        return self.best.natural()

    @property
    def failed(self) -> bool:
        return not math.isfinite(self.best_loss)

    def running_min(self) -> np.ndarray:
        return np.minimum.accumulate(np.array([loss for _, loss in self.trace], dtype=np.float64))

    def to_dict(self, include_trace: bool = False) -> dict:
        out = {
            "learner": self.learner,
            "optimizer": self.optimizer,
            "strategy": self.strategy,
            "best": _jsonable(self.best_config),
            "loss": _num(self.best_loss),
            "n_evals": self.n_evals,
            "elapsed": self.elapsed,
        }
        if self.details:
            out["details"] = _jsonable(self.details)
        if include_trace:
            out["trace"] = [{"config": _jsonable(c.natural()), "loss": _num(v)} for c, v in self.trace]
        return out

    def to_json(self, include_trace: bool = False, **kw) -> str:
        return json.dumps(self.to_dict(include_trace), **kw)


def _num(v: float):
    return float(v) if math.isfinite(v) else None


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer, int)) and not isinstance(obj, bool):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return _num(float(obj))
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


class _BudgetSpent(Exception):
    pass


class _Recorder:
    """Memoising wrapper that keeps the trace and enforces the evaluation budget."""

    def __init__(self, objective: Callable, space: SearchSpace, budget: int | None = None):
        self.objective = objective
        self.space = space
        self.budget = budget
        self.cache: dict[tuple, float] = {}
        self.trace: list[tuple[CandidateConfig, float]] = []
        self.best: tuple[float, CandidateConfig] | None = None

    def _loss(self, raw) -> float:
        v = float(raw)
        return v if not math.isnan(v) else float("inf")

    def _record(self, cand, key, loss):
        self.cache[key] = loss
        self.trace.append((cand, loss))
        if self.best is None or loss < self.best[0]:
            self.best = (loss, cand)

    def __call__(self, values) -> float:
        cand = CandidateConfig(self.space, self.space.clamp(values))
        key = cand.key()
        if key in self.cache:
            return self.cache[key]
        if self.budget is not None and len(self.trace) >= self.budget:
            raise _BudgetSpent
        loss = self._loss(self.objective(cand))
        self._record(cand, key, loss)
        return loss

    def batch(self, rows, pool: ThreadPoolExecutor | None = None) -> np.ndarray:
        """Evaluate rows in order; new configurations may run concurrently."""
        cands = [CandidateConfig(self.space, self.space.clamp(r)) for r in rows]
        keys = [c.key() for c in cands]
        todo, seen = [], set()
        for c, k in zip(cands, keys):
            if k not in self.cache and k not in seen:
                seen.add(k)
                todo.append((c, k))
        run = pool.map if pool is not None else map
        losses = list(run(lambda ck: self._loss(self.objective(ck[0])), todo))
        for (c, k), loss in zip(todo, losses):
            self._record(c, k, loss)
        return np.array([self.cache[k] for k in keys])

    def result(self, t0, **meta) -> TuneResult:
        loss, cand = self.best
        return TuneResult(cand, loss, len(self.trace), time.perf_counter() - t0, self.trace, **meta)


def _meta(objective, optimizer):
    learner = getattr(objective, "learner", "")
    strategy = getattr(objective, "strategy", None)
    return {"optimizer": optimizer, "learner": getattr(learner, "value", str(learner)),
            "strategy": strategy.describe() if strategy is not None else ""}


def hooke_jeeves(objective: Callable, space: SearchSpace, init: CandidateConfig | None = None, *,
                 step: float = HJ_STEP, tol: float = HJ_TOL, budget: int = HJ_BUDGET) -> TuneResult:
    """Hooke-Jeeves pattern search in scaled coordinates.

    Parameters
    ----------
    objective : callable
        Maps a :class:`CandidateConfig` to a loss to minimise.
    space : SearchSpace
    init : CandidateConfig, optional
        Starting point; the centre of the box by default.
    step : float
        Initial step as a fraction of each dimension's scaled width.
    tol : float
        Search stops once every step is below ``tol`` (scaled units).
    budget : int
        Maximum number of distinct evaluations.

    Returns
    -------
    TuneResult
        The best point ever evaluated.

    Notes
    -----
    An exploratory sweep tries ``+step`` then ``-step`` on each coordinate
    and keeps the first that improves.  After a successful sweep the search
    jumps along the move just made (pattern move) and explores from there;
    the jump is kept only if that exploration beats the current base.  A
    sweep that finds nothing halves every step.
    """
    if len(space) == 0:
        raise ValueError("search space has no dimensions")
    if int(budget) != budget or budget < 1:
        raise ValueError(f"budget must be a positive integer, got {budget}")
    if not step > 0 or not tol > 0:
        raise ValueError("step and tol must be positive")
    init = space.center() if init is None else init
    if init.space != space:
        init = CandidateConfig(space, init.values)
    t0 = time.perf_counter()
    rec = _Recorder(objective, space, int(budget))
    steps = step * space.width
    lo, hi = space.lower, space.upper

    def explore(base, f_base):
        x, fx = base.copy(), f_base
        for j in range(len(space)):
            for sgn in (1.0, -1.0):
                trial = x.copy()
                trial[j] = min(max(x[j] + sgn * steps[j], lo[j]), hi[j])
                if trial[j] == x[j]:
                    continue
                ft = rec(trial)
                if ft < fx:
                    x, fx = trial, ft
                    break
        return x, fx

    try:
        x = init.values.copy()
        fx = rec(x)
        while np.any(steps >= tol):
            y, fy = explore(x, fx)
            if fy < fx:
                while True:
                    prev, x, fx = x, y, fy
                    p = space.clamp(2.0 * x - prev)
                    y, fy = explore(p, rec(p))
                    if not fy < fx:
                        break
            else:
                steps = 0.5 * steps
    except _BudgetSpent:
        pass
    return rec.result(t0, **_meta(objective, "hj"))


def genetic_search(objective: Callable, space: SearchSpace, *, population: int = GA_POPULATION,
                   generations: int = GA_GENERATIONS, seed: int = 0, jobs: int = 1,
                   mutation_rate: float = GA_MUTATION_RATE) -> TuneResult:
    """Real-coded genetic algorithm in scaled coordinates.

    Uniform initial population; each generation keeps the best individual
    and breeds the rest by size-2 tournaments, BLX-0.5 blend crossover and
    per-gene Gaussian mutation with standard deviation of a tenth of the
    dimension's width.  Children are clamped to the box.

    With ``jobs > 1`` the new individuals of a generation are evaluated on a
    thread pool; results are gathered in individual order, so the trace is
    the same as a sequential run.
    """
    if len(space) == 0:
        raise ValueError("search space has no dimensions")
    if int(population) != population or population < 4:
        raise ValueError(f"population must be an integer >= 4, got {population}")
    if int(generations) != generations or generations < 1:
        raise ValueError(f"generations must be an integer >= 1, got {generations}")
    if not 0.0 <= mutation_rate <= 1.0:
        raise ValueError(f"mutation rate must be in [0, 1], got {mutation_rate}")
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    rec = _Recorder(objective, space)
    lo, hi, width = space.lower, space.upper, space.width
    d = len(space)
    pool = ThreadPoolExecutor(max_workers=jobs) if jobs > 1 else None
    try:
        pop = lo + rng.random((population, d)) * width
        fit = rec.batch(pop, pool)
        for _ in range(generations):
            elite = int(np.argmin(fit))
            children = np.empty((population - 1, d))
            for c in range(population - 1):
                a = _tournament(rng, fit)
                b = _tournament(rng, fit)
                pa, pb = pop[a], pop[b]
                low, high = np.minimum(pa, pb), np.maximum(pa, pb)
                spread = GA_BLEND * (high - low)
                child = low - spread + rng.random(d) * (high - low + 2.0 * spread)
                mutate = rng.random(d) < mutation_rate
                child = child + mutate * rng.normal(0.0, GA_MUTATION_SCALE * width)
                children[c] = np.clip(child, lo, hi)
            pop = np.vstack([pop[elite][None, :], children])
            fit = np.concatenate([[fit[elite]], rec.batch(children, pool)])
    finally:
        if pool is not None:
            pool.shutdown()
    return rec.result(t0, **_meta(objective, "ga"))


def _tournament(rng, fit) -> int:
    i, j = rng.integers(0, fit.shape[0], size=2)
    return int(i) if fit[i] <= fit[j] else int(j)
