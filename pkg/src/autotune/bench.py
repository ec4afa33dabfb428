"""Repeated split / tune / refit / test trials with timing, aggregation and persistence."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import learners, metrics
from .data import Dataset, initial_split, load_dataset
from .learners import LearnerKind
from .metrics import MetricKind
from .tuner import (CrossValidation, EvaluationStrategy, FastHoldout, Objective, default_space,
                    genetic_search, grid_alpha_lambda, hooke_jeeves, parse_strategy)

log = logging.getLogger(__name__)

TRAIN_PROPORTION = 0.75
CSV_COLUMNS = ("dataset", "method", "metric", "mean_value", "mean_seconds", "n_trials")


@dataclass(frozen=True)
class Method:
    """A learner, an optimizer (``hj``, ``ga`` or ``grid``) and a loss-evaluation strategy."""

    learner: LearnerKind
    optimizer: str = "hj"
    strategy: EvaluationStrategy = FastHoldout(0.5)

    def __post_init__(self):
        object.__setattr__(self, "learner", LearnerKind.parse(self.learner))
        opt = self.optimizer.lower()
        if opt not in ("hj", "ga", "grid"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if opt == "grid" and (self.learner is not LearnerKind.ELASTIC_NET
                              or not isinstance(self.strategy, CrossValidation)):
            raise ValueError("the alpha grid needs the elastic net and cross-validation")
        object.__setattr__(self, "optimizer", opt)

    @property
    def label(self) -> str:
        return f"{self.learner.value}/{self.optimizer}/{self.strategy.describe()}"

    @classmethod
    def parse(cls, label: str) -> "Method":
        """Inverse of :attr:`label`, e.g. ``"svm/hj/fast0.5"`` or ``"en/grid/cv10"``."""
        parts = label.split("/")
        if len(parts) != 3:
            raise ValueError(f"method label must look like learner/optimizer/strategy, got {label!r}")
        return cls(LearnerKind.parse(parts[0]), parts[1], parse_strategy(parts[2]))

    def to_dict(self) -> dict:
        return {"learner": self.learner.value, "optimizer": self.optimizer,
                "strategy": self.strategy.describe()}


@dataclass
class TrialRecord:
    dataset: str
    method: str
    trial_index: int
    seed: int
    test_metrics: dict
    tune_seconds: float
    best_config: dict
    best_loss: float
    n_evals: int
    failed: bool = False
    test_rows: tuple = ()
    tuning_rows: tuple = field(default=(), repr=False)

    @property
    def primary_metric(self) -> str:
        return MetricKind.ACCURACY.value if MetricKind.ACCURACY.value in self.test_metrics \
            else MetricKind.RMSE.value

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset,
            "method": self.method,
            "method_parts": Method.parse(self.method).to_dict(),
            "trial_index": self.trial_index,
            "seed": self.seed,
            "test_metrics": dict(self.test_metrics),
            "tune_seconds": self.tune_seconds,
            "best_config": self.best_config,
            "best_loss": self.best_loss if math.isfinite(self.best_loss) else None,
            "n_evals": self.n_evals,
            "failed": self.failed,
            "test_rows": [int(i) for i in self.test_rows],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrialRecord":
        loss = d.get("best_loss")
        return cls(d["dataset"], d["method"], int(d["trial_index"]), int(d["seed"]),
                   dict(d["test_metrics"]), float(d["tune_seconds"]), dict(d["best_config"]),
                   float("inf") if loss is None else float(loss), int(d["n_evals"]),
                   bool(d.get("failed", False)), tuple(d.get("test_rows", ())))


@dataclass
class BenchReport:
    records: list
    trials: int = 0

    def __post_init__(self):
        self.records = sorted(self.records, key=lambda r: (r.dataset, r.method, r.trial_index))

    def cells(self) -> list[tuple[str, str]]:
        seen = []
        for r in self.records:
            if (r.dataset, r.method) not in seen:
                seen.append((r.dataset, r.method))
        return seen

    def aggregates(self) -> list[dict]:
        """Per (dataset, method): arithmetic means over the non-failed trials."""
        out = []
        for ds, m in self.cells():
            recs = [r for r in self.records if r.dataset == ds and r.method == m]
            ok = [r for r in recs if not r.failed]
            if len(ok) < len(recs):
                warnings.warn(f"{ds} {m}: {len(recs) - len(ok)} failed trial(s) left out of the means",
                              RuntimeWarning, stacklevel=2)
            row = {"dataset": ds, "method": m, "n_trials": len(ok), "n_failed": len(recs) - len(ok)}
            if ok:
                primary = ok[0].primary_metric
                means = {k: float(np.mean([r.test_metrics[k] for r in ok])) for k in ok[0].test_metrics}
                row.update(metric=primary, mean_value=means[primary], metrics=means,
                           mean_seconds=float(np.mean([r.tune_seconds for r in ok])))
                row["error"] = 1.0 - means[primary] if primary == "accuracy" else means[primary]
            else:
                row.update(metric="", mean_value=float("nan"), metrics={}, mean_seconds=float("nan"),
                           error=float("nan"))
            out.append(row)
        return out

    def to_dict(self) -> dict:
        return {"trials": self.trials, "records": [r.to_dict() for r in self.records],
                "aggregates": _finite(self.aggregates())}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "BenchReport":
        return cls([TrialRecord.from_dict(r) for r in d.get("records", [])], int(d.get("trials", 0)))

    @classmethod
    def load(cls, path) -> "BenchReport":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for a in self.aggregates():
            w.writerow([a["dataset"], a["method"], a["metric"], repr(a["mean_value"]),
                        repr(a["mean_seconds"]), a["n_trials"]])
        return buf.getvalue()

    def save(self, out_dir, stem: str = "report") -> tuple[Path, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        jpath, cpath = out / f"{stem}.json", out / f"{stem}.csv"
        jpath.write_text(self.to_json(indent=2) + "\n", encoding="utf-8")
        cpath.write_text(self.to_csv(), encoding="utf-8")
        return jpath, cpath


def _finite(obj):
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_finite(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def score_model(model, test: Dataset) -> dict:
    """Accuracy and AUC for a binary response, RMSE and MAE for a continuous one."""
    X, y = test.features, test.response
    if test.is_binary:
        labels = np.asarray(model.predict(X), dtype=np.float64)
        out = {"accuracy": metrics.accuracy(y, labels)}
        scores = model.predict_proba(X) if hasattr(model, "predict_proba") else labels
        out["auc"] = metrics.auc(y, scores)
        return out
    est = np.asarray(model.predict(X), dtype=np.float64)
    return {"rmse": metrics.rmse(y, est), "mae": metrics.mae(y, est)}


def run_trial(d: Dataset, method: Method, seed: int, trial_index: int = 0, *, fitter=None,
              use_numba=None, **opts) -> TrialRecord:
    """Split ``d`` (stratified when binary), tune on the training part, refit, score on test.

    Only the tuning call is timed.  ``fitter(dataset, config) -> model``
    replaces the built-in learner in both tuning and refit.  ``opts`` are
    passed to the optimizer.
    """
    if method.learner is LearnerKind.ADABOOST and not d.is_binary and fitter is None:
        raise ValueError("adaboost needs a binary response")
    split = initial_split(d, TRAIN_PROPORTION, seed=seed)
    train, test = d.subset(split.train), d.subset(split.test)
    t0 = time.perf_counter()
    if method.optimizer == "grid":
        result = grid_alpha_lambda(train, method.strategy, seed=seed, use_numba=use_numba, **opts)
        tuning_rows = split.train
    else:
        objective = Objective(train, method.learner, method.strategy, seed, fitter=fitter,
                              use_numba=use_numba)
        space = opts.pop("space", None) or default_space(method.learner, d.kind)
        if method.optimizer == "hj":
            result = hooke_jeeves(objective, space, **opts)
        else:
            opts.setdefault("seed", seed)
            result = genetic_search(objective, space, **opts)
        tuning_rows = split.train[objective.used_rows()]
    elapsed = time.perf_counter() - t0
    rec = TrialRecord(d.name, method.label, int(trial_index), int(seed), {}, elapsed,
                      result.best_config, result.best_loss, result.n_evals,
                      test_rows=tuple(int(i) for i in split.test),
                      tuning_rows=tuple(int(i) for i in tuning_rows))
    if result.failed:
        log.warning("%s %s trial %d: every candidate failed", d.name, method.label, trial_index)
        rec.failed = True
        return rec
    try:
        model = fitter(train, result.best_config) if fitter is not None else \
            learners.fit(method.learner, train, result.best_config, use_numba=use_numba)
        rec.test_metrics = score_model(model, test)
    except (learners.FitError, ValueError, ArithmeticError) as exc:
        log.warning("%s %s trial %d: refit failed: %s", d.name, method.label, trial_index, exc)
        rec.failed = True
    return rec


def _resolve(ds) -> Dataset:
    return ds if isinstance(ds, Dataset) else load_dataset(str(ds))


def run_benchmark(datasets, methods, trials: int = 10, base_seed: int = 0, *, jobs: int = 1,
                  out_dir=None, use_numba=None, **opts) -> BenchReport:
    """Every dataset x method x trial; trial ``t`` uses seed ``base_seed + t``.

    Parameters
    ----------
    datasets : iterable of Dataset or str
        Bundled names or paths are loaded with :func:`load_dataset`.
    methods : iterable of Method or str
    trials : int
    base_seed : int
    jobs : int
        Number of trials run concurrently (threads).
    out_dir : path, optional
        If given, ``report.json`` and ``report.csv`` are written there.
    """
    if int(trials) != trials or trials < 1:
        raise ValueError(f"trials must be a positive integer, got {trials}")
    data = [_resolve(ds) for ds in datasets]
    meths = [m if isinstance(m, Method) else Method.parse(m) for m in methods]
    jobs_list = [(d, m, base_seed + t, t) for d in data for m in meths
                 if not (m.learner is LearnerKind.ADABOOST and not d.is_binary)
                 for t in range(int(trials))]

    def work(job):
        d, m, seed, t = job
        return run_trial(d, m, seed, t, use_numba=use_numba, **dict(opts))

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(work, jobs_list))
    else:
        records = [work(j) for j in jobs_list]
    report = BenchReport(records, int(trials))
    if out_dir is not None:
        report.save(out_dir)
    return report


def comparison_methods(d: Dataset, optimizers=("hj", "ga"),
                       strategies=(CrossValidation(10), FastHoldout(0.5)), families=None) -> list:
    kinds = families or [LearnerKind.SVM, LearnerKind.GBM, LearnerKind.ELASTIC_NET]
    kinds = [LearnerKind.parse(k) for k in kinds]
    if d.is_binary and families is None:
        kinds.append(LearnerKind.ADABOOST)
    kinds = [k for k in kinds if d.is_binary or k is not LearnerKind.ADABOOST]
    return [Method(k, o, s) for k in kinds for o in optimizers for s in strategies]


def compare_models(d: Dataset | str, trials: int = 10, base_seed: int = 0, *,
                   optimizers=("hj", "ga"), strategies=(CrossValidation(10), FastHoldout(0.5)),
                   families=None, jobs: int = 1, out_dir=None, use_numba=None, **opts) -> BenchReport:
    """All learner families (adaboost only for a binary response) under every optimizer and
    strategy, on identical per-trial splits."""
    d = _resolve(d)
    methods = comparison_methods(d, optimizers, strategies, families)
    return run_benchmark([d], methods, trials, base_seed, jobs=jobs, out_dir=out_dir,
                         use_numba=use_numba, **opts)
