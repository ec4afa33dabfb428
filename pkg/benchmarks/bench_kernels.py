"""Compiled (numba) versus pure-numpy kernels.

Times each hot kernel on both backends with the same inputs and checks the
outputs agree.  Run with ``python benchmarks/bench_kernels.py``; pass
``--repeat N`` for more timing samples.  The numpy backend is selected per
call, so ``AUTOTUNE_DISABLE_NUMBA`` does not need to be set.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from autotune import _kernels
from autotune._accel import NUMBA_AVAILABLE
from autotune.data import load_bundled
from autotune.learners.svm import rbf_matrix


def _time(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def _same(a, b, tol):
    if isinstance(a, tuple):
        return all(_same(x, y, tol) for x, y in zip(a, b))
    a, b = np.asarray(a), np.asarray(b)
    return a.shape == b.shape and np.allclose(a, b, rtol=tol, atol=tol)


def cases():
    d = load_bundled("sonar")
    Z = (d.features - d.features.mean(0)) / d.features.std(0)
    y = 2.0 * d.response - 1.0
    K = rbf_matrix(Z, Z, 0.01)
    n = d.n
    yield "smo (sonar, C=4)", lambda nb: _kernels.smo_solve(
        K, np.arange(n), y, -np.ones(n), 4.0, use_numba=nb)[:2], 1e-8

    p = load_bundled("pima")
    X, t = p.features, p.response
    yield "gbm 300 trees depth 3 (pima)", lambda nb: _kernels.gbm_boost(
        X, t, 300, 3, 10, 0.1, True, use_numba=nb)[1:6], 1e-8
    yield "adaboost 200 stumps (pima)", lambda nb: _kernels.ada_boost(
        X, 2.0 * t - 1.0, 200, 1, 1.0, use_numba=nb)[:5], 1e-8

    Zp = (X - X.mean(0)) / X.std(0)
    w = np.ones(p.n)
    yield "coordinate descent (pima, lasso)", lambda nb: _kernels.cd_solve(
        Zp, t, w, np.zeros(p.p), float(t.mean()), 1e-3, 1.0, use_numba=nb)[:2], 1e-8


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if not NUMBA_AVAILABLE:
        print("numba is not installed; only the numpy backend can run")
        return 1
    print(f"{'kernel':36s} {'numba s':>10s} {'numpy s':>10s} {'speedup':>8s}  agree")
    for name, run, tol in cases():
        run(True)  # compile outside the timing
        t_nb, out_nb = _time(lambda: run(True), args.repeat)
        t_np, out_np = _time(lambda: run(False), args.repeat)
        print(f"{name:36s} {t_nb:10.4f} {t_np:10.4f} {t_np / t_nb:8.1f}  {_same(out_nb, out_np, tol)}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
