#!/usr/bin/env python3
"""Benchmark the compiled NNLS kernel against the pure-NumPy fallback.

The multi-column Gram-system solve is the hot inner loop of the alternating
fit (it runs once per factor, per sweep, per restart), so the comparison uses
penalized systems with the shapes that loop actually produces, plus one
end-to-end fit timing per backend.

Run:  python3 benchmarks/bench_kernels.py
"""

import time

import numpy as np

from biarch import FitConfig, toy_matrix
from biarch import _nnls_py
from biarch.solvers import _run_alternation

try:
    from biarch import _nnls_cy
except ImportError:
    _nnls_cy = None


def time_call(fn, repeats=7):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_kernel():
    rng = np.random.default_rng(0)
    cases = [
        ("memberships, small fit", 2, 50, 52),
        ("memberships, wider fit", 4, 200, 64),
        ("mixtures, tall design", 8, 8, 128),
    ]
    print(f"{'workload':28s} {'k':>3s} {'cols':>5s} {'python':>10s} "
          f"{'compiled':>10s} {'speedup':>8s}")
    for name, k, cols, p in cases:
        A = rng.normal(size=(p, k))
        B = rng.normal(size=(p, cols))
        gram = np.ascontiguousarray(A.T @ A + 4e4)
        lin = np.ascontiguousarray(A.T @ B + 4e4)
        t_py = time_call(lambda: _nnls_py.nnls_gram_multi(gram, lin, 3 * k))
        if _nnls_cy is None:
            print(f"{name:28s} {k:3d} {cols:5d} {t_py * 1e3:9.3f}ms "
                  f"{'n/a':>10s} {'n/a':>8s}")
            continue
        x_py = _nnls_py.nnls_gram_multi(gram, lin, 3 * k)
        x_cy = _nnls_cy.nnls_gram_multi(gram, lin, 3 * k)
        if not np.allclose(x_py, x_cy, atol=1e-10):
            raise AssertionError(f"backend mismatch on {name!r}")
        t_cy = time_call(lambda: _nnls_cy.nnls_gram_multi(gram, lin, 3 * k))
        print(f"{name:28s} {k:3d} {cols:5d} {t_py * 1e3:9.3f}ms "
              f"{t_cy * 1e3:9.3f}ms {t_py / t_cy:7.1f}x")


def bench_full_fit():
    X = toy_matrix().values
    cfg = FitConfig(k=2, c=2, seed=1, max_iter=100, n_restarts=1)

    def one_run():
        _run_alternation(X, cfg, rng=np.random.default_rng([0]))

    # the engine picks its kernel through biarch.simplex at import time, so
    # report which backend this process is actually exercising
    from biarch import backend_name

    t = time_call(one_run, repeats=5)
    print(f"\nfull alternating run on the 5x5 toy matrix "
          f"({backend_name()} backend): {t * 1e3:.2f}ms")
    print("(set BIARCH_BACKEND=python and rerun to time the fallback)")


if __name__ == "__main__":
    if _nnls_cy is None:
        print("compiled kernel not built; timing the fallback only\n")
    bench_kernel()
    bench_full_fit()
