"""Simplex-constrained least squares via the stacked-penalty construction.

Appending the equation ``C * sum(x) = C`` to a nonnegative least-squares
problem makes the solution approximately sum to one once ``C`` is large; the
residual violation is removed by an exact renormalization afterwards. On the
normal equations the stacked row simply adds ``C**2`` to every entry of the
Gram matrix and of the linear term, so one Gram factorization serves all
target columns.

The NNLS kernel backend is chosen at import: the compiled extension when it
was built, the pure-NumPy fallback otherwise. Set ``BIARCH_BACKEND=python``
to force the fallback.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import _nnls_py
from .errors import DimensionMismatch, NonFinite

try:
    from . import _nnls_cy
except ImportError:  # extension not built
    _nnls_cy = None

if _nnls_cy is None or os.environ.get("BIARCH_BACKEND", "").lower() == "python":
    _backend = _nnls_py
else:
    _backend = _nnls_cy


def backend_name() -> str:
    """Which NNLS kernel is active: ``"compiled"`` or ``"python"``."""
    return "python" if _backend is _nnls_py else "compiled"


@dataclass(frozen=True)
class PenaltyProblem:
    """A multi-target least-squares problem with a simplex penalty constant."""

    design: np.ndarray  # (p, k)
    targets: np.ndarray  # (p, m)
    penalty_c: float = 200.0

    def __post_init__(self):
        design = np.ascontiguousarray(self.design, dtype=np.float64)
        targets = np.ascontiguousarray(self.targets, dtype=np.float64)
        if design.ndim != 2 or targets.ndim != 2:
            raise DimensionMismatch("design and targets must be 2-D")
        if design.shape[0] != targets.shape[0]:
            raise DimensionMismatch(
                f"design has {design.shape[0]} rows, targets {targets.shape[0]}"
            )
        if not (np.isfinite(design).all() and np.isfinite(targets).all()):
            raise NonFinite("penalty problem contains NaN or infinite entries")
        if not self.penalty_c > 0:
            raise ValueError("penalty_c must be positive")
        object.__setattr__(self, "design", design)
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "penalty_c", float(self.penalty_c))


def nnls(A, b, max_iter: int | None = None) -> np.ndarray:
    """Solve min ||Ax - b||^2 subject to x >= 0 (active-set method).

    Parameters
    ----------
    A : array_like, shape (p, k)
    b : array_like, shape (p,)
    max_iter : int, optional
        Cycle guard on active-set adjustments; defaults to ``3 * k``.

    Raises
    ------
    MaxIterationsExceeded
        If the guard trips (floating-point cycling on degenerate input).
    """
    A = np.ascontiguousarray(A, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    if A.ndim != 2 or b.ndim != 1 or A.shape[0] != b.shape[0]:
        raise DimensionMismatch(f"incompatible shapes {A.shape} and {b.shape}")
    if not (np.isfinite(A).all() and np.isfinite(b).all()):
        raise NonFinite("nnls input contains NaN or infinite entries")
    k = A.shape[1]
    if max_iter is None:
        max_iter = 3 * k
    gram = np.ascontiguousarray(A.T @ A)
    lin = np.ascontiguousarray(A.T @ b)
    return _backend.nnls_gram_multi(gram, lin[:, None], int(max_iter))[:, 0]


def _penalized_columns(problem: PenaltyProblem) -> np.ndarray:
    """Raw stacked-penalty solution, one nonnegative column per target."""
    A = problem.design
    B = problem.targets
    k = A.shape[1]
    c2 = problem.penalty_c * problem.penalty_c
    gram = np.ascontiguousarray(A.T @ A + c2)
    lin = np.ascontiguousarray(A.T @ B + c2)
    return _backend.nnls_gram_multi(gram, lin, 3 * k)


def solve_simplex_ls(problem: PenaltyProblem) -> np.ndarray:
    """Least-squares fit of each target column by a convex combination.

    Returns a (k, m) matrix whose columns are nonnegative and sum to exactly
    one: each column solves the penalty-stacked NNLS problem and is then
    renormalized. A column that comes back identically zero (target outside
    the conic span of the design) falls back to the uniform vector 1/k.
    """
    X = _penalized_columns(problem)
    k = X.shape[0]
    sums = X.sum(axis=0)
    dead = sums <= 0.0
    if np.any(dead):
        X[:, dead] = 1.0 / k
        sums = X.sum(axis=0)
    return X / sums
