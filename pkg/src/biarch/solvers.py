"""Alternating solvers.

``fit_biaa`` minimizes ||X - alpha Z gamma||^2 over row-stochastic
memberships alpha (n x k), column-stochastic memberships gamma (c x m) and a
biarchetype matrix Z = beta X theta built from row mixtures beta (k x n) and
column mixtures theta (m x c). Each sweep alternates exact-as-possible
simplex-constrained least squares updates of the four factors with two
recomputations of Z: an unconstrained pseudoinverse refresh in the middle of
the sweep and the constrained product beta X theta at the end. Because the
end-of-sweep Z restores the mixture structure, the iterate with the lowest
RSS among those end-of-sweep states is retained and returned.

``fit_aa`` is the special case with the column side frozen at the identity,
and ``fit_double_kmeans`` is the hard-assignment baseline minimizing the same
objective with binary memberships.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import DimensionMismatch
from .simplex import PenaltyProblem, solve_simplex_ls
from .types import (
    COLUMNS,
    ROWS,
    BiaaModel,
    DataMatrix,
    FitConfig,
    StochasticMatrix,
    as_data_matrix,
    validate_stochastic,
)

# Singular values below this fraction of the largest are treated as zero when
# refreshing Z through pseudoinverses (memberships can be rank deficient).
_PINV_RCOND = 1e-10
# Stop once the best RSS has failed to improve by rel_tol for this many
# consecutive sweeps (alternating schemes plateau noisily).
_STALL_LIMIT = 10
# Two rows of Z closer than this flag an archetype collapse (k too large).
_COLLAPSE_TOL = 1e-8


def _values(obj) -> np.ndarray:
    if isinstance(obj, (StochasticMatrix, DataMatrix)):
        return obj.values
    return np.asarray(obj, dtype=np.float64)


def _reconstruction(alpha: np.ndarray, z: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    # fixed association so stored and recomputed RSS agree bit for bit
    return alpha @ (z @ gamma)


def rss(X, alpha, z, gamma) -> float:
    """Squared Frobenius norm of X - alpha Z gamma."""
    Xv = _values(X)
    av = _values(alpha)
    zv = np.asarray(z, dtype=np.float64)
    gv = _values(gamma)
    n, m = Xv.shape
    if av.shape[0] != n or gv.shape[1] != m or av.shape[1] != zv.shape[0] \
            or zv.shape[1] != gv.shape[0]:
        raise DimensionMismatch(
            f"X {Xv.shape}, alpha {av.shape}, z {zv.shape}, gamma {gv.shape}"
        )
    resid = Xv - _reconstruction(av, zv, gv)
    return float(np.sum(resid * resid))


@dataclass
class _RunResult:
    alpha: np.ndarray
    beta: np.ndarray
    theta: np.ndarray
    gamma: np.ndarray
    z: np.ndarray
    rss: float
    trace: list
    iterations: int
    converged: bool
    collapsed: bool
    step_rss: list  # (before, after steps a+b) pairs when recorded


def _random_simplex(rng: np.random.Generator, shape: tuple[int, int], axis: int):
    w = rng.random(shape)
    w /= w.sum(axis=axis, keepdims=True)
    return w


def _simplex_cols(design, targets, penalty_c):
    return solve_simplex_ls(PenaltyProblem(design, targets, penalty_c))


def _collapsed_rows(z: np.ndarray) -> bool:
    k = z.shape[0]
    for g in range(k):
        for h in range(g + 1, k):
            if np.max(np.abs(z[g] - z[h])) <= _COLLAPSE_TOL:
                return True
    return False


def _run_alternation(
    X: np.ndarray,
    config: FitConfig,
    *,
    rng: Optional[np.random.Generator] = None,
    init=None,
    identity_columns: bool = False,
    record_steps: bool = False,
) -> _RunResult:
    """One randomized run of the alternating scheme; returns its best iterate."""
    n, m = X.shape
    k, c = config.k, config.c
    C = config.penalty_c

    if init is not None:
        alpha, beta, theta, gamma = (np.array(a, dtype=np.float64) for a in init)
    else:
        # fixed draw order so runs are reproducible from the restart stream
        alpha = _random_simplex(rng, (n, k), axis=1)
        beta = _random_simplex(rng, (k, n), axis=1)
        if identity_columns:
            theta = np.eye(m)
            gamma = np.eye(m)
        else:
            theta = _random_simplex(rng, (m, c), axis=0)
            gamma = _random_simplex(rng, (c, m), axis=0)

    z = (beta @ X) @ theta
    best = None
    stall = 0
    trace: list = []
    step_rss: list = []
    converged = False
    collapsed = False
    iterations = 0

    for _ in range(config.max_iter):
        iterations += 1
        if record_steps:
            before = rss(X, alpha, z, gamma)

        # memberships for fixed archetypes: rows of X against the archetype
        # profiles Z gamma, then features against the profile mixtures alpha Z
        alpha = _simplex_cols((z @ gamma).T, X.T, C).T
        if not identity_columns:
            gamma = _simplex_cols(alpha @ z, X, C)
        if record_steps:
            step_rss.append((before, rss(X, alpha, z, gamma)))

        # unconstrained refresh of Z via pseudoinverses. The minimum-change
        # form Z + pinv(alpha)(X - alpha Z gamma)pinv(gamma) satisfies the
        # same normal equations as pinv(alpha) X pinv(gamma) and equals it
        # whenever alpha and gamma are full rank, but when archetypes
        # collapse (rank-deficient memberships) it leaves the redundant rows
        # of Z at their previous, mixture-representable values instead of
        # shrinking them toward zero, which the later mixture updates cannot
        # reproduce and which otherwise drags the whole iteration into a
        # degenerate attractor.
        if identity_columns:
            z = z + np.linalg.pinv(alpha, rcond=_PINV_RCOND) @ (X - alpha @ z)
        else:
            z = z + (
                np.linalg.pinv(alpha, rcond=_PINV_RCOND)
                @ (X - alpha @ (z @ gamma))
                @ np.linalg.pinv(gamma, rcond=_PINV_RCOND)
            )
        beta = _simplex_cols((X @ theta).T, z.T, C).T
        if not identity_columns:
            theta = _simplex_cols(beta @ X, z, C)
        z = (beta @ X) @ theta

        if not collapsed and _collapsed_rows(z):
            collapsed = True

        r = rss(X, alpha, z, gamma)
        trace.append(r)
        if best is None:
            best = (alpha, beta, theta, gamma, z, r)
            stall = 0
        elif r < best[5]:
            improvement = (best[5] - r) / best[5]
            best = (alpha, beta, theta, gamma, z, r)
            stall = 0 if improvement >= config.rel_tol else stall + 1
        else:
            stall += 1
        if best[5] == 0.0 or stall >= _STALL_LIMIT:
            converged = True
            break

    alpha, beta, theta, gamma, z, r = best
    return _RunResult(
        alpha, beta, theta, gamma, z, r,
        trace, iterations, converged, collapsed, step_rss,
    )


def _map_restarts(fn, count: int, threads: int):
    if threads <= 1:
        return [fn(r) for r in range(count)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(count)))


def _check_dims(config: FitConfig, data: DataMatrix):
    if config.k > data.n:
        raise DimensionMismatch(f"k={config.k} exceeds n={data.n}")
    if config.c > data.m:
        raise DimensionMismatch(f"c={config.c} exceeds m={data.m}")


def _finalize(X: np.ndarray, run: _RunResult, config: FitConfig) -> BiaaModel:
    alpha = validate_stochastic(run.alpha, ROWS)
    beta = validate_stochastic(run.beta, ROWS)
    theta = validate_stochastic(run.theta, COLUMNS)
    gamma = validate_stochastic(run.gamma, COLUMNS)
    z = (beta.values @ X) @ theta.values
    final_rss = rss(X, alpha.values, z, gamma.values)
    return BiaaModel(
        alpha=alpha,
        beta=beta,
        theta=theta,
        gamma=gamma,
        z=z,
        rss=final_rss,
        iterations=run.iterations,
        rss_trace=tuple(run.trace),
        converged=run.converged,
        collapsed=run.collapsed,
        config=config,
    )


def fit_biaa(
    data,
    config: FitConfig,
    *,
    identity_columns: bool = False,
    init=None,
    threads: int = 1,
) -> BiaaModel:
    """Fit row and column archetypes by alternating minimization.

    Runs ``config.n_restarts`` independent randomized starts (each with its
    own random stream derived from ``(seed, restart)``) and returns the best
    end-of-sweep iterate across all of them. With ``identity_columns=True``
    the column side is frozen at the identity (requires ``c == m``), which is
    plain archetype analysis of the rows.

    ``init`` bypasses the random starts with explicit (alpha, beta, theta,
    gamma) arrays and performs a single run; ``threads`` parallelizes the
    restarts without affecting the result.
    """
    X = as_data_matrix(data)
    _check_dims(config, X)
    if identity_columns and config.c != X.m:
        raise DimensionMismatch(
            f"identity column mode requires c == m, got c={config.c}, m={X.m}"
        )
    if init is not None:
        runs = [
            _run_alternation(
                X.values, config, init=init, identity_columns=identity_columns
            )
        ]
    else:
        def one(r: int) -> _RunResult:
            return _run_alternation(
                X.values,
                config,
                rng=np.random.default_rng([config.seed, r]),
                identity_columns=identity_columns,
            )

        runs = _map_restarts(one, config.n_restarts, threads)
    best = min(enumerate(runs), key=lambda item: (item[1].rss, item[0]))[1]
    return _finalize(X.values, best, config)


def fit_aa(data, k: int, config: FitConfig, *, threads: int = 1) -> BiaaModel:
    """Archetype analysis of the rows: ``fit_biaa`` with identity columns.

    The returned model has ``gamma`` and ``theta`` equal to the m x m
    identity and shares the biarchetype fit loop, so traces match the
    column-frozen biarchetype fit bit for bit under the same seed.
    """
    X = as_data_matrix(data)
    cfg = replace(config, k=k, c=X.m)
    return fit_biaa(X, cfg, identity_columns=True, threads=threads)


def grand_mean_model(data) -> BiaaModel:
    """Closed-form k = c = 1 model: the single biarchetype is the grand mean."""
    X = as_data_matrix(data)
    n, m = X.values.shape
    alpha = validate_stochastic(np.ones((n, 1)), ROWS)
    beta = validate_stochastic(np.full((1, n), 1.0 / n), ROWS)
    theta = validate_stochastic(np.full((m, 1), 1.0 / m), COLUMNS)
    gamma = validate_stochastic(np.ones((1, m)), COLUMNS)
    z = (beta.values @ X.values) @ theta.values
    r = rss(X.values, alpha.values, z, gamma.values)
    return BiaaModel(
        alpha=alpha,
        beta=beta,
        theta=theta,
        gamma=gamma,
        z=z,
        rss=r,
        iterations=0,
        rss_trace=(r,),
        converged=True,
        collapsed=False,
        config=FitConfig(k=1, c=1, seed=0),
    )


def reconstruct(model: BiaaModel) -> np.ndarray:
    """The fitted approximation alpha Z gamma of the training matrix."""
    return _reconstruction(model.alpha.values, model.z, model.gamma.values)


def project_rows(model: BiaaModel, data) -> StochasticMatrix:
    """Memberships of new observations against the fitted archetype profiles.

    Solves only the row-membership subproblem (fixed Z and gamma), so rows of
    ``data`` must have the training feature count.
    """
    X = as_data_matrix(data)
    if X.m != model.m:
        raise DimensionMismatch(f"new data has {X.m} columns, model expects {model.m}")
    profiles = model.z @ model.gamma.values  # (k, m)
    weights = _simplex_cols(profiles.T, X.values.T, model.config.penalty_c).T
    return validate_stochastic(weights, ROWS)


@dataclass(frozen=True)
class DoubleKMeansModel:
    """Hard biclustering result: 1-based row/column labels and block means."""

    row_assign: np.ndarray  # length n, labels in 1..k
    col_assign: np.ndarray  # length m, labels in 1..c
    centroids: np.ndarray  # (k, c) block means
    rss: float
    iterations: int
    rss_trace: tuple[float, ...]

    def __post_init__(self):
        rows = np.array(self.row_assign, dtype=np.int64)
        cols = np.array(self.col_assign, dtype=np.int64)
        cents = np.array(self.centroids, dtype=np.float64)
        k, c = cents.shape
        if rows.min() < 1 or rows.max() > k or cols.min() < 1 or cols.max() > c:
            raise ValueError("labels must lie in 1..k and 1..c")
        if len(np.unique(rows)) != k or len(np.unique(cols)) != c:
            raise ValueError("every group must be used at least once")
        for arr in (rows, cols, cents):
            arr.flags.writeable = False
        object.__setattr__(self, "row_assign", rows)
        object.__setattr__(self, "col_assign", cols)
        object.__setattr__(self, "centroids", cents)
        object.__setattr__(self, "rss", float(self.rss))
        object.__setattr__(
            self, "rss_trace", tuple(float(v) for v in self.rss_trace)
        )


def _block_means(X, row_lab, col_lab, k, c):
    n, m = X.shape
    R = np.zeros((n, k))
    R[np.arange(n), row_lab] = 1.0
    Cm = np.zeros((m, c))
    Cm[np.arange(m), col_lab] = 1.0
    counts = np.outer(R.sum(axis=0), Cm.sum(axis=0))
    return (R.T @ X @ Cm) / counts


def _ensure_coverage(labels: np.ndarray, groups: int) -> np.ndarray:
    # initial labels only: give each unused group the lowest index drawn from
    # the currently largest group
    labels = labels.copy()
    for g in range(groups):
        if not np.any(labels == g):
            counts = np.bincount(labels, minlength=groups)
            donor = int(np.argmax(counts))
            labels[int(np.flatnonzero(labels == donor)[0])] = g
    return labels


def _assignment_costs(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    # ||p - c||^2 for every point/center pair, (npoints, ncenters)
    sq_p = np.sum(points * points, axis=1)[:, None]
    sq_c = np.sum(centers * centers, axis=1)[None, :]
    return sq_p - 2.0 * points @ centers.T + sq_c


def _repair_empty(labels: np.ndarray, costs: np.ndarray, groups: int) -> np.ndarray:
    # reseed each empty group with the currently worst-fit item, never
    # emptying another group in the process
    labels = labels.copy()
    for g in range(groups):
        if np.any(labels == g):
            continue
        counts = np.bincount(labels, minlength=groups)
        own_cost = costs[np.arange(labels.size), labels]
        eligible = counts[labels] >= 2
        candidates = np.where(eligible, own_cost, -np.inf)
        labels[int(np.argmax(candidates))] = g
    return labels


def fit_double_kmeans(
    data, k: int, c: int, seed: int = 0, max_iter: int = 100
) -> DoubleKMeansModel:
    """Hard double k-means: binary memberships on both axes, block-mean Z.

    Alternates hard reassignment of rows (fixed column partition and
    centroids), hard reassignment of columns, and the block-mean centroid
    update; the objective is non-increasing every sweep. Empty groups are
    reseeded with the worst-fit row/column. Ties in assignment go to the
    lowest index.
    """
    X = as_data_matrix(data)
    n, m = X.values.shape
    if not 1 <= k <= n:
        raise DimensionMismatch(f"k={k} outside 1..{n}")
    if not 1 <= c <= m:
        raise DimensionMismatch(f"c={c} outside 1..{m}")
    V = X.values
    rng = np.random.default_rng(seed)
    row_lab = _ensure_coverage(rng.integers(0, k, size=n), k)
    col_lab = _ensure_coverage(rng.integers(0, c, size=m), c)
    Z = _block_means(V, row_lab, col_lab, k, c)

    trace = []
    sweeps = 0
    for _ in range(max_iter):
        sweeps += 1
        prev_rows, prev_cols = row_lab, col_lab

        row_profiles = Z[:, col_lab]  # (k, m)
        row_costs = _assignment_costs(V, row_profiles)
        row_lab = np.argmin(row_costs, axis=1)
        row_lab = _repair_empty(row_lab, row_costs, k)

        col_profiles = Z[row_lab, :]  # (n, c)
        col_costs = _assignment_costs(V.T, col_profiles.T)
        col_lab = np.argmin(col_costs, axis=1)
        col_lab = _repair_empty(col_lab, col_costs, c)

        Z = _block_means(V, row_lab, col_lab, k, c)
        resid = V - Z[row_lab][:, col_lab]
        trace.append(float(np.sum(resid * resid)))

        if np.array_equal(row_lab, prev_rows) and np.array_equal(col_lab, prev_cols):
            break

    return DoubleKMeansModel(
        row_assign=row_lab + 1,
        col_assign=col_lab + 1,
        centroids=Z,
        rss=trace[-1],
        iterations=sweeps,
        rss_trace=tuple(trace),
    )
