"""Independent oracles used by the test suite.

Everything here is deliberately brute-force or closed-form so expected
values never depend on the code paths under test.
"""

from __future__ import annotations

import itertools

import numpy as np


def adjusted_rand_index(a, b) -> float:
    """Chance-corrected agreement between two partitions (contingency form)."""
    a = np.asarray(a).ravel()
    b = np.asarray(b).ravel()
    _, ia = np.unique(a, return_inverse=True)
    _, ib = np.unique(b, return_inverse=True)
    table = np.zeros((ia.max() + 1, ib.max() + 1))
    np.add.at(table, (ia, ib), 1.0)

    def comb2(x):
        return x * (x - 1) / 2.0

    sum_cells = comb2(table).sum()
    sum_rows = comb2(table.sum(axis=1)).sum()
    sum_cols = comb2(table.sum(axis=0)).sum()
    total = comb2(float(a.size))
    expected = sum_rows * sum_cols / total
    maximum = (sum_rows + sum_cols) / 2.0
    if maximum == expected:
        return 1.0
    return float((sum_cells - expected) / (maximum - expected))


def projected_gradient_nnls(A, b, iters: int = 200_000, tol: float = 1e-14):
    """Long-run projected gradient descent for min ||Ax-b||^2, x >= 0."""
    A = np.asarray(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    G = A.T @ A
    f = A.T @ b
    step = 1.0 / max(np.linalg.eigvalsh(G).max(), 1e-12)
    x = np.zeros(A.shape[1])
    for _ in range(iters):
        nxt = np.maximum(0.0, x - step * (G @ x - f))
        if np.max(np.abs(nxt - x)) < tol:
            return nxt
        x = nxt
    return x


_GRID_CACHE: dict = {}


def simplex_grid(k: int, step: float = 0.001) -> np.ndarray:
    """All points of the (k-1)-simplex on a regular grid, as columns."""
    key = (k, step)
    if key in _GRID_CACHE:
        return _GRID_CACHE[key]
    steps = int(round(1.0 / step))
    if k == 1:
        grid = np.ones((1, 1))
    elif k == 2:
        w = np.arange(steps + 1) / steps
        grid = np.vstack([w, 1.0 - w])
    elif k == 3:
        i, j = np.meshgrid(np.arange(steps + 1), np.arange(steps + 1), indexing="ij")
        keep = (i + j) <= steps
        w1 = i[keep] / steps
        w2 = j[keep] / steps
        grid = np.vstack([w1, w2, 1.0 - w1 - w2])
    else:
        raise ValueError("grid oracle supports k <= 3 only")
    _GRID_CACHE[key] = grid
    return grid


def simplex_grid_search_rss(A, b, step: float = 0.001) -> float:
    """Exhaustive simplex search of min ||Ax-b||^2 at the given resolution."""
    A = np.asarray(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64).ravel()
    W = simplex_grid(A.shape[1], step)
    resid = A @ W - b[:, None]
    return float(np.min(np.sum(resid * resid, axis=0)))


def toy_rank2_row_oracle_rss(X, step: float = 0.01) -> float:
    """Brute force over 1-D archetype pairs for the c = 1 member of the grid.

    With a single column archetype the reconstruction is constant along each
    row and clamped into [min(z), max(z)]; scan all (lo, hi) pairs on a grid
    over the data range. The clamp penalty splits into a lo-part and a
    hi-part, which keeps the exhaustive pair scan cheap.
    """
    X = np.asarray(X, dtype=np.float64)
    m = X.shape[1]
    row_means = X.mean(axis=1)
    base = float(np.sum((X - row_means[:, None]) ** 2))
    zs = np.arange(float(X.min()), float(X.max()) + step / 2, step)
    below = np.clip(zs[:, None] - row_means[None, :], 0.0, None)  # lo above mean
    above = np.clip(row_means[None, :] - zs[:, None], 0.0, None)  # hi below mean
    g_lo = np.sum(below * below, axis=1)
    g_hi = np.sum(above * above, axis=1)
    penalty = g_lo[:, None] + g_hi[None, :]
    lo_le_hi = zs[:, None] <= zs[None, :]
    return base + m * float(np.min(np.where(lo_le_hi, penalty, np.inf)))


def convex_hull_2d(points: np.ndarray) -> np.ndarray:
    """Vertices of the convex hull of 2-D points (monotone chain)."""
    pts = sorted(map(tuple, np.asarray(points, dtype=np.float64)))
    if len(pts) <= 2:
        return np.asarray(pts)

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return np.asarray(lower[:-1] + upper[:-1])


def best_row_match_error(fitted: np.ndarray, reference: np.ndarray) -> float:
    """Max elementwise error under the best row permutation."""
    fitted = np.asarray(fitted)
    best = np.inf
    for perm in itertools.permutations(range(reference.shape[0])):
        err = float(np.max(np.abs(fitted[list(perm)] - reference)))
        best = min(best, err)
    return best


def best_biarchetype_match_error(fitted: np.ndarray, reference: np.ndarray) -> float:
    """Max elementwise error under the best simultaneous row/column permutation."""
    fitted = np.asarray(fitted)
    k, c = reference.shape
    best = np.inf
    for rp in itertools.permutations(range(k)):
        sub = fitted[list(rp)]
        for cp in itertools.permutations(range(c)):
            err = float(np.max(np.abs(sub[:, list(cp)] - reference)))
            best = min(best, err)
    return best
