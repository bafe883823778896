"""Reference fixtures and synthetic generators.

All generators are pure functions of their arguments (including the seed), so
repeated calls are bit-identical.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidRho
from .types import DataMatrix


def toy_matrix() -> DataMatrix:
    """The 5x5 matrix with entries 1..25 laid out row-major.

    Its exact low-rank optima are known in closed form (grand mean 13,
    column means 11..15, row means 3..23, and an exact rank-(2, 2) convex
    factorization with corners 1, 5, 21, 25), which makes it the standard
    smoke fixture for the solvers.
    """
    values = np.arange(1, 26, dtype=np.float64).reshape(5, 5)
    return DataMatrix(values)


def _two_block_covariance(size: int, split: int, rho: float) -> np.ndarray:
    labels = np.ones(size, dtype=np.int64)
    labels[split:] = 2
    cov = np.where(labels[:, None] == labels[None, :], rho, 0.0)
    np.fill_diagonal(cov, 1.0)
    return cov


def simulate_block_gaussian(
    n: int = 50,
    m: int = 50,
    block_split_rows: int | None = None,
    block_split_cols: int | None = None,
    rho: float = 0.8,
    seed: int = 0,
) -> tuple[DataMatrix, np.ndarray, np.ndarray]:
    """Zero-mean Gaussian matrix with two correlated blocks on each axis.

    Both axes get a covariance with unit diagonal, within-block correlation
    ``rho`` and zero across blocks; the sample is the two-sided (matrix
    normal) transform ``L_rows @ G @ L_cols.T`` of an i.i.d. standard normal
    matrix G, where L are the Cholesky factors. Returns the matrix plus the
    1-based planted row and column block labels.

    Splits default to halving each axis; ``rho`` must lie in [0, 1) for the
    covariances to be positive definite.
    """
    if not 0.0 <= rho < 1.0:
        raise InvalidRho(f"rho={rho} outside the positive-definite range [0, 1)")
    split_r = n // 2 if block_split_rows is None else int(block_split_rows)
    split_c = m // 2 if block_split_cols is None else int(block_split_cols)
    if not (1 <= split_r < n and 1 <= split_c < m):
        raise ValueError("block splits must leave two non-empty blocks")
    try:
        chol_r = np.linalg.cholesky(_two_block_covariance(n, split_r, rho))
        chol_c = np.linalg.cholesky(_two_block_covariance(m, split_c, rho))
    except np.linalg.LinAlgError as exc:
        raise InvalidRho(f"covariance not positive definite for rho={rho}") from exc
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((n, m))
    values = chol_r @ noise @ chol_c.T
    row_labels = np.ones(n, dtype=np.int64)
    row_labels[split_r:] = 2
    col_labels = np.ones(m, dtype=np.int64)
    col_labels[split_c:] = 2
    return DataMatrix(values), row_labels, col_labels


def planted_block_matrix(
    n: int,
    m: int,
    k: int,
    c: int,
    block_values,
    noise_sigma: float = 0.0,
    seed: int = 0,
) -> tuple[DataMatrix, np.ndarray, np.ndarray]:
    """Block-constant matrix plus optional i.i.d. Gaussian noise.

    Rows are split into k contiguous groups and columns into c groups (as
    evenly as possible); entry (i, j) is ``block_values[g, h]`` for the
    groups of i and j, plus N(0, noise_sigma^2) noise. Returns the matrix and
    the 1-based planted labels.
    """
    values = np.asarray(block_values, dtype=np.float64)
    if values.shape != (k, c):
        raise ValueError(f"block_values must be {k}x{c}, got {values.shape}")
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be nonnegative")
    row_groups = np.concatenate(
        [np.full(len(chunk), g) for g, chunk in enumerate(np.array_split(np.arange(n), k))]
    )
    col_groups = np.concatenate(
        [np.full(len(chunk), h) for h, chunk in enumerate(np.array_split(np.arange(m), c))]
    )
    X = values[row_groups][:, col_groups]
    if noise_sigma > 0:
        X = X + noise_sigma * np.random.default_rng(seed).standard_normal((n, m))
    return DataMatrix(X), row_groups + 1, col_groups + 1
