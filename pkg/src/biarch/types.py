"""Core numerical data model.

All containers are immutable: arrays are copied to float64 on construction
and marked read-only, so instances can be shared across threads without
locking.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    ConstantColumn,
    DimensionMismatch,
    NonFinite,
    NotStochastic,
)

ROWS = "rows"
COLUMNS = "columns"

# Two-tier stochastic tolerance: deviations beyond the hard bound are treated
# as corrupt input; anything within it is silently projected/renormalized
# (penalized least squares only enforces the simplex approximately).
STOCHASTIC_HARD_TOL = 1e-3
STOCHASTIC_SUM_TOL = 1e-6
STOCHASTIC_NEG_TOL = 1e-9


def _as_matrix(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=np.float64, order="C")
    if arr.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionMismatch(f"{name} must be non-empty, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise NonFinite(f"{name} contains NaN or infinite entries")
    arr.flags.writeable = False
    return arr


def _as_vector(values, length: int, name: str) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    if arr.shape != (length,):
        raise DimensionMismatch(f"{name} must have length {length}")
    if not np.isfinite(arr).all():
        raise NonFinite(f"{name} contains NaN or infinite entries")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class DataMatrix:
    """Dense observations-by-features matrix with optional scaling metadata.

    Parameters
    ----------
    values : array_like, shape (n, m)
        Observations in rows, features in columns. Must be finite.
    column_means, column_stds : array_like of length m, optional
        Recorded by :func:`standardize` so the transform can be inverted.
    column_names : tuple of str, optional
        Feature names carried along from CSV headers for labeling outputs.
    """

    values: np.ndarray
    column_means: Optional[np.ndarray] = None
    column_stds: Optional[np.ndarray] = None
    column_names: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "values", _as_matrix(self.values, "values"))
        m = self.values.shape[1]
        if self.column_means is not None:
            object.__setattr__(
                self, "column_means", _as_vector(self.column_means, m, "column_means")
            )
        if self.column_stds is not None:
            stds = _as_vector(self.column_stds, m, "column_stds")
            if np.any(stds <= 0.0):
                raise ValueError("recorded column stds must be positive")
            object.__setattr__(self, "column_stds", stds)
        if self.column_names is not None:
            names = tuple(str(s) for s in self.column_names)
            if len(names) != m:
                raise DimensionMismatch("column_names length must equal m")
            object.__setattr__(self, "column_names", names)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]


def as_data_matrix(data) -> DataMatrix:
    """Coerce an array or DataMatrix into a DataMatrix."""
    if isinstance(data, DataMatrix):
        return data
    return DataMatrix(np.asarray(data, dtype=np.float64))


@dataclass(frozen=True)
class StochasticMatrix:
    """Nonnegative matrix whose vectors along ``stochastic_axis`` sum to one.

    Construction is strict (entries >= -1e-9, sums within 1e-6 of one); use
    :func:`validate_stochastic` to project and renormalize drifted input.
    """

    values: np.ndarray
    stochastic_axis: str

    def __post_init__(self):
        if self.stochastic_axis not in (ROWS, COLUMNS):
            raise ValueError(f"stochastic_axis must be {ROWS!r} or {COLUMNS!r}")
        arr = _as_matrix(self.values, "values")
        if np.any(arr < -STOCHASTIC_NEG_TOL):
            raise NotStochastic(
                f"negative entry {float(arr.min()):.3e} below projection tolerance"
            )
        axis = 1 if self.stochastic_axis == ROWS else 0
        sums = arr.sum(axis=axis)
        worst = float(np.max(np.abs(sums - 1.0)))
        if worst > STOCHASTIC_SUM_TOL:
            raise NotStochastic(
                f"{self.stochastic_axis} sums deviate from 1 by up to {worst:.3e}"
            )
        object.__setattr__(self, "values", arr)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


def validate_stochastic(values, axis: str) -> StochasticMatrix:
    """Project a nearly-stochastic matrix onto the simplex structure.

    Entries in [-1e-3, 0) are clamped to zero and each vector along ``axis``
    is renormalized to sum to one. Deviations beyond 1e-3 (a negative entry
    below -1e-3, or an axis sum off by more than 1e-3) are rejected as
    corrupt input rather than solver drift.
    """
    if axis not in (ROWS, COLUMNS):
        raise ValueError(f"axis must be {ROWS!r} or {COLUMNS!r}")
    arr = _as_matrix(values, "matrix").copy()
    lowest = float(arr.min())
    if lowest < -STOCHASTIC_HARD_TOL:
        raise NotStochastic(f"entry {lowest:.6g} below -{STOCHASTIC_HARD_TOL}")
    work = arr if axis == ROWS else arr.T
    sums = work.sum(axis=1)
    worst = float(np.max(np.abs(sums - 1.0)))
    if worst > STOCHASTIC_HARD_TOL:
        raise NotStochastic(
            f"{axis} sums deviate from 1 by up to {worst:.6g} (> {STOCHASTIC_HARD_TOL})"
        )
    np.clip(work, 0.0, None, out=work)
    work /= work.sum(axis=1, keepdims=True)
    return StochasticMatrix(arr, axis)


@dataclass(frozen=True)
class FitConfig:
    """Knobs for the alternating fit.

    ``penalty_c`` is the constant appended as an extra equation to each
    least-squares subproblem; larger values enforce the sum-to-one constraint
    more tightly at the cost of conditioning.
    """

    k: int
    c: int
    penalty_c: float = 200.0
    max_iter: int = 500
    rel_tol: float = 1e-6
    n_restarts: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.k < 1 or self.c < 1:
            raise ValueError("k and c must be >= 1")
        if not self.penalty_c > 0:
            raise ValueError("penalty_c must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.n_restarts < 1:
            raise ValueError("n_restarts must be >= 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class BiaaModel:
    """Fitted factors of the rank-(k, c) convex factorization X ~ alpha Z gamma.

    ``z`` always satisfies z = beta @ X @ theta for the training matrix, so
    each row of z is a convex mixture of rows of (X theta) and each column a
    convex mixture of columns of (beta X).
    """

    alpha: StochasticMatrix  # (n, k), rows on the simplex
    beta: StochasticMatrix  # (k, n), rows on the simplex
    theta: StochasticMatrix  # (m, c), columns on the simplex
    gamma: StochasticMatrix  # (c, m), columns on the simplex
    z: np.ndarray  # (k, c)
    rss: float
    iterations: int
    rss_trace: tuple[float, ...]
    converged: bool
    collapsed: bool
    config: FitConfig

    def __post_init__(self):
        n, k = self.alpha.shape
        m, c = self.theta.shape
        if self.beta.shape != (k, n):
            raise DimensionMismatch(f"beta shape {self.beta.shape} != {(k, n)}")
        if self.gamma.shape != (c, m):
            raise DimensionMismatch(f"gamma shape {self.gamma.shape} != {(c, m)}")
        z = _as_matrix(self.z, "z")
        if z.shape != (k, c):
            raise DimensionMismatch(f"z shape {z.shape} != {(k, c)}")
        object.__setattr__(self, "z", z)
        rss = float(self.rss)
        if not np.isfinite(rss) or rss < 0:
            raise ValueError("rss must be a nonnegative finite real")
        object.__setattr__(self, "rss", rss)
        object.__setattr__(
            self, "rss_trace", tuple(float(v) for v in self.rss_trace)
        )

    @property
    def n(self) -> int:
        return self.alpha.shape[0]

    @property
    def m(self) -> int:
        return self.theta.shape[0]

    @property
    def k(self) -> int:
        return self.alpha.shape[1]

    @property
    def c(self) -> int:
        return self.theta.shape[1]


@dataclass(frozen=True)
class RssSurface:
    """Best RSS per (k, c) cell plus the suggested elbow, if any.

    ``rss_grid[i, j]`` is the cell (k_range[0] + i, c_range[0] + j); NaN marks
    a cell whose fit failed. ``suggested_k``/``suggested_c`` are None when no
    cell qualifies under ``flatten_threshold``.
    """

    k_range: tuple[int, int]
    c_range: tuple[int, int]
    rss_grid: np.ndarray
    suggested_k: Optional[int]
    suggested_c: Optional[int]
    flatten_threshold: float

    def __post_init__(self):
        k_lo, k_hi = (int(v) for v in self.k_range)
        c_lo, c_hi = (int(v) for v in self.c_range)
        if not (1 <= k_lo <= k_hi and 1 <= c_lo <= c_hi):
            raise ValueError("ranges must be non-empty and start at >= 1")
        object.__setattr__(self, "k_range", (k_lo, k_hi))
        object.__setattr__(self, "c_range", (c_lo, c_hi))
        grid = np.array(self.rss_grid, dtype=np.float64)
        if grid.shape != (k_hi - k_lo + 1, c_hi - c_lo + 1):
            raise DimensionMismatch("rss_grid shape does not match the ranges")
        finite = grid[np.isfinite(grid)]
        if np.any(finite < 0):
            raise ValueError("rss grid entries must be nonnegative")
        grid.flags.writeable = False
        object.__setattr__(self, "rss_grid", grid)
        if not 0 < self.flatten_threshold < 1:
            raise ValueError("flatten_threshold must lie in (0, 1)")

    def cell(self, k: int, c: int) -> float:
        """RSS of the cell for the given (k, c)."""
        return float(self.rss_grid[k - self.k_range[0], c - self.c_range[0]])


def standardize(data) -> DataMatrix:
    """Center each column to mean 0 and scale it to unit population std.

    The population convention (divide by n, not n-1) is used; the applied
    means/stds are recorded on the result so :func:`inverse_standardize` can
    undo the transform.
    """
    X = as_data_matrix(data)
    mu = X.values.mean(axis=0)
    sd = X.values.std(axis=0)  # population convention (ddof = 0)
    zero = np.flatnonzero(sd == 0.0)
    if zero.size:
        raise ConstantColumn(int(zero[0]))
    vals = (X.values - mu) / sd
    return DataMatrix(
        vals, column_means=mu, column_stds=sd, column_names=X.column_names
    )


def inverse_standardize(data: DataMatrix) -> DataMatrix:
    """Undo :func:`standardize` using the recorded per-column means/stds."""
    if data.column_means is None or data.column_stds is None:
        raise ValueError("matrix carries no standardization metadata")
    vals = data.values * data.column_stds + data.column_means
    return DataMatrix(vals, column_names=data.column_names)
