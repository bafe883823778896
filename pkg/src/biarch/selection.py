"""Model selection: RSS elbow surface over a (k, c) grid.

The elbow heuristic is formalized as the first cell, in (k + c, then k)
order, whose largest relative RSS drop toward its three forward neighbors
(k+1, c), (k, c+1), (k+1, c+1) falls below a threshold: the surface has
flattened there.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from typing import Optional

import numpy as np

from .errors import BiarchError, DimensionMismatch, NoElbow
from .solvers import fit_biaa
from .types import FitConfig, RssSurface, as_data_matrix

DEFAULT_FLATTEN_THRESHOLD = 0.05


def _cell_seed(seed: int, k: int, c: int) -> int:
    # independent stream per cell so parallel and serial sweeps agree
    return int(np.random.SeedSequence([seed, k, c]).generate_state(1, np.uint64)[0])


def rss_surface(
    data,
    k_range: tuple[int, int],
    c_range: tuple[int, int],
    config: FitConfig,
    *,
    flatten_threshold: float = DEFAULT_FLATTEN_THRESHOLD,
    threads: int = 1,
) -> RssSurface:
    """Best-of-restarts RSS for every cell of an inclusive (k, c) grid.

    ``config`` provides the per-cell fitting knobs; its ``k``/``c`` are
    overridden and its ``seed`` is mixed with (k, c) so cells are independent
    and reproducible regardless of sweep order. A cell whose fit raises is
    recorded as NaN and excluded from the elbow suggestion.
    """
    X = as_data_matrix(data)
    k_lo, k_hi = (int(v) for v in k_range)
    c_lo, c_hi = (int(v) for v in c_range)
    if not (1 <= k_lo <= k_hi <= X.n):
        raise DimensionMismatch(f"k range {k_range} outside [1, {X.n}]")
    if not (1 <= c_lo <= c_hi <= X.m):
        raise DimensionMismatch(f"c range {c_range} outside [1, {X.m}]")

    cells = [(k, c) for k in range(k_lo, k_hi + 1) for c in range(c_lo, c_hi + 1)]

    def one(cell: tuple[int, int]) -> float:
        k, c = cell
        cfg = replace(config, k=k, c=c, seed=_cell_seed(config.seed, k, c))
        try:
            return fit_biaa(X, cfg).rss
        except BiarchError:
            return float("nan")

    if threads <= 1:
        values = [one(cell) for cell in cells]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = list(pool.map(one, cells))

    grid = np.array(values).reshape(k_hi - k_lo + 1, c_hi - c_lo + 1)
    try:
        suggested_k, suggested_c = _suggest(grid, (k_lo, k_hi), (c_lo, c_hi),
                                            flatten_threshold)
    except NoElbow:
        suggested_k = suggested_c = None
    return RssSurface(
        k_range=(k_lo, k_hi),
        c_range=(c_lo, c_hi),
        rss_grid=grid,
        suggested_k=suggested_k,
        suggested_c=suggested_c,
        flatten_threshold=flatten_threshold,
    )


def _forward_drops(grid: np.ndarray, i: int, j: int, floor: float) -> Optional[float]:
    base = grid[i, j]
    neighbors = (grid[i + 1, j], grid[i, j + 1], grid[i + 1, j + 1])
    if not np.isfinite(base) or not all(np.isfinite(v) for v in neighbors):
        return None
    if base <= floor:
        # nothing left to explain: ratios between numerically-zero residuals
        # are rounding noise, so the surface is flat here by definition
        return 0.0
    return max((base - v) / base for v in neighbors)


def _suggest(grid, k_range, c_range, threshold) -> tuple[int, int]:
    k_lo, k_hi = k_range
    c_lo, c_hi = c_range
    finite = grid[np.isfinite(grid)]
    floor = 1e-12 * float(finite.max()) if finite.size else 0.0
    candidates = [
        (k, c)
        for k in range(k_lo, k_hi)
        for c in range(c_lo, c_hi)
    ]
    candidates.sort(key=lambda cell: (cell[0] + cell[1], cell[0]))
    for k, c in candidates:
        drop = _forward_drops(grid, k - k_lo, c - c_lo, floor)
        if drop is not None and drop < threshold:
            return k, c
    raise NoElbow(
        f"no cell in k {k_range}, c {c_range} has all forward drops below "
        f"{threshold}; extend the ranges"
    )


def suggest_elbow(
    surface: RssSurface, threshold: float = DEFAULT_FLATTEN_THRESHOLD
) -> tuple[int, int]:
    """First (k + c, then k)-ordered cell whose forward drops are all below
    ``threshold``; raises NoElbow when the surface never flattens.

    Cells whose RSS is numerically zero (below 1e-12 of the grid's largest
    value) count as flat: relative drops between exhausted residuals carry
    no information.
    """
    return _suggest(surface.rss_grid, surface.k_range, surface.c_range, threshold)
