"""Pure-NumPy nonnegative least squares on precomputed Gram systems.

Fallback backend used when the compiled extension is unavailable. Both
backends implement the same Lawson/Hanson-style active-set iteration on the
normal equations (the fast-NNLS formulation, which lets one Gram matrix serve
every column of a multi-target solve), so their results agree to floating
point accuracy.
"""

from __future__ import annotations

import numpy as np

from .errors import MaxIterationsExceeded

# Escalating diagonal loading applied when a passive-set subsystem is not
# numerically positive definite (dependent design columns).
_JITTERS = (0.0, 1e-13, 1e-10, 1e-7, 1e-4)


def _solve_spd(G: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    scale = float(np.max(np.diagonal(G), initial=0.0))
    if scale <= 0.0:
        scale = 1.0
    eye = np.eye(G.shape[0])
    for jit in _JITTERS:
        try:
            L = np.linalg.cholesky(G + (jit * scale) * eye)
        except np.linalg.LinAlgError:
            continue
        return np.linalg.solve(L.T, np.linalg.solve(L, rhs))
    # unreachable: the largest jitter always dominates the defect
    raise np.linalg.LinAlgError("passive subsystem not positive definite")


def nnls_gram(gram: np.ndarray, lin: np.ndarray, max_iter: int) -> np.ndarray:
    """Minimize ||Ax - b||^2 over x >= 0 given gram = A'A and lin = A'b.

    ``max_iter`` bounds the active-set adjustment steps; exceeding it raises
    MaxIterationsExceeded (floating-point cycling guard).
    """
    k = lin.shape[0]
    x = np.zeros(k)
    passive = np.zeros(k, dtype=bool)
    w = lin.copy()
    # machine-relative selection tolerance: loose enough to absorb the
    # rounding of w = lin - gram @ x, tight enough that a data term riding on
    # a large penalty constant stays visible
    tol = 100.0 * np.finfo(float).eps * max(
        float(np.max(np.abs(lin), initial=0.0)), 1e-30
    )
    inner = 0
    outer = 0
    while True:
        w_free = np.where(passive, -np.inf, w)
        j = int(np.argmax(w_free))
        if w_free[j] <= tol:
            break
        outer += 1
        if outer > max_iter:
            raise MaxIterationsExceeded(
                f"active-set guard tripped after {outer} insertions"
            )
        passive[j] = True
        while True:
            idx = np.flatnonzero(passive)
            s = _solve_spd(gram[np.ix_(idx, idx)], lin[idx])
            if np.all(s > 0.0):
                x[:] = 0.0
                x[idx] = s
                break
            inner += 1
            if inner > max_iter:
                raise MaxIterationsExceeded(
                    f"active-set guard tripped after {inner} adjustment steps"
                )
            # Step from x toward s until the first passive coordinate hits
            # zero, then retire every coordinate pinned at the boundary.
            xi = x[idx]
            blocking = s <= 0.0
            denom = xi - s
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios = np.where(blocking & (denom > 0.0), xi / denom, np.inf)
            alpha = float(np.min(ratios))
            if np.isfinite(alpha):
                xi = xi + alpha * (s - xi)
                drop = blocking & (xi <= 1e-14 * max(1.0, float(xi.max(initial=0.0))))
                drop[int(np.argmin(ratios))] = True
            else:
                # degenerate: every blocking coordinate already sits at zero
                xi = np.maximum(s, 0.0)
                drop = blocking
            xi[drop] = 0.0
            x[idx] = xi
            passive[idx[drop]] = False
            if not passive.any():
                break
        w = lin - gram @ x
    return x


def nnls_gram_multi(gram: np.ndarray, lin: np.ndarray, max_iter: int) -> np.ndarray:
    """Column-wise :func:`nnls_gram` for a (k, m) block of linear terms."""
    k, m = lin.shape
    out = np.zeros((k, m))
    for j in range(m):
        try:
            out[:, j] = nnls_gram(gram, lin[:, j], max_iter)
        except MaxIterationsExceeded as exc:
            raise MaxIterationsExceeded(f"column {j}: {exc}") from None
    return out
