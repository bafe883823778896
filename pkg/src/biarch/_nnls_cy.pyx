# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled nonnegative least squares on precomputed Gram systems.

Same Lawson/Hanson-style active-set iteration as ``_nnls_py`` (the pure
NumPy fallback), written with C loops and a hand-rolled Cholesky so the
many tiny per-column solves of the alternating fit avoid Python overhead.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, fabs, sqrt
from libc.stdlib cimport free, malloc

from .errors import MaxIterationsExceeded

cnp.import_array()

cdef double[5] _JITTERS = [0.0, 1e-13, 1e-10, 1e-7, 1e-4]


cdef int _chol_factor(double* a, Py_ssize_t kp, double shift) noexcept nogil:
    """In-place lower Cholesky of a row-major kp x kp matrix plus shift*I.

    Returns 0 on success, -1 when a pivot is not positive.
    """
    cdef Py_ssize_t i, j, l
    cdef double s
    for j in range(kp):
        s = a[j * kp + j] + shift
        for l in range(j):
            s -= a[j * kp + l] * a[j * kp + l]
        if s <= 0.0:
            return -1
        a[j * kp + j] = sqrt(s)
        for i in range(j + 1, kp):
            s = a[i * kp + j]
            for l in range(j):
                s -= a[i * kp + l] * a[j * kp + l]
            a[i * kp + j] = s / a[j * kp + j]
    return 0


cdef void _chol_solve(const double* l, double* rhs, Py_ssize_t kp) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef double s
    for i in range(kp):
        s = rhs[i]
        for j in range(i):
            s -= l[i * kp + j] * rhs[j]
        rhs[i] = s / l[i * kp + i]
    for i in range(kp - 1, -1, -1):
        s = rhs[i]
        for j in range(i + 1, kp):
            s -= l[j * kp + i] * rhs[j]
        rhs[i] = s / l[i * kp + i]


cdef int _solve_passive(const double* gram, const double* lin, Py_ssize_t k,
                        const Py_ssize_t* idx, Py_ssize_t kp,
                        double* sub, double* s) noexcept nogil:
    """Solve the passive-set subsystem into ``s`` with escalating jitter."""
    cdef Py_ssize_t a, b, level
    cdef double scale = 0.0
    for a in range(kp):
        if gram[idx[a] * k + idx[a]] > scale:
            scale = gram[idx[a] * k + idx[a]]
    if scale <= 0.0:
        scale = 1.0
    for level in range(5):
        for a in range(kp):
            for b in range(kp):
                sub[a * kp + b] = gram[idx[a] * k + idx[b]]
        if _chol_factor(sub, kp, _JITTERS[level] * scale) == 0:
            for a in range(kp):
                s[a] = lin[idx[a]]
            _chol_solve(sub, s, kp)
            return 0
    return -1


cdef int _nnls_one(const double* gram, const double* lin, double* x,
                   Py_ssize_t k, int max_iter,
                   double* sub, double* s, double* w,
                   Py_ssize_t* idx, unsigned char* passive) noexcept nogil:
    """Active-set NNLS for one column. Returns 0, or -1 if the guard trips."""
    cdef Py_ssize_t i, j, kp, npass, best, amin
    cdef int inner = 0, outer = 0
    cdef double tol, best_w, alpha, ratio, denom, xmax, ztol, acc
    cdef bint all_positive, finite_alpha

    # machine-relative selection tolerance: loose enough to absorb the
    # rounding of w = lin - gram @ x, tight enough that a data term riding
    # on a large penalty constant stays visible
    tol = 1e-30
    for i in range(k):
        x[i] = 0.0
        passive[i] = 0
        w[i] = lin[i]
        if fabs(lin[i]) > tol:
            tol = fabs(lin[i])
    tol *= 100.0 * 2.220446049250313e-16
    npass = 0

    while True:
        # select the steepest free coordinate
        best = -1
        best_w = tol
        for i in range(k):
            if not passive[i] and w[i] > best_w:
                best = i
                best_w = w[i]
        if best < 0:
            return 0
        outer += 1
        if outer > max_iter:
            return -1
        passive[best] = 1
        npass += 1

        while True:
            kp = 0
            for i in range(k):
                if passive[i]:
                    idx[kp] = i
                    kp += 1
            if _solve_passive(gram, lin, k, idx, kp, sub, s) != 0:
                return -1
            all_positive = True
            for i in range(kp):
                if s[i] <= 0.0:
                    all_positive = False
                    break
            if all_positive:
                for i in range(k):
                    x[i] = 0.0
                for i in range(kp):
                    x[idx[i]] = s[i]
                break
            inner += 1
            if inner > max_iter:
                return -1
            # step toward s until the first passive coordinate hits zero
            alpha = INFINITY
            amin = -1
            for i in range(kp):
                if s[i] <= 0.0:
                    denom = x[idx[i]] - s[i]
                    if denom > 0.0:
                        ratio = x[idx[i]] / denom
                        if ratio < alpha:
                            alpha = ratio
                            amin = i
            finite_alpha = alpha < INFINITY
            xmax = 1.0
            if finite_alpha:
                for i in range(kp):
                    x[idx[i]] += alpha * (s[i] - x[idx[i]])
                    if x[idx[i]] > xmax:
                        xmax = x[idx[i]]
            else:
                # degenerate: every blocking coordinate already sits at zero
                for i in range(kp):
                    x[idx[i]] = s[i] if s[i] > 0.0 else 0.0
            ztol = 1e-14 * xmax
            npass = 0
            for i in range(kp):
                j = idx[i]
                if s[i] <= 0.0 and (x[j] <= ztol or (finite_alpha and i == amin)):
                    x[j] = 0.0
                    passive[j] = 0
                else:
                    npass += 1
            if npass == 0:
                break
        # refresh the gradient of the free coordinates
        for i in range(k):
            acc = lin[i]
            for j in range(k):
                acc -= gram[i * k + j] * x[j]
            w[i] = acc


def nnls_gram_multi(double[:, ::1] gram, double[:, ::1] lin, int max_iter):
    """Column-wise active-set NNLS given gram = A'A and lin = A'B."""
    cdef Py_ssize_t k = gram.shape[0]
    cdef Py_ssize_t m = lin.shape[1]
    if gram.shape[1] != k or lin.shape[0] != k:
        raise ValueError("gram and linear-term shapes disagree")
    out = np.zeros((k, m))
    cdef double[:, ::1] xv = out
    cdef double* sub = <double*> malloc(k * k * sizeof(double))
    cdef double* s = <double*> malloc(k * sizeof(double))
    cdef double* w = <double*> malloc(k * sizeof(double))
    cdef double* a = <double*> malloc(k * sizeof(double))
    cdef double* xcol = <double*> malloc(k * sizeof(double))
    cdef Py_ssize_t* idx = <Py_ssize_t*> malloc(k * sizeof(Py_ssize_t))
    cdef unsigned char* passive = <unsigned char*> malloc(k * sizeof(unsigned char))
    if not (sub and s and w and a and xcol and idx and passive):
        free(sub); free(s); free(w); free(a); free(xcol); free(idx); free(passive)
        raise MemoryError()
    cdef Py_ssize_t col, i
    cdef Py_ssize_t bad = -1
    try:
        with nogil:
            for col in range(m):
                for i in range(k):
                    a[i] = lin[i, col]
                if _nnls_one(&gram[0, 0], a, xcol, k, max_iter,
                             sub, s, w, idx, passive) != 0:
                    bad = col
                    break
                for i in range(k):
                    xv[i, col] = xcol[i]
    finally:
        free(sub); free(s); free(w); free(a); free(xcol); free(idx); free(passive)
    if bad >= 0:
        raise MaxIterationsExceeded(
            f"column {bad}: active-set guard tripped (max_iter={max_iter})"
        )
    return out


def nnls_gram(gram, lin, int max_iter):
    """Single right-hand-side variant of :func:`nnls_gram_multi`."""
    lin2 = np.ascontiguousarray(np.asarray(lin, dtype=np.float64)[:, None])
    return nnls_gram_multi(np.ascontiguousarray(gram, dtype=np.float64),
                           lin2, max_iter)[:, 0]
