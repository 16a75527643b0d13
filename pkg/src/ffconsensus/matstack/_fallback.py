"""Pure-numpy counterparts of the compiled kernels.

Signatures and status codes mirror ``_kernels`` so ``core`` can swap the two
freely.  Eigen/SVD work is delegated to LAPACK through ``numpy.linalg``; the
LU solve reproduces the compiled algorithm with vectorized row operations so
the singularity semantics are identical on both paths.
"""

import numpy as np


def eigvals(m, max_its):
    w = np.linalg.eigvals(m)
    return w.real.copy(), w.imag.copy(), 0


def spectral_radius(m, max_its):
    if m.size == 0:
        return 0.0, 0
    return float(np.max(np.abs(np.linalg.eigvals(m)))), 0


def singular_values(m):
    return np.linalg.svd(m, compute_uv=False), 0


def max_singular_value(m):
    if m.size == 0:
        return 0.0, 0
    return float(np.linalg.svd(m, compute_uv=False)[0]), 0


def pinv(m, rcond):
    u, s, vt = np.linalg.svd(m, full_matrices=False)
    if s.size == 0:
        return np.zeros((m.shape[1], m.shape[0])), 0
    keep = (s > rcond * s[0]) & (s > 0.0)
    inv = np.zeros_like(s)
    inv[keep] = 1.0 / s[keep]
    return (vt.T * inv) @ u.T, 0


def sym_eigvals(m):
    return np.linalg.eigvalsh(m), 0


def lu_solve(a, b, pivot_tol):
    n = a.shape[0]
    lu = a.copy()
    x = b.copy()
    scale = np.max(np.abs(lu), axis=1)
    if np.any(scale == 0.0):
        return x, 1
    lu /= scale[:, None]
    x /= scale[:, None]
    for k in range(n):
        piv = k + int(np.argmax(np.abs(lu[k:, k])))
        if abs(lu[piv, k]) <= pivot_tol:
            return x, 1
        if piv != k:
            lu[[k, piv]] = lu[[piv, k]]
            x[[k, piv]] = x[[piv, k]]
        f = lu[k + 1:, k] / lu[k, k]
        lu[k + 1:, k:] -= np.outer(f, lu[k, k:])
        x[k + 1:] -= np.outer(f, x[k])
    for k in range(n - 1, -1, -1):
        x[k] = (x[k] - lu[k, k + 1:] @ x[k + 1:]) / lu[k, k]
    return x, 0
