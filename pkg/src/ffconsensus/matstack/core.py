"""Public dense linear-algebra primitives.

Matrices are plain 2-D float64 numpy arrays.  ``as_mat`` is the gatekeeper:
it rejects non-finite entries so nothing downstream has to branch on NaN.

The heavy kernels run under numba unless ``FFCONSENSUS_DISABLE_NUMBA`` is set
to a truthy value (or numba cannot be imported), in which case the numpy/LAPACK
path in ``_fallback`` is used.  ``use_backend`` switches at runtime.
"""

import contextlib
import os

import numpy as np

from ..errors import ConditioningError, ContractError, ConvergenceError, DimensionError, SingularityError
from . import _fallback

try:
    from . import _kernels
except ImportError:  # numba missing
    _kernels = None

QR_MAX_ITS = 60
PINV_RCOND = 1e-13
PIVOT_TOL = 1e-12


def _env_disabled():
    return os.environ.get("FFCONSENSUS_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}


_backend = "numpy" if (_kernels is None or _env_disabled()) else "numba"


def backend():
    """Name of the active kernel backend: ``"numba"`` or ``"numpy"``."""
    return _backend


def set_backend(name):
    global _backend
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and _kernels is None:
        raise RuntimeError("numba is not available")
    _backend = name


@contextlib.contextmanager
def use_backend(name):
    previous = _backend
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)


def _impl():
    return _kernels if _backend == "numba" else _fallback


def as_mat(m, *, name="matrix"):
    """Coerce to a finite 2-D float64 array (1-D input becomes a column)."""
    arr = np.array(m, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    elif arr.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ContractError(f"{name} has non-finite entries")
    return np.ascontiguousarray(arr)


def _square(m, name):
    m = as_mat(m, name=name)
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"{name} must be square, got {m.shape[0]}x{m.shape[1]}")
    return m


def _pow2_scale(m):
    """Exact power-of-two rescaling to unit magnitude; returns ``(scaled, factor)``."""
    amax = float(np.max(np.abs(m)))
    if amax == 0.0:
        return m, 1.0
    e = np.frexp(amax)[1]
    return np.ldexp(m, -e), float(np.ldexp(1.0, e))


def eigvals(m):
    """All eigenvalues of a real square matrix as a complex array."""
    m = _square(m, "m")
    if m.shape[0] == 0:
        return np.zeros(0, dtype=complex)
    m, f = _pow2_scale(m)
    wr, wi, status = _impl().eigvals(m, QR_MAX_ITS)
    if status:
        raise ConvergenceError("QR iteration did not converge")
    return (wr + 1j * wi) * f


def spectral_radius(m):
    """max |lambda| over the eigenvalues of a square matrix."""
    m = _square(m, "m")
    if m.shape[0] == 0:
        return 0.0
    m, f = _pow2_scale(m)
    rho, status = _impl().spectral_radius(m, QR_MAX_ITS)
    if status:
        raise ConvergenceError("QR iteration did not converge")
    return float(rho) * f


def singular_values(m):
    m = as_mat(m, name="m")
    if m.size == 0:
        return np.zeros(0)
    m, f = _pow2_scale(m)
    s, status = _impl().singular_values(m)
    if status:
        raise ConvergenceError("Jacobi SVD did not converge")
    return np.sort(np.asarray(s))[::-1] * f


def max_singular_value(m):
    m = as_mat(m, name="m")
    if m.size == 0:
        return 0.0
    m, f = _pow2_scale(m)
    s, status = _impl().max_singular_value(m)
    if status:
        raise ConvergenceError("Jacobi SVD did not converge")
    return float(s) * f


def pseudo_inverse(m):
    """Moore-Penrose pseudoinverse; equals the inverse for invertible input."""
    m = as_mat(m, name="m")
    if m.size == 0:
        return np.zeros((m.shape[1], m.shape[0]))
    m, f = _pow2_scale(m)
    out, status = _impl().pinv(m, PINV_RCOND * max(m.shape))
    if status:
        raise ConvergenceError("Jacobi SVD did not converge")
    with np.errstate(over="ignore"):
        out = np.asarray(out) / f
    if not np.all(np.isfinite(out)):
        raise ConditioningError("pseudoinverse entries exceed the float64 range")
    return out


def solve_linear(a, b):
    """Solve ``a @ x = b`` for square ``a``.

    Raises SingularityError when a pivot of the row-equilibrated factorization
    falls below 1e-12.
    """
    a = _square(a, "a")
    b_arr = np.asarray(b, dtype=np.float64)
    vector = b_arr.ndim == 1
    b = as_mat(b_arr, name="b")
    if b.shape[0] != a.shape[0]:
        raise DimensionError(f"b has {b.shape[0]} rows, a has {a.shape[0]}")
    if a.shape[0] == 0:
        return b.ravel() if vector else b
    x, status = _impl().lu_solve(a, b, PIVOT_TOL)
    if status:
        raise SingularityError("matrix is singular to working precision")
    x = np.asarray(x)
    return x.ravel() if vector else x


def symmetric_eigvals(m, *, tol=1e-10):
    m = _square(m, "m")
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    if not np.allclose(m, m.T, rtol=0.0, atol=tol * scale):
        raise ContractError("matrix is not symmetric")
    if m.shape[0] == 0:
        return np.zeros(0)
    m, f = _pow2_scale(0.5 * (m + m.T))
    w, status = _impl().sym_eigvals(m)
    if status:
        raise ConvergenceError("Jacobi eigenvalue sweep did not converge")
    return np.asarray(w) * f


def is_positive_definite(m, *, tol=1e-10):
    m = _square(m, "m")
    w = symmetric_eigvals(m, tol=tol)
    if w.size == 0:
        return True
    return bool(w[0] > tol * max(1.0, max_singular_value(m)))


def is_positive_semidefinite(m, *, tol=1e-10):
    m = _square(m, "m")
    w = symmetric_eigvals(m, tol=tol)
    if w.size == 0:
        return True
    return bool(w[0] >= -tol * max(1.0, max_singular_value(m)))


def matrix_rank(m, *, tol=1e-9):
    s = singular_values(m)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


def block_diag(*blocks):
    blocks = [as_mat(b) for b in blocks]
    rows = sum(b.shape[0] for b in blocks)
    cols = sum(b.shape[1] for b in blocks)
    out = np.zeros((rows, cols))
    r = c = 0
    for b in blocks:
        out[r:r + b.shape[0], c:c + b.shape[1]] = b
        r += b.shape[0]
        c += b.shape[1]
    return out
