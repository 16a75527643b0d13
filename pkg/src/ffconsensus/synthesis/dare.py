"""Discrete algebraic Riccati equation by fixed-point value iteration.

    P = A'PA + Q - A'PB (R + B'PB)^-1 B'PA,    K = -(R + B'PB)^-1 B'PA

The stacked error system is block diagonal in A, B, Q and R, so the global
equation splits into one small DARE per agent; ``solve_dare`` solves those
and reassembles P and K.
"""

from dataclasses import dataclass

import numpy as np

from .. import matstack as ms
from ..errors import ConditioningError, NonStabilizableError, SingularityError
from .stack import ErrorStack

MAX_ITERS = 10000
STEP_TOL = 1e-12
DIVERGENCE = 1e14


@dataclass(frozen=True)
class DareInfo:
    iterations: int
    residual: float
    rho_closed: float


def riccati_map(P, A, B, Q, R):
    """One value-iteration step; returns (next P, gain K)."""
    BtP = B.T @ P
    G = R + BtP @ B
    try:
        K = -ms.solve_linear(G, BtP @ A)
    except SingularityError:
        raise ConditioningError("R + B'PB is singular") from None
    nxt = A.T @ P @ A + Q + (A.T @ P @ B) @ K
    return 0.5 * (nxt + nxt.T), K


def dare_residual(P, A, B, Q, R):
    nxt, _ = riccati_map(P, A, B, Q, R)
    return float(np.linalg.norm(P - nxt))


def solve_dare_matrices(A, B, Q, R, *, max_iters=MAX_ITERS, tol=STEP_TOL):
    """Solve one DARE; returns ``(P, K, DareInfo)``."""
    A, B, Q, R = (ms.as_mat(x) for x in (A, B, Q, R))
    P = 0.5 * (Q + Q.T)
    bound = DIVERGENCE * (1.0 + np.linalg.norm(Q))
    for it in range(1, max_iters + 1):
        nxt, K = riccati_map(P, A, B, Q, R)
        step = np.linalg.norm(nxt - P)
        scale = np.linalg.norm(P)
        P = nxt
        if not np.all(np.isfinite(P)) or np.linalg.norm(P) > bound:
            raise NonStabilizableError(f"Riccati iteration diverged after {it} iterations; (A, B) is not stabilizable")
        if step <= tol * (1.0 + scale):
            break
    else:
        raise NonStabilizableError(f"Riccati iteration did not converge in {max_iters} iterations")
    _, K = riccati_map(P, A, B, Q, R)
    rho = ms.spectral_radius(A + B @ K)
    if rho >= 1.0:
        raise NonStabilizableError(f"Riccati fixed point is not stabilizing (rho(A+BK) = {rho:.6g})")
    return P, K, DareInfo(it, dare_residual(P, A, B, Q, R), rho)


def solve_dare(stack: ErrorStack, *, max_iters=MAX_ITERS, tol=STEP_TOL):
    """Blockwise solution of the stacked DARE.

    Returns ``(P, K, DareInfo)`` where the info refers to the reassembled
    global matrices.
    """
    Ps, Ks, iters = [], [], 0
    for i in range(stack.N):
        try:
            P_i, K_i, info = solve_dare_matrices(
                stack.A_blocks[i], stack.B_blocks[i], stack.Q, stack.R_blocks[i], max_iters=max_iters, tol=tol
            )
        except NonStabilizableError as exc:
            raise NonStabilizableError(f"agent {i + 1}: {exc}") from None
        Ps.append(P_i)
        Ks.append(K_i)
        iters = max(iters, info.iterations)
    P = ms.block_diag(*Ps)
    K = ms.block_diag(*Ks)
    residual = dare_residual(P, stack.A_tilde, stack.B_tilde, stack.Q_cal, stack.R_cal)
    rho = ms.spectral_radius(stack.A_tilde + stack.B_tilde @ K)
    return P, K, DareInfo(iters, residual, rho)
