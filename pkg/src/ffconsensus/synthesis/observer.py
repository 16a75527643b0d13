"""Observer-gain selection by derivative-free minimization over the L_i entries.

The primary objective is sigma_max(A_c); its square is the smallest alpha with
A_c'A_c <= alpha I.  If that leaves A_c unstable, a second phase minimizes
rho(A_c) directly from the best point found.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .. import matstack as ms
from ..errors import ObserverSynthesisError
from .closed_loop import feedback_terms

log = logging.getLogger(__name__)

TIE_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class ObserverDesign:
    L: tuple
    sigma_max: float
    alpha: float
    rho: float
    phase: str
    evaluations: int
    initial_sigma_max: float
    initial_rho: float


def pattern_search(f, x0, *, step=0.5, min_step=1e-7, max_evals=20000):
    """Compass search: poll +/- step along each coordinate, halve on failure.

    Returns ``(x, f(x), evaluations)``.
    """
    x = np.array(x0, dtype=np.float64)
    fx = f(x)
    evals = 1
    while step > min_step and evals < max_evals:
        improved = False
        for k in range(x.size):
            for sgn in (1.0, -1.0):
                old = x[k]
                x[k] = old + sgn * step
                fy = f(x)
                evals += 1
                if fy < fx:
                    fx = fy
                    improved = True
                    break
                x[k] = old
            if evals >= max_evals:
                break
        if not improved:
            step *= 0.5
    return x, fx, evals


class _AcFamily:
    """A_c as an affine function of the stacked observer gains."""

    def __init__(self, stack, K, K_list, H_list):
        self.D = stack.dim
        self.N = stack.N
        self.H = [np.ascontiguousarray(h) for h in H_list]
        self.shapes = [(self.D, h.shape[0]) for h in self.H]
        self.sizes = [a * b for a, b in self.shapes]
        closed = stack.A_tilde + stack.B_tilde @ K
        BK = feedback_terms(stack, K_list)
        D, N = self.D, self.N
        base = np.zeros((N * D, N * D))
        for i in range(N):
            for j in range(N):
                base[i * D:(i + 1) * D, j * D:(j + 1) * D] = (closed - BK[i]) if i == j else -BK[j]
        self.base = base
        self.initial = [(closed - BK[i]) @ self.H[i].T for i in range(N)]

    def unpack(self, x):
        out, start = [], 0
        for shape, size in zip(self.shapes, self.sizes):
            out.append(x[start:start + size].reshape(shape))
            start += size
        return out

    def pack(self, L_list):
        return np.concatenate([np.asarray(L, float).ravel() for L in L_list])

    def matrix(self, x):
        M = self.base.copy()
        D = self.D
        for i, L in enumerate(self.unpack(x)):
            M[i * D:(i + 1) * D, i * D:(i + 1) * D] -= L @ self.H[i]
        return M

    def sigma(self, x):
        return ms.max_singular_value(self.matrix(x))

    def rho(self, x):
        return ms.spectral_radius(self.matrix(x))


def _better(cand, best):
    """Lower objective wins; near-ties go to the lower spectral radius."""
    f_c, rho_c = cand
    f_b, rho_b = best
    if f_c < f_b - TIE_RTOL * max(1.0, abs(f_b)):
        return True
    return abs(f_c - f_b) <= TIE_RTOL * max(1.0, abs(f_b)) and rho_c < rho_b


def _minimize(objective, family, x0, rng, *, restarts, max_evals):
    x, fx, evals = pattern_search(objective, x0, max_evals=max_evals)
    best_x, best = x, (fx, family.rho(x))
    for _ in range(restarts):
        scale = 0.5 * (1.0 + np.max(np.abs(best_x)))
        start = best_x + scale * rng.standard_normal(best_x.size)
        x, fx, used = pattern_search(objective, start, max_evals=max_evals)
        evals += used
        cand = (fx, family.rho(x))
        if _better(cand, best):
            best_x, best = x, cand
    return best_x, best, evals


def initial_observer_gains(stack, K, K_list, H_list):
    """L_i = (A~ + B~K - B~_i K_i) H_i', which zeroes the measured column block of Theta_i."""
    return _AcFamily(stack, K, K_list, H_list).initial


def synthesize_observer_gains(stack, K, K_list, H_list, *, seed=0, restarts=3, max_evals=20000):
    family = _AcFamily(stack, K, K_list, H_list)
    rng = np.random.default_rng(seed)
    x0 = family.pack(family.initial)
    sigma0, rho0 = family.sigma(x0), family.rho(x0)

    x, (sigma, rho), evals = _minimize(family.sigma, family, x0, rng, restarts=restarts, max_evals=max_evals)
    phase = "sigma_max"
    if rho >= 1.0:
        log.info("sigma_max phase left rho(A_c) = %.6g; switching objective to rho(A_c)", rho)
        x, (rho, _), used = _minimize(family.rho, family, x, rng, restarts=restarts, max_evals=max_evals)
        evals += used
        sigma = family.sigma(x)
        phase = "rho"
        if rho >= 1.0:
            raise ObserverSynthesisError(
                f"no stabilizing observer gains found; best rho(A_c) = {rho:.6g}", best_rho=rho
            )
    L = tuple(np.array(l) for l in family.unpack(x))
    return ObserverDesign(L, sigma, sigma * sigma, rho, phase, evals, sigma0, rho0)
