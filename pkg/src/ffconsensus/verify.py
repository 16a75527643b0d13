"""Invariant suite run by ``ffconsensus verify``."""

import math
from dataclasses import dataclass

import numpy as np

from . import matstack as ms
from .errors import ConsensusError
from .model import OUTPUT, Scenario
from .sim import compute_costs, convergence_metrics, run_centralized, run_distributed
from .synthesis import synthesize
from .synthesis.dare import solve_dare_matrices

DARE_TOL = 1e-10
IDENTITY_TOL = 1e-6
FEEDFORWARD_TOL = 1e-12
FEEDFORWARD_WINDOW = 6
OBSERVER_TOL = 1e-6
OBSERVER_TARGET = 1e-8
DECAY_SLACK = 0.05
PENROSE_TOL = 1e-8
DELTA_J_FINAL_RATIO = 1e-4
DELTA_J_ROUNDOFF = 1e-12


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<34} measured={self.measured:<12.4g} tol={self.tolerance:<10.4g} {self.detail}".rstrip()


def _check(name, measured, tol, ok=None, detail=""):
    measured = float(measured)
    if ok is None:
        ok = measured <= tol
    return Check(name, bool(ok), measured, float(tol), detail)


# kernel property suites

def penrose_suite(count=1000, max_dim=6, seed=0):
    """Worst Penrose-condition residual over random (often rank-deficient) matrices."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(count):
        m, n = rng.integers(1, max_dim + 1, size=2)
        r = int(rng.integers(0, min(m, n) + 1))
        A = rng.standard_normal((m, r)) @ rng.standard_normal((r, n)) if r < min(m, n) else rng.standard_normal((m, n))
        X = ms.pseudo_inverse(A)
        scale = max(1.0, np.linalg.norm(A) * np.linalg.norm(X))
        worst = max(
            worst,
            np.linalg.norm(A @ X @ A - A) / max(1.0, np.linalg.norm(A)),
            np.linalg.norm(X @ A @ X - X) / max(1.0, np.linalg.norm(X)),
            np.linalg.norm(A @ X - (A @ X).T) / scale,
            np.linalg.norm(X @ A - (X @ A).T) / scale,
        )
    return worst


def sigma_rho_suite(count=1000, max_dim=8, seed=1):
    """Smallest sigma_max - rho over random square matrices (must stay nonnegative)."""
    rng = np.random.default_rng(seed)
    gap = math.inf
    for _ in range(count):
        n = int(rng.integers(1, max_dim + 1))
        A = rng.standard_normal((n, n))
        s, r = ms.max_singular_value(A), ms.spectral_radius(A)
        gap = min(gap, (s - r) / max(1.0, s))
    return gap


def scalar_dare_error():
    """A = B = Q = R = 1 has p = (1 + sqrt 5) / 2."""
    P, _, _ = solve_dare_matrices(np.eye(1), np.eye(1), np.eye(1), np.eye(1))
    return abs(P[0, 0] - (1.0 + math.sqrt(5.0)) / 2.0)


def spectral_radius_oracles():
    """Worst error against matrices with known spectra."""
    th = 0.5
    rot = np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])
    jordan = np.array([[0.9, 1.0, 0.0], [0.0, 0.9, 1.0], [0.0, 0.0, 0.9]])
    # companion of (x-0.5)(x+0.8)(x^2+0.25)
    coeffs = np.poly([0.5, -0.8, 0.5j, -0.5j]).real
    comp = np.zeros((4, 4))
    comp[0, :] = -coeffs[1:]
    comp[1:, :-1] = np.eye(3)
    cases = [
        (rot, 1.0),
        (jordan, 0.9),
        (np.diag([0.1, -0.7, 0.3]), 0.7),
        (comp, 0.8),
        (np.zeros((3, 3)), 0.0),
        (np.array([[0.0, -2.0], [2.0, 0.0]]), 2.0),
    ]
    return max(abs(ms.spectral_radius(M) - rho) for M, rho in cases)


def kernel_checks():
    gap = sigma_rho_suite()
    return [
        _check("penrose conditions (1000 random)", penrose_suite(), PENROSE_TOL),
        _check("sigma_max >= rho (1000 random)", gap, 0.0, ok=gap >= -1e-12, detail="smallest margin, must be >= 0"),
        _check("scalar DARE closed form", scalar_dare_error(), 1e-10),
        _check("spectral radius oracles", spectral_radius_oracles(), 1e-8),
    ]


# scenario checks

def observer_horizon(synth, z0_norm):
    """Smallest k with rho(A_bar_c)^k * ||z(0)|| <= OBSERVER_TARGET."""
    rho = synth.rho_Abar
    if z0_norm <= OBSERVER_TARGET or rho <= 0.0:
        return 1
    return int(math.ceil(math.log(OBSERVER_TARGET / z0_norm) / math.log(rho)))


def feedforward_residuals(synth, window=FEEDFORWARD_WINDOW):
    """Per-step residual of the pairwise error dynamics with feedback switched off."""
    tr = run_distributed(synth.scenario, synth, feedback=False, horizon=window)
    st = synth.stack
    E, ub = tr.E, tr.u_bar
    res = [np.linalg.norm(E[k + 1] - st.A_tilde @ E[k] - st.B_tilde @ ub[k]) for k in range(window)]
    return np.array(res)


def delta_j_profile_ok(delta_J, s_values=(0, 5, 10, 20)):
    d0 = abs(delta_J[0])
    slack = DELTA_J_ROUNDOFF * max(d0, 1e-300)
    later = [delta_J[s] for s in s_values if s >= 5]
    mono = all(b <= a + slack for a, b in zip(later, later[1:]))
    ratio = abs(delta_J[s_values[-1]]) / d0 if d0 > 0 else 0.0
    return mono, ratio


def scenario_checks(s: Scenario, synth=None):
    checks = []
    synth = synthesize(s) if synth is None else synth
    st = synth.stack

    checks.append(_check("DARE residual", synth.dare.residual, DARE_TOL))
    checks.append(_check("P positive definite", ms.symmetric_eigvals(synth.P).min(), 0.0, ok=ms.is_positive_definite(synth.P), detail="smallest eigenvalue, must be > 0"))
    checks.append(_check("rho(A~+B~K) < 1", synth.rho_closed, 1.0, ok=synth.rho_closed < 1.0, detail="strict"))
    P_full, _, _ = solve_dare_matrices(st.A_tilde, st.B_tilde, st.Q_cal, st.R_cal)
    checks.append(_check("blockwise DARE = stacked DARE", np.abs(P_full - synth.P).max() / max(1.0, np.abs(P_full).max()), 1e-9))
    checks.append(_check("sigma_max(A_c) >= rho(A_c)", synth.sigma_max - synth.rho_Ac, 0.0, ok=synth.sigma_max >= synth.rho_Ac - 1e-12, detail="margin, must be >= 0"))
    checks.append(
        _check(
            "rho(A_bar_c) = max of diagonal radii",
            abs(synth.rho_Abar - max(synth.rho_closed, synth.rho_Ac)),
            1e-8,
        )
    )
    checks.append(_check("rho(A_bar_c) < 1", synth.rho_Abar, 1.0, ok=synth.rho_Abar < 1.0))

    ff = feedforward_residuals(synth)
    checks.append(_check(f"feedforward exactness ({FEEDFORWARD_WINDOW} steps)", ff.max(), FEEDFORWARD_TOL))

    z0 = np.linalg.norm(run_distributed(s, synth, horizon=0).z[0])
    horizon = max(s.horizon, observer_horizon(synth, z0), 21)
    tr = run_distributed(s, synth, horizon=horizon)
    m = convergence_metrics(tr, synth)
    checks.append(_check(f"observer error at k={horizon}", m["observer_error_norms"][-1].max(), OBSERVER_TOL))
    rate = m["empirical_decay_rate"]
    rate_ok = math.isnan(rate) or rate <= synth.rho_Abar + DECAY_SLACK
    checks.append(_check("empirical decay rate", 0.0 if math.isnan(rate) else rate, synth.rho_Abar + DECAY_SLACK, ok=rate_ok))
    checks.append(
        _check(
            "geometric envelope constant",
            m.get("envelope_constant", 0.0),
            m.get("envelope_matrix_constant", 0.0),
            ok=m.get("envelope_holds", True),
        )
    )
    label = "output" if s.mode == OUTPUT else "state"
    checks.append(
        _check(
            f"{label} consensus at k={horizon}",
            m["deviations"][-1],
            m["threshold"],
            detail=f"consensus step {m['consensus_step']}",
        )
    )

    c = compute_costs(tr, synth, (0, 5, 10, 20))
    bound = c.truncation_bound
    worst = max(abs(c.J_sim[k] - c.J_star_distributed[k]) for k in (0, 5, 10))
    checks.append(_check("cost identity s=0,5,10", worst, IDENTITY_TOL + bound))
    mono, ratio = delta_j_profile_ok(c.delta_J)
    checks.append(_check("delta J decreasing for s>=5", 0.0 if mono else 1.0, 0.0, ok=mono))
    checks.append(_check("|dJ(20)|/|dJ(0)|", ratio, DELTA_J_FINAL_RATIO))

    tc = run_centralized(s, synth, horizon=horizon)
    cc = compute_costs(tc, synth, (0,))
    checks.append(_check("centralized cost = E(0)'PE(0)", abs(cc.J_sim[0] - cc.J_star[0]), IDENTITY_TOL + cc.truncation_bound))
    slack = IDENTITY_TOL + bound + cc.truncation_bound
    checks.append(
        _check("distributed cost >= centralized", cc.J_sim[0] - c.J_sim[0], slack, detail="centralized minus distributed")
    )
    return checks, synth


def run_verify(s: Scenario, *, include_kernels=True):
    """Return ``(checks, error)``; ``error`` is set when synthesis itself fails."""
    checks = kernel_checks() if include_kernels else []
    try:
        more, _ = scenario_checks(s)
    except ConsensusError as exc:
        return checks, exc
    return checks + more, None

