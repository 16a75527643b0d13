"""Conventional comparison scheme: distributed leader observer plus regulator equations.

Each follower estimates the leader state with

    eta_i(k+1) = A0 eta_i + mu A0 [sum_j a_ij (eta_j - eta_i) + a_i0 (x0 - eta_i)]

and applies u_i = F_i (x_i - X_i eta_i) + U_i eta_i, where (X_i, U_i) solve
X_i A0 = A_i X_i + B_i U_i and C_i X_i = C0.
"""

from dataclasses import dataclass

import numpy as np

from . import matstack as ms
from .errors import BaselineUnstableError, ContractError, RegulatorInfeasibleError
from .model import OUTPUT, Scenario, validate
from .sim.run import _Recorder, _stacked_error
from .sim.costs import consensus_step, default_threshold
from .synthesis.dare import solve_dare_matrices

REGULATOR_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class RegulatorSolution:
    X: tuple
    U: tuple
    residuals: tuple

    @property
    def residual(self):
        return max(self.residuals) if self.residuals else 0.0


@dataclass(frozen=True)
class LeaderObserverConfig:
    mu: float

    def __post_init__(self):
        if not (np.isfinite(self.mu) and self.mu > 0):
            raise ContractError(f"coupling gain mu must be positive, got {self.mu}")


@dataclass(frozen=True, eq=False)
class BaselineDesign:
    regulator: RegulatorSolution
    config: LeaderObserverConfig
    F: tuple
    observer_matrix: np.ndarray
    closed_loop: np.ndarray
    rho_observer: float
    rho_plant: float
    rho_closed: float


def _output_maps(s):
    if s.mode == OUTPUT:
        return [ag.C for ag in s.agents], s.leader.C0
    return [np.eye(ag.n) for ag in s.agents], np.eye(s.leader.p)


def solve_regulator_equations(s: Scenario) -> RegulatorSolution:
    """Least-squares solve of X A0 - A X - B U = 0 and C X = C0 per agent, in vec form."""
    A0 = s.leader.A0
    p = A0.shape[0]
    Cs, C0 = _output_maps(s)
    Xs, Us, res = [], [], []
    for i, (ag, C) in enumerate(zip(s.agents, Cs), start=1):
        n, m = ag.n, ag.m
        q = C.shape[0]
        top = np.hstack([np.kron(A0.T, np.eye(n)) - np.kron(np.eye(p), ag.A), -np.kron(np.eye(p), ag.B)])
        bottom = np.hstack([np.kron(np.eye(p), C), np.zeros((q * p, m * p))])
        M = np.vstack([top, bottom])
        rhs = np.concatenate([np.zeros(n * p), C0.reshape(-1, order="F")])
        sol = ms.pseudo_inverse(M) @ rhs
        X = sol[: n * p].reshape((n, p), order="F")
        U = sol[n * p:].reshape((m, p), order="F")
        r = max(np.linalg.norm(X @ A0 - ag.A @ X - ag.B @ U), np.linalg.norm(C @ X - C0))
        if r > REGULATOR_TOL:
            raise RegulatorInfeasibleError(
                f"agent {i}: regulator equations have no solution (residual {r:.3g})", residual=r
            )
        Xs.append(X)
        Us.append(U)
        res.append(float(r))
    return RegulatorSolution(tuple(Xs), tuple(Us), tuple(res))


def pinning_matrix(s: Scenario):
    """Laplacian among followers plus the leader-pinning diagonal."""
    W = s.topology.weights
    N = s.N
    adj = W[1:, 1:]
    return np.diag(adj.sum(axis=1) + W[1:, 0]) - adj


def observer_matrix(s: Scenario, mu):
    """Leader-estimate error dynamics (I - mu * pinning) kron A0."""
    return np.kron(np.eye(s.N) - mu * pinning_matrix(s), s.leader.A0)


def tune_mu(s: Scenario, *, grid=400, refine=60):
    """Coupling gain minimizing rho of the stacked observer-error matrix.

    Coarse grid over (0, 2 / lambda_max] followed by golden-section refinement.
    """
    lam = np.linalg.eigvals(pinning_matrix(s))
    upper = 2.0 / max(np.max(np.abs(lam)), 1e-12)
    f = lambda mu: ms.spectral_radius(observer_matrix(s, mu))
    mus = np.linspace(upper / grid, upper, grid)
    vals = [f(mu) for mu in mus]
    k = int(np.argmin(vals))
    lo, hi = mus[max(k - 1, 0)], mus[min(k + 1, grid - 1)]
    g = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = hi - g * (hi - lo), lo + g * (hi - lo)
    fa, fb = f(a), f(b)
    for _ in range(refine):
        if fa < fb:
            hi, b, fb = b, a, fa
            a = hi - g * (hi - lo)
            fa = f(a)
        else:
            lo, a, fa = a, b, fb
            b = lo + g * (hi - lo)
            fb = f(b)
    best = min([(vals[k], mus[k]), (fa, a), (fb, b)])
    return LeaderObserverConfig(float(best[1]))


def stabilizing_gains(s: Scenario):
    """Per-agent DARE gains; output mode weights the state by C'QC + I."""
    out = []
    for ag, R in zip(s.agents, s.weights.R):
        if s.mode == OUTPUT:
            Qi = ag.C.T @ s.weights.Q @ ag.C + np.eye(ag.n)
        else:
            Qi = s.weights.Q
        _, F, _ = solve_dare_matrices(ag.A, ag.B, Qi, R)
        out.append(F)
    return tuple(out)


def design_baseline(s: Scenario, reg=None, cfg=None, F=None) -> BaselineDesign:
    s, _ = validate(s)
    reg = solve_regulator_equations(s) if reg is None else reg
    cfg = tune_mu(s) if cfg is None else cfg
    F = stabilizing_gains(s) if F is None else tuple(F)
    Aobs = observer_matrix(s, cfg.mu)
    plant = ms.block_diag(*[ag.A + ag.B @ f for ag, f in zip(s.agents, F)])
    inject = ms.block_diag(*[ag.B @ (U - f @ X) for ag, f, X, U in zip(s.agents, F, reg.X, reg.U)])
    n_tot, p_tot = plant.shape[0], Aobs.shape[0]
    closed = np.zeros((n_tot + p_tot, n_tot + p_tot))
    closed[:n_tot, :n_tot] = plant
    closed[:n_tot, n_tot:] = inject
    closed[n_tot:, n_tot:] = Aobs
    return BaselineDesign(
        regulator=reg,
        config=cfg,
        F=F,
        observer_matrix=Aobs,
        closed_loop=closed,
        rho_observer=ms.spectral_radius(Aobs),
        rho_plant=ms.spectral_radius(plant),
        rho_closed=ms.spectral_radius(closed),
    )


class _Shim:
    """Just enough of a synthesis result for the shared trace helpers."""

    def __init__(self, s, pm):
        from .model import block_dim

        self.scenario = s
        self.parent_map = pm
        self.stack = type("S", (), {"dim": s.N * block_dim(s)})()


def run_baseline(s: Scenario, design: BaselineDesign = None, *, horizon=None, eta_init=None):
    """Simulate the comparison scheme; trace layout matches the proposed runs.

    Leader estimates start at zero unless ``eta_init`` gives one vector per agent.
    """
    s, pm = validate(s)
    design = design_baseline(s) if design is None else design
    if not design.rho_observer < 1.0:
        raise BaselineUnstableError(
            f"leader observer network is unstable (rho = {design.rho_observer:.6g}) for mu = {design.config.mu:.6g}; "
            "choose a different coupling gain",
            rho=design.rho_observer,
        )
    h = s.horizon if horizon is None else int(horizon)
    W = s.topology.weights
    mu, A0 = design.config.mu, s.leader.A0
    shim = _Shim(s, pm)
    rec = _Recorder(shim, h)
    eta_rec = np.zeros((h + 1, s.N * s.leader.p))
    x0 = s.leader.x0.copy()
    xs = [x.copy() for x in s.initial_states]
    eta = [np.zeros(s.leader.p) for _ in range(s.N)] if eta_init is None else [np.asarray(e, float).copy() for e in eta_init]
    for k in range(h + 1):
        rec.leader[k] = x0
        rec.E[k] = _stacked_error(shim, x0, xs)
        eta_rec[k] = np.concatenate(eta)
        us = []
        for i, ag in enumerate(s.agents):
            X, U, F = design.regulator.X[i], design.regulator.U[i], design.F[i]
            uff = U @ eta[i]
            ufb = F @ (xs[i] - X @ eta[i])
            rec.states[i][k], rec.u_ff[i][k], rec.u_fb[i][k] = xs[i], uff, ufb
            us.append(uff + ufb)
        if k == h:
            break
        nxt = []
        for i in range(s.N):
            innov = W[i + 1, 0] * (x0 - eta[i])
            for j in range(s.N):
                if W[i + 1, j + 1]:
                    innov = innov + W[i + 1, j + 1] * (eta[j] - eta[i])
            nxt.append(A0 @ eta[i] + mu * A0 @ innov)
        eta = nxt
        xs = [ag.A @ x + ag.B @ u for ag, x, u in zip(s.agents, xs, us)]
        x0 = A0 @ x0
    return rec.finish("baseline", extras={"eta": eta_rec})


def compare(proposed_trace, synth, base_trace, base_design, *, threshold=None):
    """Spectral radii, deviation histories and consensus steps of both schemes."""
    if proposed_trace.scenario_name != base_trace.scenario_name or proposed_trace.steps != base_trace.steps:
        raise ContractError("traces come from different scenarios or horizons")
    if not (
        np.array_equal(proposed_trace.leader[0], base_trace.leader[0])
        and all(np.array_equal(a[0], b[0]) for a, b in zip(proposed_trace.states, base_trace.states))
    ):
        raise ContractError("traces start from different initial conditions")
    thr = default_threshold(proposed_trace) if threshold is None else float(threshold)
    dev_p, dev_b = proposed_trace.deviations(), base_trace.deviations()
    k_p, k_b = consensus_step(dev_p, thr), consensus_step(dev_b, thr)
    if k_p == k_b:
        ratio = 1.0
    elif k_b <= 0 or k_p < 0:
        ratio = float("inf")
    else:
        ratio = k_p / k_b
    rho_p = synth.rho_Abar if synth is not None else float("nan")
    rho_b = base_design.rho_closed if base_design is not None else float("nan")
    return {
        "rho_proposed": rho_p,
        "rho_baseline": rho_b,
        "rho_ratio": rho_p / rho_b if rho_b else float("nan"),
        "threshold": thr,
        "consensus_step_proposed": k_p,
        "consensus_step_baseline": k_b,
        "step_ratio": ratio,
        "deviation_proposed": dev_p,
        "deviation_baseline": dev_b,
        "mu": base_design.config.mu if base_design is not None else None,
    }
