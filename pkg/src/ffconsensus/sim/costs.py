"""Cost accounting and convergence metrics for simulated traces."""

from dataclasses import dataclass

import numpy as np

from .. import matstack as ms
from ..errors import ContractError

DEFAULT_S_VALUES = (0, 5, 10, 20)
ROUNDOFF_FLOOR = 1e-12


@dataclass(frozen=True)
class CostReport:
    """Costs keyed by start index s.

    ``J_sim[s]`` sums stage costs over s <= k < horizon.  ``J_star[s]`` is
    E(s)'PE(s).  ``J_star_distributed[s]`` adds the correction sum over the
    same window, and ``delta_J[s]`` is that correction sum alone.
    """

    J_sim: dict
    J_star: dict
    J_star_distributed: dict
    delta_J: dict
    truncation_bound: float
    stage_costs: tuple
    correction_terms: tuple


def _input_gain_on_z(synth):
    """G with u_bar = G z for z = [E; E_tilde_1..N]: u_bar_i = K_i E - K_i E_tilde_i."""
    st = synth.stack
    D, N = st.dim, st.N
    m = sum(st.input_dims)
    G = np.zeros((m, (N + 1) * D))
    G[:, :D] = synth.K
    for i in range(N):
        G[st.input_slice(i), (i + 1) * D:(i + 2) * D] = -synth.K_list[i]
    return G


def stage_weight(synth):
    """S with E'QE + u_bar'R u_bar = z'Sz along the distributed closed loop."""
    st = synth.stack
    D = st.dim
    G = _input_gain_on_z(synth)
    S = G.T @ st.R_cal @ G
    S[:D, :D] += st.Q_cal
    return 0.5 * (S + S.T)


def transient_constant(A, rate, max_power):
    """max_j ||A^j|| / rate^j over 0 <= j <= max_power."""
    c, M = 1.0, np.eye(A.shape[0])
    for j in range(1, max_power + 1):
        M = M @ A
        c = max(c, ms.max_singular_value(M) / rate**j)
    return c


def _rate(synth):
    return max(synth.rho_Abar, 1e-3)


def truncation_bound(synth, z_last, S=None, W=None, c=None):
    """Geometric estimate of everything the finite window leaves out.

    Covers the stage-cost tail, the correction-sum tail and E(T)'PE(T).
    """
    rho = _rate(synth)
    if rho >= 1.0:
        return float("inf")
    S = stage_weight(synth) if S is None else S
    W = synth.cost_weight if W is None else W
    if c is None:
        A = synth.A_bar_c
        c = transient_constant(A, rho, 10 * A.shape[0])
    zz = float(z_last @ z_last)
    tail = (ms.max_singular_value(S) + ms.max_singular_value(W)) * c * c * zz / (1.0 - rho * rho)
    return float(tail + ms.max_singular_value(synth.P) * zz)


def compute_costs(trace, synth, s_values=DEFAULT_S_VALUES) -> CostReport:
    st = synth.stack
    T = trace.steps
    s_values = tuple(int(s) for s in s_values)
    for s in s_values:
        if s < 0 or s > T:
            raise ContractError(f"start index {s} lies outside the recorded window 0..{T}")
    E = trace.E
    ub = trace.u_bar
    stage = np.einsum("ki,ij,kj->k", E, st.Q_cal, E) + np.einsum("ki,ij,kj->k", ub, st.R_cal, ub)
    z = trace.z
    W = synth.cost_weight
    corr = np.einsum("ki,ij,kj->k", z, W, z)
    J_sim, J_star, J_dist, dJ = {}, {}, {}, {}
    for s in s_values:
        J_sim[s] = float(stage[s:T].sum())
        J_star[s] = float(E[s] @ synth.P @ E[s])
        dJ[s] = float(corr[s:T].sum())
        J_dist[s] = J_star[s] + dJ[s]
    return CostReport(
        J_sim=J_sim,
        J_star=J_star,
        J_star_distributed=J_dist,
        delta_J=dJ,
        truncation_bound=truncation_bound(synth, z[T], W=W),
        stage_costs=tuple(float(v) for v in stage),
        correction_terms=tuple(float(v) for v in corr),
    )


def decay_rate(norms, floor_rel=ROUNDOFF_FLOOR):
    """exp of the least-squares slope of log ||z_k|| after the peak, above roundoff.

    Returns ``nan`` when fewer than two usable points remain.
    """
    norms = np.asarray(norms, float)
    if norms.size == 0 or norms.max() == 0.0:
        return float("nan")
    peak = int(np.argmax(norms))
    floor = floor_rel * norms[peak]
    k = np.arange(norms.size)
    keep = (k >= peak) & (norms > floor)
    # stop at the first point that hits the floor
    below = np.nonzero((k >= peak) & ~(norms > floor))[0]
    if below.size:
        keep &= k < below[0]
    if keep.sum() < 2:
        return float("nan")
    slope = np.polyfit(k[keep], np.log(norms[keep]), 1)[0]
    return float(np.exp(slope))


def consensus_step(deviations, threshold):
    """First index after which the deviation stays at or below ``threshold``; -1 if never."""
    dev = np.asarray(deviations, float)
    above = np.nonzero(dev > threshold)[0]
    if above.size == 0:
        return 0
    k = int(above[-1]) + 1
    return k if k < dev.size else -1


def default_threshold(trace, rel=1e-2):
    return rel * max(1.0, float(np.linalg.norm(trace.leader[0])))


def convergence_metrics(trace, synth=None, threshold=None):
    """Per-step norms, decay ratios, consensus step and the geometric envelope check."""
    z = trace.z
    norms = np.linalg.norm(z, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(norms[:-1] > 0, norms[1:] / norms[:-1], np.nan)
    thr = default_threshold(trace) if threshold is None else float(threshold)
    dev = trace.deviations()
    out = {
        "z_norms": norms,
        "decay_ratios": ratios,
        "empirical_decay_rate": decay_rate(norms),
        "deviations": dev,
        "threshold": thr,
        "consensus_step": consensus_step(dev, thr),
        "observer_error_norms": np.linalg.norm(trace.E_tilde, axis=2),
    }
    if synth is not None and norms[0] > 0:
        rho = _rate(synth)
        k = np.arange(norms.size)
        # points at roundoff level carry no information about the envelope
        live = norms > ROUNDOFF_FLOOR * norms.max()
        c_fit = float(np.max(norms[live] / (rho ** k[live] * norms[0])))
        A = synth.A_bar_c
        c_mat = transient_constant(A, rho, max(trace.steps, 1))
        out.update(
            rho_Abar=synth.rho_Abar,
            envelope_constant=c_fit,
            envelope_matrix_constant=c_mat,
            envelope_holds=bool(c_fit <= c_mat * (1.0 + 1e-9) + 1e-9),
        )
    return out
