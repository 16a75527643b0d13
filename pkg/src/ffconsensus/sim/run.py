"""Closed-loop rollouts: distributed observers, centralized reference."""

import numpy as np

from ..errors import ContractError, StabilityError
from ..model import OBSERVER_INITS, OUTPUT
from .controller import build_controllers
from .trace import SimulationTrace

PERTURBATION_SCALE = 0.1


def _require_stable(synth):
    if not synth.rho_Abar < 1.0:
        raise StabilityError(f"closed loop is not stable: rho(A_bar_c) = {synth.rho_Abar:.6g}")


def _stacked_error(synth, x0, xs):
    s = synth.scenario
    blocks = []
    for i, j in synth.parent_map.pairs():
        xi = xs[i - 1]
        xj = x0 if j == 0 else xs[j - 1]
        if s.mode == OUTPUT:
            cj = s.leader.C0 if j == 0 else s.agents[j - 1].C
            blocks.append(s.agents[i - 1].C @ xi - cj @ xj)
        else:
            blocks.append(xi - xj)
    return np.concatenate(blocks)


def initial_estimates(synth, E0, policy):
    N = synth.stack.N
    if policy == "zero":
        return [np.zeros_like(E0) for _ in range(N)]
    if policy == "true":
        return [E0.copy() for _ in range(N)]
    if policy == "perturbed":
        rng = np.random.default_rng(synth.scenario.optimizer_seed)
        return [E0 + PERTURBATION_SCALE * rng.standard_normal(E0.size) for _ in range(N)]
    raise ContractError(f"observer_init must be one of {OBSERVER_INITS}, got {policy!r}")


class _Recorder:
    def __init__(self, synth, horizon):
        s = synth.scenario
        T = horizon + 1
        self.s = s
        self.leader = np.zeros((T, s.leader.p))
        self.states = [np.zeros((T, ag.n)) for ag in s.agents]
        self.u_ff = [np.zeros((T, ag.m)) for ag in s.agents]
        self.u_fb = [np.zeros((T, ag.m)) for ag in s.agents]
        self.E = np.zeros((T, synth.stack.dim))

    def finish(self, kind, E_hat=None, extras=None):
        s = self.s
        if s.mode == OUTPUT:
            outputs = tuple(x @ ag.C.T for x, ag in zip(self.states, s.agents))
            y0 = self.leader @ s.leader.C0.T
        else:
            outputs, y0 = None, None
        return SimulationTrace(
            kind=kind,
            mode=s.mode,
            scenario_name=s.name,
            leader=self.leader,
            states=tuple(self.states),
            outputs=outputs,
            leader_output=y0,
            u_ff=tuple(self.u_ff),
            u_fb=tuple(self.u_fb),
            E=self.E,
            E_hat=E_hat,
            extras=extras or {},
        )


def _rollout(synth, horizon, feedback_of, observers):
    """Shared loop.  ``feedback_of(idx, ctrl, x_i, E, est)`` returns u_bar_i(k)."""
    s = synth.scenario
    pm = synth.parent_map
    ctrls = build_controllers(synth)
    order = pm.topological_order()
    rec = _Recorder(synth, horizon)
    x0 = s.leader.x0.copy()
    xs = [x.copy() for x in s.initial_states]
    E0 = _stacked_error(synth, x0, xs)
    est = initial_estimates(synth, E0, observers) if observers else None
    E_hat = np.zeros((horizon + 1, s.N, E0.size)) if observers else None
    for k in range(horizon + 1):
        E = _stacked_error(synth, x0, xs)
        rec.leader[k], rec.E[k] = x0, E
        if observers:
            E_hat[k] = np.stack(est)
        u = {0: None}
        u_bar = [None] * s.N
        for i in order:
            c = ctrls[i - 1]
            j = c.parent
            xj = x0 if j == 0 else xs[j - 1]
            uff = c.feedforward_input(xs[i - 1], xj, u[j])
            u_bar[i - 1] = feedback_of(i - 1, c, E, None if est is None else est[i - 1])
            u[i] = uff + u_bar[i - 1]
            rec.states[i - 1][k] = xs[i - 1]
            rec.u_ff[i - 1][k] = uff
            rec.u_fb[i - 1][k] = u_bar[i - 1]
        if k == horizon:
            break
        if observers:
            est = [
                c.next_estimate(est[n], c.measurement(xs[n], x0 if c.parent == 0 else xs[c.parent - 1]), u_bar[n])
                for n, c in enumerate(ctrls)
            ]
        xs = [s.agents[n].A @ xs[n] + s.agents[n].B @ u[n + 1] for n in range(s.N)]
        x0 = s.leader.A0 @ x0
    return rec, E_hat


def run_distributed(s, synth, observer_init=None, *, feedback=True, horizon=None):
    """Observer-based distributed run: u_i = u_ff_i + K_i E_hat_i.

    ``feedback=False`` keeps the observers running but applies u_bar = 0.
    """
    _require_stable(synth)
    if s is not None and s is not synth.scenario and s != synth.scenario:
        raise ContractError("scenario does not match the synthesis result")
    policy = observer_init or synth.scenario.observer_init
    if policy not in OBSERVER_INITS:
        raise ContractError(f"observer_init must be one of {OBSERVER_INITS}, got {policy!r}")
    h = synth.scenario.horizon if horizon is None else int(horizon)
    if h < 0:
        raise ContractError("horizon must be nonnegative")

    def fb(idx, c, E, est):
        return c.feedback_input(est) if feedback else np.zeros(c.K_i.shape[0])

    rec, E_hat = _rollout(synth, h, fb, policy)
    return rec.finish("distributed" if feedback else "feedforward_only", E_hat=E_hat)


def run_centralized(s, synth, *, horizon=None):
    """Reference run with u_bar = K E(k) computed from the true stacked error."""
    _require_stable(synth)
    if s is not None and s is not synth.scenario and s != synth.scenario:
        raise ContractError("scenario does not match the synthesis result")
    h = synth.scenario.horizon if horizon is None else int(horizon)
    if h < 0:
        raise ContractError("horizon must be nonnegative")

    def fb(idx, c, E, est):
        return c.feedback_input(E)

    rec, _ = _rollout(synth, h, fb, None)
    return rec.finish("centralized")
