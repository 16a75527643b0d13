"""Per-agent controller holding only what agent i is allowed to know.

A ``LocalController`` is built once from the synthesis result and afterwards
sees nothing global: each call receives the agent's own state, its parent's
state and input, and its own observer estimate.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class LocalController:
    agent: int
    parent: int
    feedforward: object
    K_i: np.ndarray
    L_i: np.ndarray
    H_i: np.ndarray
    A_tilde: np.ndarray
    B_i: np.ndarray
    coupling: np.ndarray  # sum over j != i of B~_j K_j
    C_self: np.ndarray
    C_parent: np.ndarray

    def measurement(self, x_i, x_parent):
        """Y_i = H_i E: the agent's own pairwise error, formed from local data."""
        if self.C_self is None:
            return x_i - x_parent
        return self.C_self @ x_i - self.C_parent @ x_parent

    def feedforward_input(self, x_i, x_parent, u_parent):
        return self.feedforward.apply(x_i, x_parent, u_parent)

    def feedback_input(self, estimate):
        return self.K_i @ estimate

    def next_estimate(self, estimate, measurement, u_bar):
        return (
            self.A_tilde @ estimate
            + self.B_i @ u_bar
            + self.coupling @ estimate
            + self.L_i @ (measurement - self.H_i @ estimate)
        )


def build_controllers(synth):
    s = synth.scenario
    stack = synth.stack
    BK = [stack.B_cols[i] @ synth.K_list[i] for i in range(stack.N)]
    total = sum(BK)
    out = []
    for idx, (i, j) in enumerate(synth.parent_map.pairs()):
        if stack.mode == "output":
            c_self = s.agents[i - 1].C
            c_par = s.leader.C0 if j == 0 else s.agents[j - 1].C
        else:
            c_self = c_par = None
        out.append(
            LocalController(
                agent=i,
                parent=j,
                feedforward=synth.feedforward[idx],
                K_i=synth.K_list[idx],
                L_i=synth.L_list[idx],
                H_i=synth.H_list[idx],
                A_tilde=stack.A_tilde,
                B_i=stack.B_cols[idx],
                coupling=total - BK[idx],
                C_self=c_self,
                C_parent=c_par,
            )
        )
    return tuple(out)


def step_observers(synth, estimates, measurements, controls):
    """Advance every distributed observer by one step.

    E_hat_i(k+1) = A~ E_hat_i + B~_i u_bar_i + sum_{j != i} B~_j K_j E_hat_i + L_i (Y_i - H_i E_hat_i)
    """
    ctrls = build_controllers(synth)
    if not (len(estimates) == len(measurements) == len(controls) == len(ctrls)):
        from ..errors import ContractError

        raise ContractError("need one estimate, measurement and control per agent")
    return [
        c.next_estimate(np.asarray(e, float), np.asarray(y, float), np.asarray(u, float))
        for c, e, y, u in zip(ctrls, estimates, measurements, controls)
    ]
