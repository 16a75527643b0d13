"""Controller synthesis: feedforward gains, LQ gain, observer gains, closed-loop matrices."""

from dataclasses import dataclass

import numpy as np

from .. import matstack as ms
from ..graph import ParentMap, build_selectors
from ..model import STATE, Scenario, validate
from .closed_loop import assemble_Ac, compute_M1_M2, cost_weight, feedback_terms, split_gain
from .dare import DareInfo, dare_residual, solve_dare, solve_dare_matrices
from .feedforward import (
    FeedforwardGains,
    feedforward_output,
    feedforward_state,
    output_gains,
    state_gains,
)
from .observer import ObserverDesign, initial_observer_gains, pattern_search, synthesize_observer_gains
from .stack import ErrorStack, build_error_stack


@dataclass(frozen=True, eq=False)
class SynthesisResult:
    scenario: Scenario
    parent_map: ParentMap
    stack: ErrorStack
    feedforward: tuple
    P: np.ndarray
    K: np.ndarray
    K_list: tuple
    H_list: tuple
    L_list: tuple
    Theta_list: tuple
    A_c: np.ndarray
    A_bar_c: np.ndarray
    Psi: np.ndarray
    M1: np.ndarray
    M2: np.ndarray
    alpha: float
    sigma_max: float
    rho_closed: float
    rho_Ac: float
    rho_Abar: float
    dare: DareInfo
    observer: ObserverDesign

    @property
    def cost_weight(self):
        return cost_weight(self.M1, self.M2)

    @property
    def closed(self):
        """A~ + B~K."""
        return self.stack.A_tilde + self.stack.B_tilde @ self.K

    def summary(self):
        return {
            "mode": self.stack.mode,
            "error_dim": int(self.stack.dim),
            "rho_closed": self.rho_closed,
            "rho_Ac": self.rho_Ac,
            "rho_Abar": self.rho_Abar,
            "sigma_max_Ac": self.sigma_max,
            "alpha": self.alpha,
            "dare_residual": self.dare.residual,
            "dare_iterations": self.dare.iterations,
            "observer_phase": self.observer.phase,
            "observer_evaluations": self.observer.evaluations,
            "feedforward_branches": [g.branch for g in self.feedforward],
        }


def build_feedforward(s: Scenario, pm: ParentMap):
    gains = []
    for i, j in pm.pairs():
        ag = s.agents[i - 1]
        if s.mode == STATE:
            if j == 0:
                gains.append(state_gains(i, j, ag.A, ag.B, s.leader.A0))
            else:
                par = s.agents[j - 1]
                gains.append(state_gains(i, j, ag.A, ag.B, par.A, par.B))
        else:
            if j == 0:
                gains.append(output_gains(i, j, ag.A, ag.B, ag.C, s.leader.A0, s.leader.C0))
            else:
                par = s.agents[j - 1]
                gains.append(output_gains(i, j, ag.A, ag.B, ag.C, par.A, par.C, par.B))
    return tuple(gains)


def synthesize(s: Scenario, *, seed=None, restarts=3, max_evals=20000, L_list=None) -> SynthesisResult:
    """Full pipeline: validate, feedforward, DARE, observer gains, closed loop.

    ``L_list`` skips the observer optimization and uses the given gains.
    """
    s, pm = validate(s)
    ff = build_feedforward(s, pm)
    stack = build_error_stack(s, pm)
    P, K, info = solve_dare(stack)
    K_list = split_gain(stack, K)
    H_list = build_selectors(pm, stack.block)
    if L_list is None:
        design = synthesize_observer_gains(
            stack, K, K_list, H_list, seed=s.optimizer_seed if seed is None else seed, restarts=restarts, max_evals=max_evals
        )
    else:
        L_list = tuple(ms.as_mat(l) for l in L_list)
        _, A_c, _, _ = assemble_Ac(stack, K, K_list, L_list, H_list)
        sig, rho = ms.max_singular_value(A_c), ms.spectral_radius(A_c)
        design = ObserverDesign(L_list, sig, sig * sig, rho, "given", 0, sig, rho)
    thetas, A_c, Psi, A_bar = assemble_Ac(stack, K, K_list, list(design.L), H_list)
    M1, M2 = compute_M1_M2(stack, P, K, K_list, Psi)
    return SynthesisResult(
        scenario=s,
        parent_map=pm,
        stack=stack,
        feedforward=ff,
        P=P,
        K=K,
        K_list=tuple(K_list),
        H_list=tuple(H_list),
        L_list=tuple(design.L),
        Theta_list=tuple(thetas),
        A_c=A_c,
        A_bar_c=A_bar,
        Psi=Psi,
        M1=M1,
        M2=M2,
        alpha=design.alpha,
        sigma_max=design.sigma_max,
        rho_closed=info.rho_closed,
        rho_Ac=ms.spectral_radius(A_c),
        rho_Abar=ms.spectral_radius(A_bar),
        dare=info,
        observer=design,
    )


__all__ = [
    "DareInfo",
    "ErrorStack",
    "FeedforwardGains",
    "ObserverDesign",
    "SynthesisResult",
    "assemble_Ac",
    "build_error_stack",
    "build_feedforward",
    "compute_M1_M2",
    "cost_weight",
    "dare_residual",
    "feedback_terms",
    "feedforward_output",
    "feedforward_state",
    "initial_observer_gains",
    "output_gains",
    "pattern_search",
    "solve_dare",
    "solve_dare_matrices",
    "split_gain",
    "state_gains",
    "synthesize",
    "synthesize_observer_gains",
]
