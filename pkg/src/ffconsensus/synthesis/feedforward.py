"""Feedforward laws that cancel the dynamics mismatch between an agent and its parent.

Both laws are linear in the data agent ``i`` is allowed to read:

    u_ff = G_self @ x_i + G_parent @ x_j + G_input @ u_j

``FeedforwardGains`` stores those three matrices; they are computed once at
synthesis time.  When the parent is the leader its input matrix is taken as
zero, so ``G_input`` is empty.
"""

from dataclasses import dataclass

import numpy as np

from .. import matstack as ms
from ..errors import FeedforwardInfeasibleError, SingularityError

RANGE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class FeedforwardGains:
    agent: int
    parent: int
    G_self: np.ndarray
    G_parent: np.ndarray
    G_input: np.ndarray
    branch: str

    def apply(self, x_i, x_j, u_j):
        out = self.G_self @ x_i + self.G_parent @ x_j
        if self.G_input.size:
            out = out + self.G_input @ u_j
        return out


def _in_range(B, M, tol=RANGE_TOL):
    """Rang(M) within Rang(B), judged by comparing rank([B | M]) with rank(B)."""
    if M.size == 0 or not np.any(M):
        return True
    return ms.matrix_rank(np.hstack([B, M]), tol=tol) == ms.matrix_rank(B, tol=tol)


def _invertible(B):
    return B.shape[0] == B.shape[1] and ms.matrix_rank(B, tol=1e-12) == B.shape[0]


def state_gains(agent, parent, A_i, B_i, A_j, B_j=None) -> FeedforwardGains:
    """Gains for u_ff = -B_i^-1 (A_i - A_j) x_j + B_i^-1 B_j u_j.

    Falls back to the pseudoinverse (free term set to zero) when B_i is not
    invertible but the mismatch lies in its range.  ``B_j=None`` marks the
    leader as parent.
    """
    A_i, B_i, A_j = ms.as_mat(A_i), ms.as_mat(B_i), ms.as_mat(A_j)
    n, m = B_i.shape
    diff = A_i - A_j
    rhs = diff if B_j is None else np.hstack([diff, ms.as_mat(B_j)])
    if _invertible(B_i):
        try:
            sol = ms.solve_linear(B_i, rhs)
            branch = "inverse"
        except SingularityError:
            sol = None
    else:
        sol = None
    if sol is None:
        if not _in_range(B_i, rhs):
            what = f"B_{parent}" if _in_range(B_i, diff) else f"A_{agent} - A_{parent}"
            raise FeedforwardInfeasibleError(
                f"agent {agent} (parent {parent}): B_{agent} is not invertible and the range of {what} "
                f"is not contained in the range of B_{agent}",
                agent=agent,
                parent=parent,
            )
        sol = ms.pseudo_inverse(B_i) @ rhs
        branch = "pseudoinverse"
    G_parent = -sol[:, :n]
    G_input = sol[:, n:] if B_j is not None else np.zeros((m, 0))
    return FeedforwardGains(agent, parent, np.zeros((m, n)), G_parent, G_input, branch)


def output_gains(agent, parent, A_i, B_i, C_i, A_j, C_j, B_j=None) -> FeedforwardGains:
    """Gains for the output-consensus feedforward.

    u_ff = -(C_i B_i)^-1 C_i (A_i - I) x_i + (C_i B_i)^-1 C_j (A_j - I) x_j
           + (C_i B_i)^-1 C_j B_j u_j

    For square invertible B_i the first term equals -B_i^-1 (A_i - I) x_i; the
    form above also covers agents whose state is larger than their output.
    """
    A_i, B_i, C_i = ms.as_mat(A_i), ms.as_mat(B_i), ms.as_mat(C_i)
    A_j, C_j = ms.as_mat(A_j), ms.as_mat(C_j)
    CB = C_i @ B_i
    if CB.shape[0] != CB.shape[1]:
        raise FeedforwardInfeasibleError(
            f"agent {agent}: C_{agent} B_{agent} is {CB.shape[0]}x{CB.shape[1]}, not square",
            agent=agent,
            parent=parent,
        )
    n_i, n_j = A_i.shape[0], A_j.shape[0]
    blocks = [C_i @ (A_i - np.eye(n_i)), C_j @ (A_j - np.eye(n_j))]
    if B_j is not None:
        blocks.append(C_j @ ms.as_mat(B_j))
    try:
        sol = ms.solve_linear(CB, np.hstack(blocks))
    except SingularityError:
        raise FeedforwardInfeasibleError(
            f"agent {agent}: C_{agent} B_{agent} is singular", agent=agent, parent=parent
        ) from None
    G_self = -sol[:, :n_i]
    G_parent = sol[:, n_i:n_i + n_j]
    G_input = sol[:, n_i + n_j:] if B_j is not None else np.zeros((CB.shape[0], 0))
    return FeedforwardGains(agent, parent, G_self, G_parent, G_input, "inverse")


def feedforward_state(A_i, B_i, A_j, B_j, x_j, u_j, *, agent=None, parent=None):
    """One-shot evaluation of the state feedforward (``B_j=None`` for the leader)."""
    g = state_gains(agent, parent, A_i, B_i, A_j, B_j)
    return g.apply(np.zeros(g.G_self.shape[1]), np.asarray(x_j, float), None if B_j is None else np.asarray(u_j, float))


def feedforward_output(A_i, B_i, C_i, x_i, A_j, C_j, B_j, x_j, u_j, *, agent=None, parent=None):
    g = output_gains(agent, parent, A_i, B_i, C_i, A_j, C_j, B_j)
    return g.apply(np.asarray(x_i, float), np.asarray(x_j, float), None if B_j is None else np.asarray(u_j, float))
