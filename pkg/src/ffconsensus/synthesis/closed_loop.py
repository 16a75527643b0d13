"""Closed-loop matrices of the observer-based distributed feedback."""

import numpy as np

from .. import matstack as ms
from ..errors import ContractError


def split_gain(stack, K):
    """Row slices K_i of the global gain, one per agent."""
    return [K[stack.input_slice(i), :].copy() for i in range(stack.N)]


def feedback_terms(stack, K_list):
    """B~_i K_i for every agent."""
    return [stack.B_cols[i] @ K_list[i] for i in range(stack.N)]


def assemble_Ac(stack, K, K_list, L_list, H_list):
    """Return ``(Theta_list, A_c, Psi, A_bar_c)``.

    Theta_i = A~ + B~K - B~_i K_i - L_i H_i sits on the diagonal of A_c and
    -B~_j K_j fills off-diagonal block (i, j).  A_bar_c = [[A~+B~K, Psi], [0, A_c]].
    """
    D = stack.dim
    N = stack.N
    if K.shape != (sum(stack.input_dims), D):
        raise ContractError(f"K has shape {K.shape}, expected {(sum(stack.input_dims), D)}")
    if len(K_list) != N or len(L_list) != N or len(H_list) != N:
        raise ContractError("need one K_i, L_i and H_i per agent")
    for i in range(N):
        if L_list[i].shape[0] != D or H_list[i].shape[1] != D or L_list[i].shape[1] != H_list[i].shape[0]:
            raise ContractError(f"agent {i + 1}: L_i {L_list[i].shape} and H_i {H_list[i].shape} are inconsistent")
    closed = stack.A_tilde + stack.B_tilde @ K
    BK = feedback_terms(stack, K_list)
    thetas = [closed - BK[i] - L_list[i] @ H_list[i] for i in range(N)]
    A_c = np.zeros((N * D, N * D))
    for i in range(N):
        for j in range(N):
            A_c[i * D:(i + 1) * D, j * D:(j + 1) * D] = thetas[i] if i == j else -BK[j]
    Psi = np.hstack([-b for b in BK])
    A_bar = np.zeros(((N + 1) * D, (N + 1) * D))
    A_bar[:D, :D] = closed
    A_bar[:D, D:] = Psi
    A_bar[D:, D:] = A_c
    return thetas, A_c, Psi, A_bar


def compute_M1_M2(stack, P, K, K_list, Psi):
    """Cost-correction matrices of the distributed controller.

    M1 = (A~+B~K)' P Psi - [K_1'R_1K_1 ... K_N'R_NK_N]
    M2 = blockdiag(K_i'R_iK_i) + Psi' P Psi
    """
    D = stack.dim
    if P.shape != (D, D) or Psi.shape != (D, stack.N * D):
        raise ContractError(f"P {P.shape} / Psi {Psi.shape} do not match error dimension {D}")
    KRK = [K_list[i].T @ stack.R_blocks[i] @ K_list[i] for i in range(stack.N)]
    closed = stack.A_tilde + stack.B_tilde @ K
    M1 = closed.T @ P @ Psi - np.hstack(KRK)
    M2 = ms.block_diag(*KRK) + Psi.T @ P @ Psi
    return M1, 0.5 * (M2 + M2.T)


def cost_weight(M1, M2):
    """The symmetric weight [[0, M1], [M1', M2]] acting on [E; E~]."""
    D = M1.shape[0]
    W = np.zeros((D + M2.shape[0], D + M2.shape[0]))
    W[:D, D:] = M1
    W[D:, :D] = M1.T
    W[D:, D:] = M2
    return W
