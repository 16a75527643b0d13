"""Stacked pairwise-error system seen by the LQ design."""

from dataclasses import dataclass

import numpy as np

from .. import matstack as ms
from ..graph import ParentMap
from ..model import STATE, Scenario, block_dim


@dataclass(frozen=True, eq=False)
class ErrorStack:
    """Block-diagonal error dynamics E(k+1) = A_tilde E(k) + B_tilde u_bar(k).

    In output mode E is the stacked output error and A_tilde is the identity.
    ``B_cols[i]`` is the column block of B_tilde driven by agent ``i + 1``.
    """

    mode: str
    pair_order: tuple
    block: int
    A_blocks: tuple
    B_blocks: tuple
    Q: np.ndarray
    R_blocks: tuple
    A_tilde: np.ndarray
    B_tilde: np.ndarray
    B_cols: tuple
    Q_cal: np.ndarray
    R_cal: np.ndarray

    @property
    def N(self):
        return len(self.A_blocks)

    @property
    def dim(self):
        return self.A_tilde.shape[0]

    @property
    def input_dims(self):
        return tuple(b.shape[1] for b in self.B_blocks)

    def input_slice(self, i):
        """Rows of the global input vector belonging to agent ``i`` (0-based)."""
        start = sum(self.input_dims[:i])
        return slice(start, start + self.input_dims[i])

    def error_slice(self, i):
        return slice(i * self.block, (i + 1) * self.block)


def build_error_stack(s: Scenario, pm: ParentMap) -> ErrorStack:
    bd = block_dim(s)
    if s.mode == STATE:
        a_blocks = tuple(ag.A for ag in s.agents)
        b_blocks = tuple(ag.B for ag in s.agents)
    else:
        a_blocks = tuple(np.eye(bd) for _ in s.agents)
        b_blocks = tuple(ag.C @ ag.B for ag in s.agents)
    A_tilde = ms.block_diag(*a_blocks)
    B_tilde = ms.block_diag(*b_blocks)
    cols = []
    start = 0
    for b in b_blocks:
        cols.append(B_tilde[:, start:start + b.shape[1]].copy())
        start += b.shape[1]
    N = len(a_blocks)
    Q = s.weights.Q
    return ErrorStack(
        mode=s.mode,
        pair_order=tuple(pm.pairs()),
        block=bd,
        A_blocks=a_blocks,
        B_blocks=b_blocks,
        Q=Q,
        R_blocks=tuple(s.weights.R),
        A_tilde=A_tilde,
        B_tilde=B_tilde,
        B_cols=tuple(cols),
        Q_cal=np.kron(np.eye(N), Q),
        R_cal=ms.block_diag(*s.weights.R),
    )
