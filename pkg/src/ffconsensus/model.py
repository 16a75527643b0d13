"""Problem data: agent and leader dynamics, weights, and scenario validation."""

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import matstack as ms
from .errors import ContractError, ValidationError, WeightDefinitenessError
from .graph import ParentMap, Topology, validate_spanning_tree

STATE = "state"
OUTPUT = "output"
MODES = (STATE, OUTPUT)
OBSERVER_INITS = ("zero", "true", "perturbed")


class DimensionMismatchError(ValidationError):
    pass


class ModeError(ValidationError):
    pass


def _frozen(a):
    a = ms.as_mat(a)
    a.setflags(write=False)
    return a


def _frozen_vec(v, name):
    arr = np.array(v, dtype=np.float64).ravel()
    if not np.all(np.isfinite(arr)):
        raise ContractError(f"{name} has non-finite entries")
    arr.setflags(write=False)
    return arr


def _eq(a, b):
    if a is None or b is None:
        return a is None and b is None
    return a.shape == b.shape and np.array_equal(a, b)


@dataclass(frozen=True, eq=False)
class AgentModel:
    A: np.ndarray
    B: np.ndarray
    C: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "A", _frozen(self.A))
        object.__setattr__(self, "B", _frozen(self.B))
        if self.C is not None:
            object.__setattr__(self, "C", _frozen(self.C))

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def m(self):
        return self.B.shape[1]

    def __eq__(self, other):
        return isinstance(other, AgentModel) and _eq(self.A, other.A) and _eq(self.B, other.B) and _eq(self.C, other.C)


@dataclass(frozen=True, eq=False)
class LeaderModel:
    A0: np.ndarray
    x0: np.ndarray
    C0: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "A0", _frozen(self.A0))
        object.__setattr__(self, "x0", _frozen_vec(self.x0, "leader x0"))
        if self.C0 is not None:
            object.__setattr__(self, "C0", _frozen(self.C0))

    @property
    def p(self):
        return self.A0.shape[0]

    def __eq__(self, other):
        return (
            isinstance(other, LeaderModel)
            and _eq(self.A0, other.A0)
            and _eq(self.x0, other.x0)
            and _eq(self.C0, other.C0)
        )


@dataclass(frozen=True, eq=False)
class Weights:
    Q: np.ndarray
    R: tuple

    def __post_init__(self):
        object.__setattr__(self, "Q", _frozen(self.Q))
        object.__setattr__(self, "R", tuple(_frozen(r) for r in self.R))

    def __eq__(self, other):
        return (
            isinstance(other, Weights)
            and _eq(self.Q, other.Q)
            and len(self.R) == len(other.R)
            and all(_eq(a, b) for a, b in zip(self.R, other.R))
        )


@dataclass(frozen=True, eq=False)
class Scenario:
    topology: Topology
    agents: tuple
    leader: LeaderModel
    weights: Weights
    initial_states: tuple
    horizon: int = 50
    mode: str = STATE
    observer_init: str = "zero"
    optimizer_seed: int = 0
    name: str = ""
    tolerances: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "agents", tuple(self.agents))
        object.__setattr__(
            self,
            "initial_states",
            tuple(_frozen_vec(x, f"initial state {i + 1}") for i, x in enumerate(self.initial_states)),
        )

    @property
    def N(self):
        return len(self.agents)

    def with_horizon(self, horizon):
        return replace(self, horizon=int(horizon))

    def __eq__(self, other):
        return (
            isinstance(other, Scenario)
            and self.topology == other.topology
            and len(self.agents) == len(other.agents)
            and all(a == b for a, b in zip(self.agents, other.agents))
            and self.leader == other.leader
            and self.weights == other.weights
            and len(self.initial_states) == len(other.initial_states)
            and all(_eq(a, b) for a, b in zip(self.initial_states, other.initial_states))
            and self.horizon == other.horizon
            and self.mode == other.mode
            and self.observer_init == other.observer_init
            and self.optimizer_seed == other.optimizer_seed
            and self.name == other.name
            and self.tolerances == other.tolerances
        )


def _check_shape(mat, shape, what, agent=None):
    if mat.shape != shape:
        raise DimensionMismatchError(
            f"{what} has shape {mat.shape[0]}x{mat.shape[1]}, expected {shape[0]}x{shape[1]}",
            agent=agent,
            field=what,
        )


def validate(s: Scenario):
    """Run every consistency check; return ``(s, parent_map)``."""
    if s.mode not in MODES:
        raise ModeError(f"mode must be one of {MODES}, got {s.mode!r}", field="mode")
    if s.observer_init not in OBSERVER_INITS:
        raise ModeError(f"observer_init must be one of {OBSERVER_INITS}, got {s.observer_init!r}", field="observer_init")
    if int(s.horizon) != s.horizon or s.horizon < 0:
        raise ValidationError(f"horizon must be a nonnegative integer, got {s.horizon}", field="horizon")

    N = s.N
    if N < 1:
        raise ValidationError("at least one follower is required", field="agents")
    if s.topology.follower_count != N:
        raise DimensionMismatchError(
            f"topology has {s.topology.follower_count} followers but {N} agents are defined", field="topology"
        )
    pm = validate_spanning_tree(s.topology)

    for i, ag in enumerate(s.agents, start=1):
        if ag.A.shape[0] != ag.A.shape[1]:
            raise DimensionMismatchError(f"agent {i}: A is {ag.A.shape[0]}x{ag.A.shape[1]}, not square", agent=i, field="A")
        if ag.B.shape[0] != ag.n:
            raise DimensionMismatchError(f"agent {i}: B has {ag.B.shape[0]} rows, state dimension is {ag.n}", agent=i, field="B")
        if ag.C is not None and ag.C.shape[1] != ag.n:
            raise DimensionMismatchError(f"agent {i}: C has {ag.C.shape[1]} columns, state dimension is {ag.n}", agent=i, field="C")
        if s.initial_states[i - 1].size != ag.n:
            raise DimensionMismatchError(
                f"agent {i}: initial state has length {s.initial_states[i - 1].size}, expected {ag.n}",
                agent=i,
                field="initial_states",
            )
    if len(s.initial_states) != N:
        raise DimensionMismatchError(f"{len(s.initial_states)} initial states for {N} agents", field="initial_states")

    ld = s.leader
    if ld.A0.shape[0] != ld.A0.shape[1]:
        raise DimensionMismatchError(f"leader A0 is {ld.A0.shape[0]}x{ld.A0.shape[1]}, not square", agent=0, field="A0")
    if ld.x0.size != ld.p:
        raise DimensionMismatchError(f"leader x0 has length {ld.x0.size}, expected {ld.p}", agent=0, field="x0")

    if s.mode == STATE:
        n = s.agents[0].n
        for i, ag in enumerate(s.agents, start=1):
            if ag.n != n:
                raise DimensionMismatchError(
                    f"agent {i}: state dimension {ag.n} differs from agent 1 ({n}); state consensus needs a common n",
                    agent=i,
                    field="A",
                )
        if ld.p != n:
            raise DimensionMismatchError(f"leader dimension {ld.p} differs from agent dimension {n}", agent=0, field="A0")
        if ld.C0 is not None:
            raise ModeError("state consensus does not use a leader output matrix C0", agent=0, field="C0")
        block = n
    else:
        if ld.C0 is None:
            raise ModeError("output consensus requires leader C0", agent=0, field="C0")
        q = ld.C0.shape[0]
        _check_shape(ld.C0, (q, ld.p), "leader C0", agent=0)
        for i, ag in enumerate(s.agents, start=1):
            if ag.C is None:
                raise ModeError(f"agent {i}: output consensus requires C", agent=i, field="C")
            if ag.C.shape[0] != q:
                raise DimensionMismatchError(f"agent {i}: C has {ag.C.shape[0]} outputs, leader has {q}", agent=i, field="C")
            if ag.m != q:
                raise DimensionMismatchError(
                    f"agent {i}: C_i B_i is {q}x{ag.m}; output consensus needs m_i = q = {q}", agent=i, field="B"
                )
        block = q

    w = s.weights
    _check_shape(w.Q, (block, block), "Q")
    if not np.allclose(w.Q, w.Q.T, rtol=0, atol=1e-10 * max(1.0, np.abs(w.Q).max())):
        raise WeightDefinitenessError("Q is not symmetric", field="Q")
    if not ms.is_positive_semidefinite(w.Q):
        raise WeightDefinitenessError("Q is not positive semidefinite", field="Q")
    if len(w.R) != N:
        raise DimensionMismatchError(f"{len(w.R)} input weights for {N} agents", field="R")
    for i, (ag, r) in enumerate(zip(s.agents, w.R), start=1):
        _check_shape(r, (ag.m, ag.m), f"R_{i}", agent=i)
        if not np.allclose(r, r.T, rtol=0, atol=1e-10 * max(1.0, np.abs(r).max())):
            raise WeightDefinitenessError(f"R_{i} is not symmetric", agent=i, field="R")
        if not ms.is_positive_definite(r):
            raise WeightDefinitenessError(f"R_{i} is not positive definite", agent=i, field="R")
    return s, pm


def block_dim(s: Scenario) -> int:
    """Dimension of one pairwise error block: n (state mode) or q (output mode)."""
    if s.mode == STATE:
        return s.agents[0].n
    return s.leader.C0.shape[0]


def is_homogeneous(s: Scenario) -> bool:
    a0 = s.agents[0]
    return all(
        np.array_equal(ag.A, a0.A) and np.array_equal(ag.B, a0.B) for ag in s.agents
    ) and a0.A.shape == s.leader.A0.shape and np.array_equal(a0.A, s.leader.A0)


__all__ = [
    "AgentModel",
    "DimensionMismatchError",
    "LeaderModel",
    "ModeError",
    "OUTPUT",
    "ParentMap",
    "STATE",
    "Scenario",
    "Weights",
    "block_dim",
    "is_homogeneous",
    "validate",
]
