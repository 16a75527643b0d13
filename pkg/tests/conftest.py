import json
from pathlib import Path

import numpy as np
import pytest

from ffconsensus.graph import Topology
from ffconsensus.io import load_scenario
from ffconsensus.model import AgentModel, LeaderModel, Scenario, Weights
from ffconsensus.synthesis import synthesize

ORACLES = Path(__file__).parent / "oracles"


def load_oracle(name):
    return json.loads((ORACLES / name).read_text())


def chain_scenario(As, Bs, A0, x0, inits, *, Q=None, R=None, horizon=40, mode="state", Cs=None, C0=None, edges=None, **kw):
    """Small scenario builder; defaults to the chain 0 -> 1 -> ... -> N."""
    N = len(As)
    As = [np.atleast_2d(np.asarray(a, float)) for a in As]
    Bs = [np.atleast_2d(np.asarray(b, float)) for b in Bs]
    A0 = np.atleast_2d(np.asarray(A0, float))
    if edges is None:
        edges = [(i, i + 1, 1.0) for i in range(N)]
    Cs = Cs or [None] * N
    agents = [AgentModel(a, b, None if c is None else np.atleast_2d(np.asarray(c, float))) for a, b, c in zip(As, Bs, Cs)]
    block = As[0].shape[0] if mode == "state" else np.atleast_2d(C0).shape[0]
    Q = np.eye(block) if Q is None else np.atleast_2d(np.asarray(Q, float))
    R = [np.eye(b.shape[1]) for b in Bs] if R is None else [np.atleast_2d(np.asarray(r, float)) for r in R]
    return Scenario(
        topology=Topology.from_edges(N + 1, edges),
        agents=agents,
        leader=LeaderModel(A0, np.atleast_1d(np.asarray(x0, float)), None if C0 is None else np.atleast_2d(np.asarray(C0, float))),
        weights=Weights(Q, tuple(R)),
        initial_states=[np.atleast_1d(np.asarray(x, float)) for x in inits],
        horizon=horizon,
        mode=mode,
        **kw,
    )


def scalar_toy(horizon=40, **kw):
    toy = load_oracle("scalar_observer_grid.json")["toy"]
    return chain_scenario(toy["a"], toy["b"], toy["a0"], [1.0], [[2.0], [-1.0]], horizon=horizon, **kw)


def rotation(theta):
    return np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])


@pytest.fixture(scope="session")
def sec4():
    return load_scenario("paper_sec4")


@pytest.fixture(scope="session")
def sec4_synth(sec4):
    return synthesize(sec4)


@pytest.fixture(scope="session")
def mixed():
    return load_scenario("output_mixed")


@pytest.fixture(scope="session")
def mixed_synth(mixed):
    return synthesize(mixed)


@pytest.fixture(scope="session")
def toy_synth():
    return synthesize(scalar_toy())


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
