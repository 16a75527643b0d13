import numpy as np
import pytest

from ffconsensus.errors import FeedforwardInfeasibleError
from ffconsensus.synthesis import feedforward_output, feedforward_state, output_gains, state_gains

rng = np.random.default_rng(11)


def test_inverse_branch_cancels_mismatch():
    A_i, B_i = rng.standard_normal((3, 3)), rng.standard_normal((3, 3))
    A_j, B_j = rng.standard_normal((3, 3)), rng.standard_normal((3, 2))
    x_j, u_j = rng.standard_normal(3), rng.standard_normal(2)
    x_i = rng.standard_normal(3)
    u = feedforward_state(A_i, B_i, A_j, B_j, x_j, u_j)
    # e(k+1) = A_i e(k) once the feedforward is applied
    e_next = (A_i @ x_i + B_i @ u) - (A_j @ x_j + B_j @ u_j)
    assert np.allclose(e_next, A_i @ (x_i - x_j), atol=1e-12)
    assert state_gains(1, 2, A_i, B_i, A_j, B_j).branch == "inverse"


def test_leader_parent_has_no_input_term():
    A_i, B_i, A_0 = np.diag([1.0, 2.0]), np.eye(2), np.eye(2)
    g = state_gains(1, 0, A_i, B_i, A_0)
    assert g.G_input.shape == (2, 0)
    assert np.allclose(g.apply(np.zeros(2), np.ones(2), None), [0.0, -1.0])


def test_pseudoinverse_branch_when_range_condition_holds():
    B_i = np.array([[1.0], [0.0]])
    A_i = np.array([[2.0, 1.0], [0.0, 0.5]])
    A_j = np.array([[1.0, 0.0], [0.0, 0.5]])
    g = state_gains(1, 0, A_i, B_i, A_j)
    assert g.branch == "pseudoinverse"
    x = np.array([0.3, -0.7])
    assert np.allclose(B_i @ g.apply(np.zeros(2), x, None), -(A_i - A_j) @ x, atol=1e-14)


def test_range_violation_names_agent():
    B_i = np.array([[1.0], [0.0]])
    with pytest.raises(FeedforwardInfeasibleError, match="agent 2") as exc:
        state_gains(2, 1, np.eye(2), B_i, np.diag([1.0, 3.0]), np.eye(2, 1))
    assert exc.value.agent == 2 and exc.value.parent == 1


def test_range_violation_from_parent_input():
    B_i = np.array([[1.0], [0.0]])
    with pytest.raises(FeedforwardInfeasibleError, match="B_1"):
        state_gains(2, 1, np.eye(2), B_i, np.eye(2), np.array([[0.0], [1.0]]))


def test_output_gains_match_state_form_for_square_B():
    A_i, B_i, C_i = rng.standard_normal((2, 2)), rng.standard_normal((2, 2)), rng.standard_normal((2, 2))
    A_j, B_j, C_j = rng.standard_normal((2, 2)), rng.standard_normal((2, 2)), rng.standard_normal((2, 2))
    x_i, x_j, u_j = rng.standard_normal(2), rng.standard_normal(2), rng.standard_normal(2)
    u = feedforward_output(A_i, B_i, C_i, x_i, A_j, C_j, B_j, x_j, u_j)
    CB = C_i @ B_i
    expected = (
        -np.linalg.solve(B_i, (A_i - np.eye(2)) @ x_i)
        + np.linalg.solve(CB, C_j @ (A_j - np.eye(2)) @ x_j)
        + np.linalg.solve(CB, C_j @ B_j @ u_j)
    )
    assert np.allclose(u, expected, atol=1e-12)


def test_output_feedforward_freezes_output_error():
    # n_i = 3 > q = 2
    A_i = np.array([[0.9, 0.2, 0.1], [-0.3, 1.1, 0.0], [0.2, 0.1, 0.5]])
    B_i = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
    C_i = np.array([[1.0, 0.0, 1.0], [0.0, 1.0, 0.0]])
    A_j = np.array([[0.5, 0.1], [0.0, 1.2]])
    B_j, C_j = np.eye(2), np.eye(2)
    x_i, x_j, u_j = rng.standard_normal(3), rng.standard_normal(2), rng.standard_normal(2)
    u = feedforward_output(A_i, B_i, C_i, x_i, A_j, C_j, B_j, x_j, u_j)
    eps = C_i @ x_i - C_j @ x_j
    eps_next = C_i @ (A_i @ x_i + B_i @ u) - C_j @ (A_j @ x_j + B_j @ u_j)
    assert np.allclose(eps_next, eps, atol=1e-12)


def test_output_singular_CB():
    with pytest.raises(FeedforwardInfeasibleError, match="singular"):
        output_gains(1, 0, np.eye(2), np.eye(2), np.array([[1.0, 0.0], [1.0, 0.0]]), np.eye(2), np.eye(2))
