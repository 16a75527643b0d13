import numpy as np
import pytest
from scipy.linalg import solve_discrete_are

from ffconsensus.errors import NonStabilizableError
from ffconsensus.graph import validate_spanning_tree
from ffconsensus.io import load_scenario
from ffconsensus.synthesis import build_error_stack, dare_residual, solve_dare, solve_dare_matrices


def test_scalar_golden_ratio():
    P, K, info = solve_dare_matrices(np.eye(1), np.eye(1), np.eye(1), np.eye(1))
    assert P[0, 0] == pytest.approx((1 + np.sqrt(5)) / 2, abs=1e-10)
    assert K[0, 0] == pytest.approx(-P[0, 0] / (1 + P[0, 0]), abs=1e-12)
    assert info.rho_closed < 1


@pytest.mark.parametrize("seed", range(5))
def test_matches_scipy(seed):
    rng = np.random.default_rng(seed)
    A, B = rng.standard_normal((3, 3)), rng.standard_normal((3, 2))
    Q, R = np.eye(3), np.diag([1.0, 2.0])
    P, K, info = solve_dare_matrices(A, B, Q, R)
    ref = solve_discrete_are(A, B, Q, R)
    assert np.allclose(P, ref, rtol=1e-9, atol=1e-9)
    assert np.allclose(K, -np.linalg.solve(R + B.T @ ref @ B, B.T @ ref @ A), atol=1e-8)
    assert dare_residual(P, A, B, Q, R) <= 1e-10 * max(1.0, np.abs(P).max())


def test_uncontrollable_unstable_mode():
    A, B = np.diag([0.5, 2.0]), np.array([[1.0], [0.0]])
    with pytest.raises(NonStabilizableError):
        solve_dare_matrices(A, B, np.eye(2), np.eye(1))


def test_uncontrollable_stable_mode_is_fine():
    A, B = np.diag([2.0, 0.5]), np.array([[1.0], [0.0]])
    P, _, info = solve_dare_matrices(A, B, np.eye(2), np.eye(1))
    assert info.rho_closed < 1
    assert np.allclose(P, solve_discrete_are(A, B, np.eye(2), np.eye(1)), atol=1e-9)


def test_blockwise_equals_stacked():
    s = load_scenario("paper_sec4")
    stack = build_error_stack(s, validate_spanning_tree(s.topology))
    P, K, info = solve_dare(stack)
    ref = solve_discrete_are(stack.A_tilde, stack.B_tilde, stack.Q_cal, stack.R_cal)
    assert np.allclose(P, ref, atol=1e-9)
    assert info.residual <= 1e-10
