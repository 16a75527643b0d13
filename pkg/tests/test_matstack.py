import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ffconsensus import matstack as ms
from ffconsensus.errors import ConditioningError, ContractError, DimensionError, SingularityError

BACKENDS = ["numba", "numpy"]


@pytest.fixture(params=BACKENDS)
def backend(request):
    with ms.use_backend(request.param):
        yield request.param


def _matrices(max_dim=6):
    shape = st.tuples(st.integers(1, max_dim), st.integers(1, max_dim))
    return shape.flatmap(lambda s: arrays(np.float64, s, elements=st.floats(-10, 10, allow_nan=False, allow_subnormal=False, width=64)))


def _norm(M):
    """Frobenius norm that neither underflows nor overflows."""
    s = float(np.max(np.abs(M))) if M.size else 0.0
    return 0.0 if s == 0.0 else s * float(np.linalg.norm(M / s))


def _square(max_dim=7):
    return st.integers(1, max_dim).flatmap(
        lambda n: arrays(np.float64, (n, n), elements=st.floats(-10, 10, allow_nan=False, allow_subnormal=False, width=64))
    )


class TestAsMat:
    def test_vector_becomes_column(self):
        assert ms.as_mat([1, 2, 3]).shape == (3, 1)

    def test_rejects_nonfinite(self):
        with pytest.raises(ContractError):
            ms.as_mat([[1.0, np.nan]])

    def test_rejects_3d(self):
        with pytest.raises(DimensionError):
            ms.as_mat(np.zeros((2, 2, 2)))


def test_rotation_spectrum(backend):
    th = 0.5
    R = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    ev = np.sort_complex(ms.eigvals(R))
    assert np.allclose(ev, np.sort_complex(np.array([np.exp(-1j * th), np.exp(1j * th)])), atol=1e-14)
    assert ms.spectral_radius(R) == pytest.approx(1.0, abs=1e-14)


def test_jordan_block_radius(backend):
    J = np.array([[0.9, 1.0, 0.0], [0.0, 0.9, 1.0], [0.0, 0.0, 0.9]])
    assert ms.spectral_radius(J) == pytest.approx(0.9, abs=1e-5)


def test_empty_inputs(backend):
    assert ms.spectral_radius(np.zeros((0, 0))) == 0.0
    assert ms.pseudo_inverse(np.zeros((0, 3))).shape == (3, 0)


@settings(max_examples=150, deadline=None)
@given(_square())
def test_eigvals_match_lapack(m):
    ref = np.max(np.abs(np.linalg.eigvals(m)))
    n = m.shape[0]
    # a defective eigenvalue of multiplicity n moves by up to (eps ||m||)^(1/n)
    tol = 4.0 * _norm(m) * (1e-15) ** (1.0 / n)
    for name in BACKENDS:
        with ms.use_backend(name):
            assert ms.spectral_radius(m) == pytest.approx(ref, abs=tol + 1e-300)


@settings(max_examples=150, deadline=None)
@given(_matrices())
def test_singular_values_match_lapack(m):
    ref = np.linalg.svd(m, compute_uv=False)
    for name in BACKENDS:
        with ms.use_backend(name):
            s = ms.singular_values(m)
            assert np.allclose(s, ref, rtol=1e-10, atol=1e-10 * max(1.0, ref[0]))
            assert ms.max_singular_value(m) == pytest.approx(ref[0], rel=1e-10, abs=1e-12)


@settings(max_examples=150, deadline=None)
@given(_matrices())
def test_penrose_conditions(m):
    # normwise residuals scaled by the products each identity carries
    for name in BACKENDS:
        with ms.use_backend(name):
            X = ms.pseudo_inverse(m)
            a, x = _norm(m), _norm(X)
            if a == 0.0:
                assert x == 0.0
                continue
            ax = a * x
            # compare in units of the input so products stay representable
            mu, xu = m / a, X * a
            assert _norm(mu @ xu @ mu - mu) <= 1e-8 * max(1.0, ax)
            assert _norm(xu @ mu @ xu - xu) <= 1e-8 * (x * a) * max(1.0, ax)
            assert _norm(mu @ xu - (mu @ xu).T) <= 1e-8 * max(1.0, ax)
            assert _norm(xu @ mu - (xu @ mu).T) <= 1e-8 * max(1.0, ax)


@settings(max_examples=150, deadline=None)
@given(_square())
def test_sigma_max_bounds_rho(m):
    for name in BACKENDS:
        with ms.use_backend(name):
            assert ms.max_singular_value(m) >= ms.spectral_radius(m) - 1e-9 * max(1.0, np.abs(m).max())


def test_pinv_of_invertible_is_inverse(backend):
    A = np.array([[2.0, 1.0], [1.0, 3.0]])
    assert np.allclose(ms.pseudo_inverse(A), np.linalg.inv(A), atol=1e-14)


def test_pinv_overflow_raises(backend):
    with pytest.raises(ConditioningError):
        ms.pseudo_inverse(np.array([[2.2e-313]]))


def test_pinv_rank_one(backend):
    A = np.array([[1.0, 2.0], [2.0, 4.0]])
    assert np.allclose(ms.pseudo_inverse(A), A.T / 25.0, atol=1e-14)


def test_solve_linear(backend):
    rng = np.random.default_rng(3)
    A = rng.standard_normal((5, 5))
    b = rng.standard_normal(5)
    x = ms.solve_linear(A, b)
    assert x.shape == (5,)
    assert np.allclose(A @ x, b, atol=1e-12)


def test_solve_linear_singular(backend):
    with pytest.raises(SingularityError):
        ms.solve_linear(np.array([[1.0, 2.0], [2.0, 4.0]]), np.ones(2))


def test_symmetric_eigvals(backend):
    S = np.array([[2.0, 1.0, 0.0], [1.0, 2.0, 1.0], [0.0, 1.0, 2.0]])
    assert np.allclose(ms.symmetric_eigvals(S), [2 - np.sqrt(2), 2, 2 + np.sqrt(2)], atol=1e-13)
    with pytest.raises(ContractError):
        ms.symmetric_eigvals(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_definiteness(backend):
    assert ms.is_positive_definite(np.eye(3))
    assert not ms.is_positive_definite(np.diag([1.0, 0.0]))
    assert ms.is_positive_semidefinite(np.diag([1.0, 0.0]))
    assert not ms.is_positive_semidefinite(np.diag([1.0, -1e-3]))


def test_rank_and_block_diag():
    assert ms.matrix_rank(np.array([[1.0, 2.0], [2.0, 4.0]])) == 1
    B = ms.block_diag(np.eye(2), 3 * np.ones((1, 3)))
    assert B.shape == (3, 5)
    assert B[2, 2:].tolist() == [3.0, 3.0, 3.0] and B[:2, 2:].sum() == 0


def test_backend_switch_restores():
    before = ms.backend()
    with ms.use_backend("numpy"):
        assert ms.backend() == "numpy"
    assert ms.backend() == before
    with pytest.raises(ValueError):
        ms.set_backend("fortran")
