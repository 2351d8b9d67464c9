import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from extphase.errors import DimensionError, InvalidMatrix, LogDomainError, SeriesDivergence
from extphase.matkernels import (
    commutator,
    dexp,
    fro,
    mat_exp,
    mat_log_near_identity,
    project_sp,
    sp_residual,
    sqrtm_denman_beavers,
    structure_matrix,
    symplectic_residual,
)


def eig_expm(X):
    """Oracle: exponential through an eigendecomposition (diagonalisable X)."""
    w, V = np.linalg.eig(X)
    return (V @ np.diag(np.exp(w)) @ np.linalg.inv(V)).real


def random_matrix(rng, d, norm):
    X = rng.standard_normal((d, d))
    return X * (norm / fro(X))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# -- structure matrix ---------------------------------------------------------


@pytest.mark.parametrize("n", [1, 2, 4, 5])
def test_structure_matrix_algebra_exact(n):
    J = structure_matrix(n)
    assert np.array_equal(J.T, -J)
    assert np.array_equal(J @ J, -np.eye(2 * n))
    assert np.array_equal(J[:n, n:], np.eye(n))


def test_structure_matrix_is_read_only():
    with pytest.raises(ValueError):
        structure_matrix(2)[0, 0] = 1.0


def test_structure_matrix_rejects_nonpositive():
    with pytest.raises(ValueError):
        structure_matrix(0)


# -- exponential --------------------------------------------------------------


def test_exp_of_zero_is_exact_identity():
    assert np.array_equal(mat_exp(np.zeros((8, 8))), np.eye(8))


def test_exp_rotation_closed_form():
    J = structure_matrix(1)
    E = mat_exp(math.pi / 2 * J)
    np.testing.assert_allclose(E, [[0.0, 1.0], [-1.0, 0.0]], atol=1e-15)


@pytest.mark.parametrize("theta", [0.1, 1.0, 3.0, 10.0])
def test_exp_rotation_angles(theta):
    J = structure_matrix(1)
    expected = math.cos(theta) * np.eye(2) + math.sin(theta) * J
    np.testing.assert_allclose(mat_exp(theta * J), expected, atol=1e-13 * max(1, theta))


def test_exp_diagonal_matches_scalar_exp():
    D = np.diag([0.1, -0.3, 0.7])
    np.testing.assert_allclose(mat_exp(D), np.diag(np.exp([0.1, -0.3, 0.7])), rtol=1e-14)


@pytest.mark.parametrize("norm", [0.05, 0.5, 2.0, 8.0])
def test_exp_against_eigen_oracle(rng, norm):
    X = random_matrix(rng, 6, norm)
    E = mat_exp(X)
    ref = eig_expm(X)
    assert fro(E - ref) <= 1e-12 * fro(ref)


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, (4, 4), elements=st.floats(-1.0, 1.0)))
def test_exp_inverse_round_trip(X):
    X = X * min(1.0, 2.0 / max(fro(X), 1e-300))
    assert fro(mat_exp(-X) @ mat_exp(X) - np.eye(4)) <= 1e-12


def test_exp_rejects_bad_input():
    with pytest.raises(InvalidMatrix):
        mat_exp(np.array([[np.nan, 0.0], [0.0, 1.0]]))
    with pytest.raises(InvalidMatrix):
        mat_exp(np.ones((2, 3)))
    with pytest.raises(ValueError):
        mat_exp(np.eye(2), tol=0.1)


# -- logarithm ----------------------------------------------------------------


def test_log_of_identity_is_zero():
    assert fro(mat_log_near_identity(np.eye(5))) == 0.0


def test_log_diagonal_matches_scalar_log():
    L = mat_log_near_identity(np.diag([1.2, 0.9]))
    np.testing.assert_allclose(L, np.diag([math.log(1.2), math.log(0.9)]), atol=1e-14)


@pytest.mark.parametrize("norm", [0.01, 0.3, 0.5])
def test_log_exp_round_trip(rng, norm):
    for _ in range(5):
        X = random_matrix(rng, 8, norm)
        assert fro(mat_log_near_identity(mat_exp(X)) - X) <= 1e-12


def test_exp_log_round_trip(rng):
    B = np.eye(6) + random_matrix(rng, 6, 0.6)
    assert fro(mat_exp(mat_log_near_identity(B)) - B) <= 1e-12 * fro(B)


def test_log_uses_square_roots_beyond_series_radius():
    B = np.diag([3.0, 0.4, 1.5])
    np.testing.assert_allclose(mat_log_near_identity(B), np.diag(np.log([3.0, 0.4, 1.5])), atol=1e-12)


def test_log_domain_error_for_singular_matrix():
    with pytest.raises(LogDomainError):
        mat_log_near_identity(np.diag([0.0, 1.0]))


def test_log_domain_error_for_negative_eigenvalue():
    with pytest.raises(LogDomainError):
        mat_log_near_identity(np.diag([-1.0, 1.0]))


def test_denman_beavers_square_root(rng):
    B = np.eye(4) + random_matrix(rng, 4, 0.5)
    S = sqrtm_denman_beavers(B)
    assert fro(S @ S - B) <= 1e-12


# -- commutator and dexp ------------------------------------------------------


def test_commutator_examples(rng):
    X = rng.standard_normal((3, 3))
    assert fro(commutator(X, X)) == 0.0
    assert fro(commutator(np.eye(3), X)) == 0.0
    E12 = np.array([[0.0, 1.0], [0.0, 0.0]])
    E21 = np.array([[0.0, 0.0], [1.0, 0.0]])
    np.testing.assert_array_equal(commutator(E12, E21), [[1.0, 0.0], [0.0, -1.0]])


def test_commutator_dimension_mismatch():
    with pytest.raises(DimensionError):
        commutator(np.eye(2), np.eye(3))


def test_dexp_at_zero_is_identity(rng):
    Y = rng.standard_normal((4, 4))
    np.testing.assert_array_equal(dexp(np.zeros((4, 4)), Y), Y)


def test_dexp_commuting_arguments(rng):
    X = np.diag(rng.standard_normal(4))
    Y = np.diag(rng.standard_normal(4))
    np.testing.assert_allclose(dexp(X, Y), Y, atol=1e-15)


def fd_dexp(X, Y):
    """Oracle: Richardson-extrapolated forward difference of mat_exp along Y."""

    def q(eps):
        return (eig_expm(X + eps * Y) - eig_expm(X)) @ eig_expm(-X) / eps

    return 2.0 * q(5e-5) - q(1e-4)


@pytest.mark.parametrize("seed", range(5))
def test_dexp_against_finite_differences(seed):
    rng = np.random.default_rng(seed)
    X = random_matrix(rng, 6, 1.0)
    Y = random_matrix(rng, 6, 1.0)
    assert fro(dexp(X, Y) - fd_dexp(X, Y)) <= 1e-6


def test_dexp_norm_guard():
    with pytest.raises(SeriesDivergence):
        dexp(6.0 * np.eye(2) + np.array([[0.0, 1.0], [0.0, 0.0]]), np.eye(2))


# -- projection and residuals -------------------------------------------------


def test_projection_properties(rng):
    J = structure_matrix(3)
    X = rng.standard_normal((6, 6))
    Y = rng.standard_normal((6, 6))
    P = project_sp(X)
    assert sp_residual(P) <= 1e-14
    assert fro(project_sp(P) - P) <= 1e-15
    a, b = 0.7, -2.3
    assert fro(project_sp(a * X + b * Y, J) - (a * P + b * project_sp(Y, J))) <= 1e-14
    assert fro(project_sp(np.eye(6))) == 0.0


def test_projection_dimension_mismatch():
    with pytest.raises(DimensionError):
        project_sp(np.eye(4), structure_matrix(1))
    with pytest.raises(DimensionError):
        project_sp(np.eye(3))


def test_symplectic_residual_examples(rng):
    assert symplectic_residual(np.eye(4)) == 0.0
    J = structure_matrix(2)
    assert symplectic_residual(2.0 * np.eye(4)) == pytest.approx(3.0 * fro(J), rel=1e-15)
    X = project_sp(rng.standard_normal((4, 4)))
    assert symplectic_residual(mat_exp(0.3 * X)) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, (6, 6), elements=st.floats(-1.0, 1.0)))
def test_exp_of_sp_element_is_symplectic(X):
    assert symplectic_residual(mat_exp(project_sp(X))) <= 1e-11
