import numpy as np
import pytest

from extphase.errors import NonConvergence, NotApplicable
from extphase.integrators import Method, MethodDescriptor
from extphase.matkernels import sp_residual, structure_matrix
from extphase.model import PerturbedOscillator, initial_point
from extphase.harness import drift_ratio
from extphase.verify import (
    check_canonicity,
    check_exponential_exactness,
    check_K_conservation,
    check_symmetry,
    estimate_order,
    extended_ordering,
    extended_structure_matrix,
    K_series,
    order_h0,
    order_problem,
    random_sp,
    trajectory_points,
)

Q0 = (1.0, 2.0, 3.0, 4.0)
P0 = (4.0, 1.0, 2.0, 3.0)


@pytest.fixture
def osc():
    return PerturbedOscillator(4, 0.3, 0.1)


@pytest.fixture
def z0(osc):
    return initial_point(osc, Q0, P0)


@pytest.mark.parametrize("n", [1, 2, 4])
def test_extended_structure_matrix_is_permuted_storage_form(n):
    # storage order (q, p, t, u): J_n on (q, p) and [[0, 1], [-1, 0]] on (t, u)
    m = 2 * n + 2
    J_store = np.zeros((m, m))
    J_store[: 2 * n, : 2 * n] = structure_matrix(n)
    J_store[2 * n, 2 * n + 1] = 1.0
    J_store[2 * n + 1, 2 * n] = -1.0
    perm = extended_ordering(n)
    Jt = extended_structure_matrix(n)
    assert np.array_equal(Jt, J_store[np.ix_(perm, perm)])
    assert np.array_equal(Jt, structure_matrix(n + 1))


def test_canonicity_of_lie_gauss(osc, z0):
    rep = check_canonicity("lie_gauss", osc, z0, 0.3)
    assert rep.symplectic_residual_Yy <= 1e-6
    assert rep.w_condition_residual <= 1e-6
    assert rep.extended_residual <= 1e-6


def test_canonicity_of_reference_step(osc, z0):
    assert check_canonicity("lie_gauss", osc, z0, 0.02).worst <= 1e-6


def test_canonicity_autonomous_lie_euler():
    prob = PerturbedOscillator(4, 0.0, 0.1)
    z = initial_point(prob, Q0, P0)
    assert check_canonicity("lie_euler", prob, z, 0.3).w_condition_residual <= 1e-6


@pytest.mark.parametrize("mid", ["radau2a", "lobatto3c", "kahan"])
def test_canonicity_detects_non_canonical_rk(mid, osc, z0):
    assert check_canonicity(mid, osc, z0, 0.3).symplectic_residual_Yy >= 1e-8


def test_canonicity_without_u_update(osc, z0):
    rep = check_canonicity("symplectic_euler", osc, z0, 0.3)
    assert rep.w_condition_residual is None and rep.extended_residual is None
    assert rep.worst == rep.symplectic_residual_Yy
    assert set(rep.as_dict()) == {"symplectic_residual_Yy", "w_condition_residual", "extended_residual"}


def test_canonicity_fd_step_range(osc, z0):
    with pytest.raises(ValueError):
        check_canonicity("lie_gauss", osc, z0, 0.3, fd_step=1e-3)


def test_exponential_exactness_examples(osc):
    A = osc.A(0.0)
    y = np.array(Q0 + P0)
    assert check_exponential_exactness("lie_gauss", A, y, 0.0, 0.3) <= 1e-11
    assert check_exponential_exactness("exp_sym_noncan", A, y, 0.0, 0.3) <= 1e-11
    assert check_exponential_exactness("midpoint", A, y, 0.0, 0.3) > 1e-6


def test_symmetry_examples(osc, z0):
    assert check_symmetry("midpoint", osc, z0, 0.3) <= 1e-12
    assert check_symmetry("lie_euler", osc, z0, 0.3) > 1e-4
    assert check_symmetry("lobatto3c", osc, z0, 0.3) > 1e-6


def test_exp_sym_noncan_adjoint_identity(osc, z0):
    # symmetry is asserted for this method but not proven; check the (q, p, t) map
    assert check_symmetry("exp_sym_noncan", osc, z0, 0.3) <= 1e-12


@pytest.mark.parametrize("mid,lo,hi", [("lie_gauss", 3.8, 4.2), ("lie_euler", 0.8, 1.2), ("radau2a", 2.8, 3.2)])
def test_order_estimates(mid, lo, hi):
    prob, z = order_problem()
    est = estimate_order(mid, prob, z, 10.0, order_h0(mid))
    assert lo <= est.measured_order <= hi
    assert est.errors[0] > est.errors[1] > est.errors[2]
    assert est.step_sizes == (order_h0(mid), order_h0(mid) / 2, order_h0(mid) / 4)


def test_order_estimate_needs_commensurate_interval():
    prob, z = order_problem()
    with pytest.raises(ValueError):
        estimate_order("lie_euler", prob, z, 10.0, 0.3)


def test_order_estimate_nonconvergence():
    frozen = Method(MethodDescriptor("frozen", "Frozen", 1, False, False, False, has_u_update=False),
                    lambda prob, y, t, u, h, with_u=True: (y, u))
    prob, z = order_problem()
    with pytest.raises(NonConvergence):
        estimate_order(frozen, prob, z, 1.0, 0.1)


@pytest.mark.parametrize("mid", ["lie_euler", "lie_midpoint", "lie_gauss", "projection"])
def test_K_conserved_for_autonomous_problem(mid):
    prob = PerturbedOscillator(4, 0.0, 0.1)
    z = initial_point(prob, Q0, P0)
    assert check_K_conservation(mid, prob, z, 200, 0.3) <= 1e-10


@pytest.mark.parametrize("mid", ["lie_gauss", "midpoint"])
def test_K_bounded_without_drift(mid, osc, z0):
    K = K_series(mid, osc, z0, 10000, 0.3)
    assert K[0] == 0.0
    assert drift_ratio(K) <= 2.0


def test_K_not_applicable(osc, z0):
    with pytest.raises(NotApplicable):
        check_K_conservation("exp_noncan", osc, z0, 10, 0.3)


def test_trajectory_points_spacing(osc, z0):
    pts = trajectory_points("lie_gauss", osc, z0, 0.3, 100, 5)
    assert [round(p.t, 9) for p in pts] == [0.0, 7.5, 15.0, 22.5, 30.0]


def test_random_sp_in_algebra():
    rng = np.random.default_rng(3)
    assert sp_residual(random_sp(4, rng)) <= 1e-14
    X = random_sp(2, rng, scale=2.0)
    assert np.linalg.norm(X) == pytest.approx(2.0)
