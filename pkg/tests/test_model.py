import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from extphase.errors import DimensionError
from extphase.matkernels import structure_matrix
from extphase.model import (
    ExtendedPoint,
    LinearHamiltonianProblem,
    PerturbedOscillator,
    PhasePoint,
    extended_hamiltonian,
    extended_vector_field,
    hamiltonian,
    hamiltonian_time_derivative,
    initial_point,
)

Q0 = (1.0, 2.0, 3.0, 4.0)
P0 = (4.0, 1.0, 2.0, 3.0)


@pytest.fixture
def osc1():
    return PerturbedOscillator(1, 0.3, 0.1)


@pytest.fixture
def osc4():
    return PerturbedOscillator(4, 0.1, 0.123)


def test_hamiltonian_examples(osc1, osc4):
    assert hamiltonian(osc1, [1.0, 0.0], 0.0) == 0.5
    assert hamiltonian(osc4, np.zeros(8), 3.0) == 0.0
    assert hamiltonian(osc4, PhasePoint(Q0, P0), 0.0) == 30.0


def test_hamiltonian_closed_form(osc4):
    y = np.array(Q0 + P0)
    t = 2.7
    w2 = 1.0 + 0.1 * np.sin(0.123 * t)
    assert hamiltonian(osc4, y, t) == pytest.approx(0.5 * (w2 * 30.0 + 30.0), rel=1e-15)


def test_time_derivative_examples(osc1):
    assert hamiltonian_time_derivative(osc1, [2.0, 5.0], 0.0) == pytest.approx(0.06, rel=1e-14)
    assert hamiltonian_time_derivative(osc1, [0.0, 0.0], 1.0) == 0.0
    const = LinearHamiltonianProblem.constant(PerturbedOscillator(1, 0.0, 0.0).A(0.0))
    assert hamiltonian_time_derivative(const, [2.0, 5.0], 1.0) == 0.0


@settings(max_examples=30, deadline=None)
@given(
    st.lists(st.floats(-3, 3), min_size=4, max_size=4),
    st.floats(0, 100),
)
def test_time_derivative_matches_finite_difference(yv, t):
    prob = PerturbedOscillator(2, 0.3, 0.1)
    y = np.array(yv)
    d = 1e-4
    fd = (hamiltonian(prob, y, t + d) - hamiltonian(prob, y, t - d)) / (2 * d)
    assert abs(fd - hamiltonian_time_derivative(prob, y, t)) <= 1e-8 * max(1.0, float(y @ y))


def test_extended_vector_field_examples(osc1):
    z = initial_point(osc1, [1.0], [2.0])
    np.testing.assert_allclose(extended_vector_field(osc1, z), [2.0, -1.0, 1.0, -0.015], rtol=1e-14)
    zero = ExtendedPoint(np.zeros(2), 0.5, 0.0)
    np.testing.assert_array_equal(extended_vector_field(osc1, zero), [0.0, 0.0, 1.0, 0.0])


def test_extended_vector_field_autonomous_has_no_u_change():
    prob = PerturbedOscillator(2, 0.0, 0.5)
    z = ExtendedPoint(np.arange(1.0, 5.0), 3.0, 1.0)
    assert extended_vector_field(prob, z)[-1] == 0.0


def test_phase_flow_is_hamiltonian_gradient(osc4):
    rng = np.random.default_rng(7)
    J = structure_matrix(4)
    for _ in range(5):
        y, t = rng.standard_normal(8), rng.uniform(0, 100)
        d = 1e-6
        grad = np.array(
            [(hamiltonian(osc4, y + d * e, t) - hamiltonian(osc4, y - d * e, t)) / (2 * d) for e in np.eye(8)]
        )
        field = extended_vector_field(osc4, ExtendedPoint(y, t, 0.0))[:8]
        np.testing.assert_allclose(field, J @ grad, atol=1e-6)
        np.testing.assert_array_equal(field, osc4.A(t) @ y)


def test_extended_hamiltonian_examples(osc4):
    z0 = initial_point(osc4, Q0, P0)
    assert z0.u == -30.0
    assert extended_hamiltonian(osc4, z0) == 0.0
    z = ExtendedPoint(z0.y, 1.3, 0.0)
    assert extended_hamiltonian(osc4, z) == hamiltonian(osc4, z0.y, 1.3)


def test_coefficient_structure(osc4):
    times = np.linspace(0, 200, 41)
    assert osc4.check_structure(times) <= 1e-13
    for t in times:
        S = osc4.J @ osc4.A(t)
        assert np.array_equal(S, S.T)


def test_coefficient_derivative_consistent(osc4):
    d = 1e-5
    for t in np.linspace(0, 60, 13):
        fd = (osc4.A(t + d) - osc4.A(t - d)) / (2 * d)
        assert np.max(np.abs(fd - osc4.dA(t))) <= 1e-6


def test_check_structure_rejects_non_sp():
    bad = LinearHamiltonianProblem(1, lambda t: np.eye(2), lambda t: np.zeros((2, 2)))
    with pytest.raises(ValueError):
        bad.check_structure([0.0])


def test_dimension_errors(osc4):
    with pytest.raises(DimensionError):
        hamiltonian(osc4, np.ones(6), 0.0)
    with pytest.raises(DimensionError):
        extended_vector_field(osc4, ExtendedPoint(np.ones(2), 0.0, 0.0))
    with pytest.raises(DimensionError):
        PhasePoint([1.0, 2.0], [1.0])
    with pytest.raises(DimensionError):
        ExtendedPoint(np.ones(3), 0.0, 0.0)


def test_points_reject_non_finite():
    with pytest.raises(ValueError):
        ExtendedPoint(np.ones(2), np.nan, 0.0)
    with pytest.raises(ValueError):
        PhasePoint([np.inf], [0.0])


def test_extended_point_round_trip():
    z = ExtendedPoint(np.arange(6.0), 1.5, -2.0)
    assert np.array_equal(ExtendedPoint.from_array(z.as_array()).as_array(), z.as_array())
    assert np.array_equal(z.q, [0.0, 1.0, 2.0]) and np.array_equal(z.p, [3.0, 4.0, 5.0])
    assert np.array_equal(PhasePoint.from_vector(z.y).vector, z.y)
