import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from cattaneo_hyp.errors import DomainError
from cattaneo_hyp.symbol import (FLUX, THETA, VEL, EquilibriumState, FluidState, Symbol8, assemble_A,
                                 assemble_A0, assemble_N, assemble_symbol, convective_block, direction,
                                 friedrichs_S0, jacobian_DQ, matrix_rows, source_Q)

from conftest import closures, fluid_states, unit_vectors, vec3


def objective_rate_symbol(xi, q, lam, nu):
    """Oracle: linearize the velocity-gradient terms of the objective heat-flux rate.

    Uses (grad v)_{ik} = d_k v_i and a plane wave v = a exp(i xi.x), so grad v -> i a xi^T.
    """
    a = sp.symbols("a1:4")
    G = sp.Matrix(3, 3, lambda i, k: a[i] * xi[k])
    qv = sp.Matrix(q)
    term = (-sp.Rational(1, 2) * (G - G.T) * qv + sp.Rational(lam) / 2 * (G + G.T) * qv
            + sp.Rational(nu) * G.trace() * qv)
    return np.array(term.jacobian(sp.Matrix(a)).tolist(), dtype=float)


@pytest.mark.parametrize("lam,nu", [(1, -1), (-1, 1), (0, 0), (2, 3), (-3, 1)])
def test_convective_block_matches_objective_rate(lam, nu):
    rng = np.random.default_rng(abs(lam * 10 + nu))
    xi = [sp.Rational(int(x), 7) for x in rng.integers(-9, 9, 3)]
    q = [sp.Rational(int(x), 5) for x in rng.integers(-9, 9, 3)]
    expected = objective_rate_symbol(xi, q, lam, nu)
    got = convective_block(np.array(xi, dtype=float), np.array(q, dtype=float), lam, nu)
    np.testing.assert_allclose(got, expected, atol=1e-15)


def test_one_minus_one_block_is_printed_matrix():
    xi, q = np.array([0.3, -1.2, 2.0]), np.array([1.5, 0.7, -0.4])
    (x1, x2, x3), (q1, q2, q3) = xi, q
    printed = np.array([
        [0, x1 * q2 - x2 * q1, x1 * q3 - x3 * q1],
        [x2 * q1 - x1 * q2, 0, x2 * q3 - x3 * q2],
        [x3 * q1 - x1 * q3, x3 * q2 - x2 * q3, 0],
    ])
    np.testing.assert_array_equal(convective_block(xi, q, 1, -1), printed)


@given(vec3, vec3)
def test_one_minus_one_block_antisymmetric(xi, q):
    B = convective_block(xi, q, 1.0, -1.0)
    np.testing.assert_allclose(B, -B.T, atol=1e-14)


def test_A0_at_rest(gas, rest):
    A = assemble_A(np.array([1.0, 0, 0]), rest.embed(), gas).matrix
    expected = np.zeros((8, 8))
    for (i, j), val in {(1, 2): 1, (2, 1): 1, (2, 5): 1, (5, 2): 2 / 3, (5, 6): 2 / 3, (6, 5): 1}.items():
        expected[i - 1, j - 1] = val
    np.testing.assert_allclose(A, expected, atol=1e-15)


@given(fluid_states(), unit_vectors(), closures())
def test_symbol_decomposition(U, xi, closure):
    A = assemble_A(xi, U, closure).matrix
    A0 = assemble_A0(xi, U, closure).matrix
    np.testing.assert_allclose(A, A0 + assemble_N(xi, U).matrix, atol=1e-13)
    np.testing.assert_allclose(A0, assemble_A0(xi, FluidState(U.rho, U.v, U.theta), closure).matrix)
    np.testing.assert_allclose(assemble_A(2.5 * xi, U, closure).matrix, 2.5 * A, atol=1e-12)
    np.testing.assert_array_equal(A, assemble_symbol(xi, U, closure, 1, -1).matrix)


@given(fluid_states(), unit_vectors(), closures())
def test_S0_symmetrizes_A0(U, xi, closure):
    S = friedrichs_S0(U, closure).matrix
    A0 = assemble_A0(xi, U, closure).matrix
    SA = S @ A0
    np.testing.assert_allclose(SA, SA.T, atol=1e-12)
    assert np.all(np.diag(S) > 0)


def test_S0_entries(gas, ref):
    np.testing.assert_allclose(np.diag(friedrichs_S0(ref, gas).matrix), [1, 1, 1, 1, 1.5, 1, 1, 1])


def test_source_and_jacobian(ref):
    np.testing.assert_array_equal(source_Q(ref, 2.0), [0, 0, 0, 0, 0, 0.5, 0.5, 0.5])
    np.testing.assert_array_equal(jacobian_DQ(1.0).matrix, np.diag([0, 0, 0, 0, 0, 1, 1, 1]))
    np.testing.assert_allclose(jacobian_DQ(0.5).matrix @ ref.as_vector(), source_Q(ref, 0.5))


def test_state_roundtrip_and_validation(ref):
    np.testing.assert_array_equal(FluidState.from_vector(ref.as_vector()).as_vector(), ref.as_vector())
    with pytest.raises(DomainError):
        FluidState(-1.0, [0, 0, 0], 1.0)
    with pytest.raises(DomainError):
        EquilibriumState(1.0, [0, 0, 0], 0.0)
    assert np.all(EquilibriumState(1, [1, 2, 3], 2).embed().q == 0)


def test_direction_validation():
    with pytest.raises(DomainError):
        direction([0, 0, 0])
    with pytest.raises(DomainError):
        direction([np.inf, 0, 0])
    np.testing.assert_allclose(direction([3, 4, 0], unit=True), [0.6, 0.8, 0])


def test_symbol_wrapper(gas, ref):
    s = assemble_A([1, 0, 0], ref, gas)
    assert isinstance(s, Symbol8) and s.kind == "A" and s.shape == (8, 8)
    assert np.asarray(s).shape == (8, 8)
    assert assemble_symbol([1, 0, 0], ref, gas, -1, 1).kind == "A[-1,1]"
    rows = matrix_rows(np.array([[1 + 2j]]))
    assert rows == [[[1.0, 2.0]]]
