import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cattaneo_hyp.errors import AssumptionViolation, DomainError
from cattaneo_hyp.thermo import (CLOSURES, StateBox, ThermoClosure, box_bounds, check_derivatives,
                                 eval_closure, get_closure, ideal_gas, power_law, register_closure)

from conftest import closures


def test_ideal_gas_values(gas):
    c = eval_closure(gas, 2.0, 3.0)
    assert (float(c.p), float(c.p_rho), float(c.p_theta)) == (6.0, 3.0, 2.0)
    assert float(c.e) == 4.5 and float(c.e_theta) == 1.5 and float(c.kappa) == 1.0


def test_broadcasting(gas):
    rho = np.linspace(0.5, 2, 7)
    c = eval_closure(gas, rho[:, None], np.array([1.0, 2.0]))
    assert c.p.shape == (7, 2) and c.kappa.shape == (7, 2)
    np.testing.assert_allclose(c.p, rho[:, None] * np.array([1.0, 2.0]))


@pytest.mark.parametrize("rho,theta", [(0.0, 1.0), (1.0, -1.0), (np.nan, 1.0)])
def test_outside_domain(gas, rho, theta):
    with pytest.raises(DomainError):
        eval_closure(gas, rho, theta)


def test_nonpositive_tau():
    with pytest.raises(AssumptionViolation):
        ideal_gas(tau=0.0)


def test_positivity_violation():
    bad = ThermoClosure("bad", p=lambda r, t: r * t, p_rho=lambda r, t: t, p_theta=lambda r, t: -r,
                        e=lambda r, t: t, e_theta=lambda r, t: 1.0 + 0 * r, kappa=lambda r, t: 1.0 + 0 * r)
    with pytest.raises(AssumptionViolation, match="p_theta"):
        eval_closure(bad, 1.0, 1.0)


def test_inconsistent_derivative_detected():
    bad = ThermoClosure("bad", p=lambda r, t: r * t, p_rho=lambda r, t: 2 * t, p_theta=lambda r, t: r,
                        e=lambda r, t: t, e_theta=lambda r, t: 1.0 + 0 * r, kappa=lambda r, t: 1.0 + 0 * r)
    with pytest.raises(AssumptionViolation, match="p_rho"):
        check_derivatives(bad, [(1.0, 1.0)])


@given(closures(), st.floats(0.5, 2.0), st.floats(0.5, 2.0))
def test_supplied_derivatives_match_differences(closure, rho, theta):
    assert check_derivatives(closure, [(rho, theta)]) < 1e-6


def test_box_bounds_ideal_gas(gas):
    box = box_bounds(gas, (0.5, 2.0), (0.5, 2.0))
    assert (box.M1, box.M2) == (0.5, 2.0)
    point = box_bounds(gas, (1.0, 1.0), (1.0, 1.0))
    assert (point.M1, point.M2) == (1.0, 1.5)


def test_state_box_validation():
    with pytest.raises(DomainError):
        StateBox(2.0, 1.0, 1.0, 1.0, 1.0, 1.0)
    with pytest.raises(AssumptionViolation):
        StateBox(1.0, 1.0, 1.0, 1.0, 2.0, 1.0)


def test_registry():
    assert get_closure("ideal-gas", tau=2.0).tau == 2.0
    assert get_closure("power-law").name == "power-law"
    with pytest.raises(KeyError):
        get_closure("van-der-waals")
    register_closure("stiff", lambda **kw: power_law(a=5.0, **kw))
    try:
        assert float(eval_closure(get_closure("stiff"), 1.0, 1.0).p_rho) == 11.0
    finally:
        CLOSURES.pop("stiff")
