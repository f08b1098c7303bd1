import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from cattaneo_hyp.symbol import EquilibriumState, FluidState
from cattaneo_hyp.thermo import ideal_gas, power_law

settings.register_profile(
    "repo", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def gas():
    return ideal_gas()


@pytest.fixture
def ref():
    return FluidState(1.0, [0.0, 0.0, 0.0], 1.0, [1.0, 1.0, 1.0])


@pytest.fixture
def rest():
    return EquilibriumState(1.0, [0.0, 0.0, 0.0], 1.0)


# strategies

finite = dict(allow_nan=False, allow_infinity=False)
positive = st.floats(0.5, 2.0, **finite)
component = st.floats(-2.0, 2.0, **finite)
vec3 = st.tuples(component, component, component).map(np.array)
nonzero_component = st.one_of(st.floats(-2.0, -0.1, **finite), st.floats(0.1, 2.0, **finite))


@st.composite
def unit_vectors(draw):
    v = draw(st.tuples(component, component, component).filter(lambda t: np.linalg.norm(t) > 0.1))
    v = np.array(v)
    return v / np.linalg.norm(v)


@st.composite
def fluid_states(draw, q_nonzero=False):
    q = st.tuples(*(nonzero_component,) * 3).map(np.array) if q_nonzero else vec3
    return FluidState(draw(positive), draw(vec3), draw(positive), draw(q))


@st.composite
def closures(draw):
    if draw(st.booleans()):
        return ideal_gas(R=draw(st.floats(0.5, 2.0)), cv=draw(st.floats(0.5, 3.0)),
                         kappa=draw(st.floats(0.1, 5.0)), tau=draw(st.floats(0.1, 5.0)))
    return power_law(a=draw(st.floats(0.0, 1.0)), kappa0=draw(st.floats(0.1, 5.0)),
                     exponent=draw(st.floats(-1.0, 1.0)), tau=draw(st.floats(0.1, 5.0)))
