import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cattaneo_hyp.coupling import linearize
from cattaneo_hyp.errors import DegenerateDirection, DomainError
from cattaneo_hyp.symbol import EquilibriumState
from cattaneo_hyp.thermo import ideal_gas
from cattaneo_hyp.waves import (BumpSpec, SpectralGrid, WaveField, bump, energy_constants, evolve, l2_norm,
                                persistent_initial_data, q_max, random_field, read_field, s0_energy,
                                smooth_step, translation_reference, write_field)

GAS = ideal_gas()
MOVING = EquilibriumState(1.0, [1.0, 0.0, 0.0], 1.0)
SPEC = BumpSpec(np.array([3.0, 0, 0]), 1.2, 2.4, np.array([0, 0, 1.0]))


@pytest.fixture(scope="module")
def grid16():
    return SpectralGrid(16)


@pytest.fixture(scope="module")
def persistent(grid16):
    return persistent_initial_data(grid16, SPEC, MOVING)


def test_grid_validation():
    with pytest.raises(DomainError):
        SpectralGrid(12)
    with pytest.raises(DomainError):
        SpectralGrid(8, (1.0, -1.0, 1.0))
    g = SpectralGrid(8, 4 * np.pi)
    assert g.L == (4 * np.pi,) * 3 and g.volume == pytest.approx(64 * np.pi**3)
    k = g.wavenumbers()
    assert k.min() == -4 and k.max() == 3
    np.testing.assert_allclose(g.frequencies(), 0.5 * k)
    assert g.nyquist_mask().sum() == 8**3 - 7**3


def test_roundtrip():
    g = SpectralGrid(8)
    V = np.random.default_rng(0).normal(size=g.shape + (8,))
    W = WaveField.from_physical(g, V)
    assert np.max(np.abs(W.physical() - V)) <= 1e-12 * np.max(np.abs(V))
    assert W.conjugate_defect() <= 1e-15


def test_bump_values():
    assert bump(SPEC, SPEC.center) == 1.0
    assert bump(SPEC, SPEC.center + [2.4, 0, 0]) == 0.0
    mid = bump(SPEC, SPEC.center + [1.8, 0, 0])
    assert 0 < mid < 1 and mid == pytest.approx(0.5)
    r = np.linspace(0, 3, 301)
    vals = bump(SPEC, SPEC.center + r[:, None] * np.array([0, 0.6, 0.8]))
    assert np.all(np.diff(vals) <= 0) and np.all(np.diff(vals[(r > 1.3) & (r < 2.3)]) < 0)


def test_smooth_step_flat_at_ends():
    # all one-sided difference quotients vanish at the junctions
    for h in (1e-2, 1e-3):
        assert abs(smooth_step(h) - 1) / h < 1e-20 and smooth_step(1 - h) / h < 1e-20


def test_bump_spec_validation():
    with pytest.raises(DomainError):
        BumpSpec(np.array([3.0, 0, 0]), 2.0, 1.0)
    with pytest.raises(DomainError):
        BumpSpec(np.array([1.0, 0, 0]), 0.5, 1.5)


def test_persistent_data_structure(persistent):
    S = persistent.spectral
    assert np.all(S[..., 5:] == 0)
    assert persistent.conjugate_defect() == 0
    assert persistent.imag_defect() <= 1e-13
    assert persistent.support().sum() > 2


def test_single_mode(grid16):
    spec = BumpSpec(np.array([3.0, 0, 0]), 0.2, 0.4, np.array([0, 0, 1.0]))
    W = persistent_initial_data(grid16, spec, MOVING)
    assert W.support().sum() == 2
    x = grid16.points()
    V = W.physical()
    # phi = 1 and Z = (0, -e2, 0, 0, 0) / 3 at xi = 3 e1, mirrored conjugately
    expected = -2 / 3 * np.cos(3 * x[..., 0])
    np.testing.assert_allclose(V[..., 2], expected, atol=1e-13)
    assert l2_norm(W) ** 2 == pytest.approx(grid16.volume * 2 / 9, rel=1e-14)
    assert np.sum(V**2) * grid16.volume / grid16.N**3 == pytest.approx(l2_norm(W) ** 2, rel=1e-12)


def test_parseval(persistent, grid16):
    V = persistent.physical()
    quad = np.sum(V**2) * grid16.volume / grid16.N**3
    assert abs(quad - l2_norm(persistent) ** 2) <= 1e-12 * quad


def test_off_lattice_and_nyquist(grid16):
    with pytest.raises(DomainError):
        persistent_initial_data(grid16, BumpSpec(np.array([3.5, 0, 0]), 1.0, 2.0), MOVING)
    with pytest.raises(DomainError):
        persistent_initial_data(grid16, BumpSpec(np.array([6.0, 0, 0]), 1.0, 2.5), MOVING)


def test_evolve_identity_and_static_mode():
    g = SpectralGrid(4)
    sys = linearize(EquilibriumState(1, [0, 0, 0], 1), GAS)
    W = WaveField.zeros(g)
    W.spectral[1, 0, 0, 2] = 1.0
    W.spectral[-1, 0, 0, 2] = 1.0
    np.testing.assert_array_equal(evolve(W, sys, 0.0).spectral, W.spectral)
    for t in (0.5, 3.0, 10.0):
        np.testing.assert_allclose(evolve(W, sys, t).spectral, W.spectral, atol=1e-15)


def test_zero_mode_relaxes():
    g = SpectralGrid(4)
    sys = linearize(MOVING, GAS)
    W = WaveField.zeros(g)
    W.spectral[0, 0, 0, 5] = 1.0
    out = evolve(W, sys, 1.0)
    assert abs(out.spectral[0, 0, 0, 5] - np.exp(-1)) <= 1e-15
    assert abs(out.spectral[0, 0, 0, 5] - 0.367879) < 1e-6


def test_zero_field():
    W = WaveField.zeros(SpectralGrid(4))
    assert l2_norm(W) == 0 and s0_energy(W, MOVING, GAS) == 0 and q_max(W) == 0


def test_persistence(persistent):
    sys = linearize(MOVING, GAS)
    n0 = l2_norm(persistent)
    for t in np.linspace(0, 10, 11):
        W = evolve(persistent, sys, t)
        assert abs(l2_norm(W) - n0) <= 1e-10 * n0
        assert q_max(W) <= 1e-12
        assert np.array_equal(W.support(), persistent.support())
        ref = translation_reference(persistent, MOVING.v, t)
        assert np.max(np.abs(W.physical() - ref.physical())) <= 1e-10


def test_translation_is_shift(persistent, grid16):
    # a shift by a whole lattice period is the identity; v = 0 is the identity for all t
    np.testing.assert_array_equal(translation_reference(persistent, [0, 0, 0], 3.3).spectral,
                                  persistent.spectral)
    shifted = translation_reference(persistent, [1, 0, 0], 2 * np.pi)
    np.testing.assert_allclose(shifted.physical(), persistent.physical(), atol=1e-12)


def test_translation_fails_for_dissipative_data(grid16):
    sys = linearize(MOVING, GAS)
    W0 = random_field(grid16, np.random.default_rng(1), kmax=1)
    W = evolve(W0, sys, 0.7)
    ref = translation_reference(W0, MOVING.v, 0.7)
    assert np.max(np.abs(W.physical() - ref.physical())) > 1e-3


@given(st.integers(0, 2**32 - 1))
def test_energy_monotone_and_real(seed):
    g = SpectralGrid(4)
    sys = linearize(MOVING, GAS)
    W0 = random_field(g, np.random.default_rng(seed), kmax=1)
    L0, L1 = energy_constants(MOVING, GAS)
    E = []
    for t in np.linspace(0, 2, 9):
        W = evolve(W0, sys, t)
        E.append(s0_energy(W, MOVING, GAS))
        n2 = l2_norm(W) ** 2
        assert L0 * n2 <= E[-1] * (1 + 1e-14) and E[-1] <= L1 * n2 * (1 + 1e-14)
        assert W.imag_defect() <= 1e-12
    assert np.all(np.diff(E) <= 1e-12 * E[0])
    assert s0_energy(evolve(W0, sys, 1e-3), MOVING, GAS) < E[0]


def test_field_dump(persistent, tmp_path):
    write_field(persistent, tmp_path / "f.bin")
    raw = (tmp_path / "f.bin").read_bytes()
    assert raw[:8] == b"CHWAVE01" and len(raw) == 8 + 32 + 16 + 16**3 * 8 * 8
    np.testing.assert_array_equal(read_field(tmp_path / "f.bin"), persistent.physical())
