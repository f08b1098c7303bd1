"""Pseudospectral evolution of the linearized system on a periodic box.

Conventions (used everywhere in this module):
    V_hat = fftn(V) / N^3,   V = ifftn(V_hat) * N^3,
so that V(x) = sum_k V_hat(k) exp(i xi_k . x) and
    integral |V|^2 dx = L1 L2 L3 * sum_k |V_hat(k)|^2.
Fields are arrays of shape (N, N, N, 8) in FFT (not shifted) order.
"""
from __future__ import annotations

import csv
import struct
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import expm

from .coupling import LinearizedSystem, WitnessBranch, witness_branch
from .errors import ConvergenceError, DomainError
from .symbol import FLUX, EquilibriumState, friedrichs_S0
from .thermo import ThermoClosure

AXES = (0, 1, 2)
FIELD_MAGIC = b"CHWAVE01"
FIELD_ORDER = b"x1,x2,x3,comp C "  # 16 bytes: C-order, last axis = component


@dataclass(frozen=True)
class SpectralGrid:
    N: int = 32
    L: Tuple[float, float, float] = (2 * np.pi, 2 * np.pi, 2 * np.pi)

    def __post_init__(self):
        N = int(self.N)
        if N < 2 or N & (N - 1):
            raise DomainError(f"N must be a power of two >= 2, got {self.N}")
        L = tuple(float(x) for x in np.broadcast_to(np.asarray(self.L, dtype=float), (3,)))
        if min(L) <= 0:
            raise DomainError(f"box lengths must be positive, got {L}")
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "L", L)

    @property
    def volume(self) -> float:
        return float(np.prod(self.L))

    @property
    def shape(self) -> Tuple[int, int, int]:
        return (self.N,) * 3

    def wavenumbers(self) -> np.ndarray:
        """Integer lattice k, shape (N, N, N, 3), entries in [-N/2, N/2)."""
        k = np.fft.fftfreq(self.N, 1.0 / self.N)
        return np.stack(np.meshgrid(k, k, k, indexing="ij"), axis=-1)

    def frequencies(self) -> np.ndarray:
        return self.wavenumbers() * (2 * np.pi / np.asarray(self.L))

    def nyquist_mask(self) -> np.ndarray:
        return np.any(self.wavenumbers() == -self.N // 2, axis=-1)

    def mirror_index(self, idx: np.ndarray) -> np.ndarray:
        """Index of -k for integer index triples idx (..., 3)."""
        return (-np.asarray(idx)) % self.N

    def points(self) -> np.ndarray:
        axes = [np.arange(self.N) * (Lj / self.N) for Lj in self.L]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)


@dataclass
class WaveField:
    """A real 8-component field stored by its Fourier coefficients."""

    grid: SpectralGrid
    spectral: np.ndarray

    def __post_init__(self):
        self.spectral = np.asarray(self.spectral, dtype=complex)
        if self.spectral.shape != self.grid.shape + (8,):
            raise DomainError(f"spectral array has shape {self.spectral.shape}")

    @classmethod
    def zeros(cls, grid: SpectralGrid) -> "WaveField":
        return cls(grid, np.zeros(grid.shape + (8,), dtype=complex))

    @classmethod
    def from_physical(cls, grid: SpectralGrid, values) -> "WaveField":
        values = np.asarray(values, dtype=float)
        return cls(grid, np.fft.fftn(values, axes=AXES) / grid.N**3)

    def physical_complex(self) -> np.ndarray:
        return np.fft.ifftn(self.spectral, axes=AXES) * self.grid.N**3

    def imag_defect(self) -> float:
        """max |Im V| / max(1, max |V|) of the physical field."""
        V = self.physical_complex()
        return float(np.max(np.abs(V.imag), initial=0.0) / max(1.0, np.max(np.abs(V), initial=0.0)))

    def physical(self, tol: float = 1e-12) -> np.ndarray:
        V = self.physical_complex()
        scale = max(1.0, float(np.max(np.abs(V), initial=0.0)))
        if np.max(np.abs(V.imag), initial=0.0) > tol * scale:
            raise ConvergenceError("field lost conjugate symmetry (physical values not real)")
        return V.real

    def conjugate_defect(self) -> float:
        """max |V_hat(-k) - conj V_hat(k)|."""
        mirrored = np.roll(np.flip(self.spectral, axis=AXES), 1, axis=AXES)
        return float(np.max(np.abs(mirrored - self.spectral.conj()), initial=0.0))

    def support(self) -> np.ndarray:
        return np.any(self.spectral != 0, axis=-1)


@dataclass(frozen=True)
class BumpSpec:
    center: np.ndarray
    r_B: float
    r_Omega: float
    probe: Optional[np.ndarray] = None

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float).reshape(3)
        object.__setattr__(self, "center", c)
        if self.probe is not None:
            object.__setattr__(self, "probe", np.asarray(self.probe, dtype=float).reshape(3))
        if not 0 < self.r_B < self.r_Omega:
            raise DomainError(f"need 0 < r_B < r_Omega, got {self.r_B}, {self.r_Omega}")
        if np.linalg.norm(c) <= self.r_Omega:
            raise DomainError("bump support must not contain xi = 0")


def _g(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    pos = s > 0
    out[pos] = np.exp(-1.0 / s[pos])
    return out


def smooth_step(t):
    """C-infinity step: 1 for t <= 0, 0 for t >= 1, strictly decreasing between."""
    t = np.asarray(t, dtype=float)
    a, b = _g(1.0 - t), _g(t)
    return a / (a + b)


def bump(spec: BumpSpec, xi):
    """Cutoff phi: 1 on the ball of radius r_B about the center, 0 outside radius r_Omega."""
    xi = np.asarray(xi, dtype=float)
    r = np.linalg.norm(xi - spec.center, axis=-1)
    val = smooth_step((r - spec.r_B) / (spec.r_Omega - spec.r_B))
    return float(val) if np.ndim(val) == 0 else val


def persistent_initial_data(grid: SpectralGrid, spec: BumpSpec,
                            V_e: EquilibriumState) -> WaveField:
    """V_hat_0(xi) = phi(xi) Z(xi) on the bump, mirrored conjugately onto -bump."""
    k_center = spec.center * np.asarray(grid.L) / (2 * np.pi)
    if np.max(np.abs(k_center - np.round(k_center))) > 1e-9:
        raise DomainError(f"bump center {spec.center} is not a lattice frequency")
    branch: WitnessBranch = witness_branch(spec.center, spec.probe, V_e.v)
    xi = grid.frequencies()
    reach = np.abs(k_center) + spec.r_Omega * np.asarray(grid.L) / (2 * np.pi)
    if np.any(reach >= grid.N // 2):
        raise DomainError("bump support reaches the Nyquist planes; enlarge N or shrink r_Omega")
    inside = np.linalg.norm(xi - spec.center, axis=-1) < spec.r_Omega
    idx = np.argwhere(inside)
    out = np.zeros(grid.shape + (8,), dtype=complex)
    for i, j, k in idx:
        x = xi[i, j, k]
        out[i, j, k] = bump(spec, x) * branch.Z(x)
    mirror = grid.mirror_index(idx)
    out[mirror[:, 0], mirror[:, 1], mirror[:, 2]] = out[idx[:, 0], idx[:, 1], idx[:, 2]].conj()
    return WaveField(grid, out)


def propagators(sys: LinearizedSystem, xis: np.ndarray, t: float) -> np.ndarray:
    """exp(-t (i A(xi) + B)) for a stack of frequencies, shape (G, 8, 8)."""
    G = -t * (1j * sys.symbols(xis) + sys.B)
    P = expm(G) if len(G) else np.zeros_like(G)
    bad = ~np.all(np.isfinite(P), axis=(1, 2))
    if np.any(bad):
        raise ConvergenceError(f"matrix exponential failed at xi={xis[np.argmax(bad)]}")
    return P


def evolve(wave: WaveField, sys: LinearizedSystem, t: float) -> WaveField:
    """Exact per-mode solution of W_hat' = -(i A(xi) + B) W_hat; zero modes stay zero."""
    if sys.n != 8 or sys.dim != 3:
        raise DomainError("evolve needs the 3D (8x8) linearized system")
    if t == 0:
        return WaveField(wave.grid, wave.spectral.copy())
    mask = wave.support()
    xis = wave.grid.frequencies()[mask]
    P = propagators(sys, xis, float(t))
    out = np.zeros_like(wave.spectral)
    out[mask] = np.einsum("gab,gb->ga", P, wave.spectral[mask])
    return WaveField(wave.grid, out)


def translation_reference(initial: WaveField, v_e, t: float) -> WaveField:
    """Phase shift exp(-i t xi.v_e) per mode, i.e. the field x -> W_0(x - v_e t)."""
    v_e = np.asarray(v_e, dtype=float).reshape(3)
    phase = np.exp(-1j * t * (initial.grid.frequencies() @ v_e))
    return WaveField(initial.grid, initial.spectral * phase[..., None])


def l2_norm(wave: WaveField) -> float:
    return float(np.sqrt(wave.grid.volume * np.sum(np.abs(wave.spectral) ** 2)))


def s0_energy(wave: WaveField, V_e: EquilibriumState, closure: ThermoClosure) -> float:
    """L1 L2 L3 * sum_k <S_0(V_e) W_hat, W_hat>, with S_0 the diagonal symmetrizer."""
    d = np.diag(friedrichs_S0(V_e.embed(), closure).matrix)
    return float(wave.grid.volume * np.sum(d * np.abs(wave.spectral) ** 2))


def energy_constants(V_e: EquilibriumState, closure: ThermoClosure) -> Tuple[float, float]:
    """(L0, L1) with L0 |Z|^2 <= <S_0 Z, Z> <= L1 |Z|^2."""
    d = np.diag(friedrichs_S0(V_e.embed(), closure).matrix)
    return float(d.min()), float(d.max())


def q_max(wave: WaveField) -> float:
    return float(np.max(np.abs(wave.spectral[..., FLUX]), initial=0.0))


def random_field(grid: SpectralGrid, rng: np.random.Generator, kmax: int = 2) -> WaveField:
    """Real random data on low modes |k_j| <= kmax, all eight components excited."""
    k = grid.wavenumbers()
    mask = np.all(np.abs(k) <= kmax, axis=-1)
    V = np.zeros(grid.shape + (8,), dtype=complex)
    V[mask] = rng.normal(size=(mask.sum(), 8)) + 1j * rng.normal(size=(mask.sum(), 8))
    spec = WaveField(grid, V)
    # enforce conjugate symmetry by averaging with the mirror image
    mirrored = np.roll(np.flip(V, axis=AXES), 1, axis=AXES).conj()
    spec.spectral = 0.5 * (V + mirrored)
    return spec


@dataclass(frozen=True)
class WaveExperiment:
    N: int = 32
    L: float = 2 * np.pi
    center: Tuple[float, float, float] = (3.0, 0.0, 0.0)
    r_B: float = 1.2
    r_Omega: float = 2.4
    probe: Tuple[float, float, float] = (0.0, 0.0, 1.0)
    rho: float = 1.0
    v: Tuple[float, float, float] = (1.0, 0.0, 0.0)
    theta: float = 1.0
    t_end: float = 10.0
    checkpoints: int = 101

    def grid(self) -> SpectralGrid:
        return SpectralGrid(self.N, (self.L,) * 3)

    def bump_spec(self) -> BumpSpec:
        return BumpSpec(np.array(self.center), self.r_B, self.r_Omega, np.array(self.probe))

    def equilibrium(self) -> EquilibriumState:
        return EquilibriumState(self.rho, self.v, self.theta)

    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_end, self.checkpoints)


@dataclass
class WaveRun:
    times: np.ndarray
    l2: np.ndarray
    energy: np.ndarray
    qmax: np.ndarray
    translation_error: np.ndarray
    imag_defect: np.ndarray
    initial: WaveField
    final: WaveField
    populated_modes: int

    @property
    def l2_relative_deviation(self) -> float:
        return float(np.max(np.abs(self.l2 - self.l2[0])) / self.l2[0])


def run_wave_experiment(exp: WaveExperiment, sys: LinearizedSystem,
                        closure: ThermoClosure) -> WaveRun:
    grid = exp.grid()
    V_e = exp.equilibrium()
    W0 = persistent_initial_data(grid, exp.bump_spec(), V_e)
    times = exp.times()
    l2, en, qm, terr, imd = (np.zeros(len(times)) for _ in range(5))
    W = W0
    for n, t in enumerate(times):
        W = evolve(W0, sys, t)
        ref = translation_reference(W0, V_e.v, t)
        l2[n] = l2_norm(W)
        en[n] = s0_energy(W, V_e, closure)
        qm[n] = q_max(W)
        terr[n] = float(np.max(np.abs(W.physical_complex() - ref.physical_complex())))
        imd[n] = W.imag_defect()
    return WaveRun(times, l2, en, qm, terr, imd, W0, W, int(W0.support().sum()))


def write_norms_csv(run: WaveRun, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "l2_norm", "s0_energy", "q_max", "translation_error"])
        for row in zip(run.times, run.l2, run.energy, run.qmax, run.translation_error):
            w.writerow([repr(float(x)) for x in row])


def write_field(wave: WaveField, path) -> None:
    """Raw physical field: magic, four int64 dims, 16-byte ordering tag, float64 data (LE)."""
    V = np.ascontiguousarray(wave.physical(), dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(FIELD_MAGIC)
        fh.write(struct.pack("<4q", *V.shape))
        fh.write(FIELD_ORDER)
        fh.write(V.tobytes())


def read_field(path) -> np.ndarray:
    with open(path, "rb") as fh:
        if fh.read(8) != FIELD_MAGIC:
            raise DomainError(f"{path} is not a field dump")
        dims = struct.unpack("<4q", fh.read(32))
        fh.read(16)
        data = np.frombuffer(fh.read(), dtype="<f8")
    return data.reshape(dims)
