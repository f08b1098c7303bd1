"""Linearization at constant equilibria, genuine coupling and dissipativity.

At an equilibrium V_e (q = 0) the linearized system reads
    W_t + sum_j A_j W_{x_j} + B W = 0,   A_j = A(e_j; V_e),  B = DQ(V_e),
and a Fourier mode evolves by exp(-t (i A(xi) + B)).
"""
from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import DegenerateDirection, DomainError
from .spectral import eigenbasis
from .symbol import VEL, EquilibriumState, FluidState, assemble_A, direction, jacobian_DQ
from .thermo import ThermoClosure

COUPLING_TOL = 1e-10
STRICT_THRESHOLD = 1e-10
REDUCED_1D = [0, 1, 4, 5]  # (rho, v1, theta, q1)


def is_equilibrium(U: FluidState, tol: float = 1e-12) -> bool:
    return bool(np.linalg.norm(U.q) <= tol)


def _as_equilibrium(V_e) -> EquilibriumState:
    if isinstance(V_e, EquilibriumState):
        return V_e
    if isinstance(V_e, FluidState):
        if not is_equilibrium(V_e, 0.0):
            raise DomainError(f"state with q={V_e.q} is not an equilibrium")
        return EquilibriumState(V_e.rho, V_e.v, V_e.theta)
    raise TypeError(f"expected an equilibrium state, got {type(V_e).__name__}")


@dataclass(frozen=True)
class LinearizedSystem:
    """Coefficient matrices A_j and relaxation matrix B of the linearized system."""

    A: Tuple[np.ndarray, ...]
    B: np.ndarray
    equilibrium: EquilibriumState
    tau: float
    reduced: bool = False

    @property
    def n(self) -> int:
        return self.B.shape[0]

    @property
    def dim(self) -> int:
        return len(self.A)

    def frequency(self, xi) -> np.ndarray:
        xi = np.atleast_1d(np.asarray(xi, dtype=float)).reshape(-1)
        if xi.size != self.dim:
            raise DomainError(f"expected a {self.dim}-component frequency, got {xi.size}")
        return xi

    def symbol(self, xi) -> np.ndarray:
        xi = self.frequency(xi)
        return np.einsum("j,jab->ab", xi, np.asarray(self.A))

    def symbols(self, xis) -> np.ndarray:
        """A(xi) for a stack of frequencies, shape (G, n, n)."""
        xis = np.asarray(xis, dtype=float).reshape(-1, self.dim)
        return np.einsum("gj,jab->gab", xis, np.asarray(self.A))

    def generator(self, xi) -> np.ndarray:
        """-(i A(xi) + B), the right-hand side of the per-mode ODE."""
        return -(1j * self.symbol(xi) + self.B)

    def transport_speed(self, xi) -> float:
        xi = self.frequency(xi)
        v = self.equilibrium.v[: self.dim]
        return float(np.dot(xi, v))


def linearize(V_e, closure: ThermoClosure) -> LinearizedSystem:
    V_e = _as_equilibrium(V_e)
    U = V_e.embed()
    A = tuple(assemble_A(e, U, closure).matrix for e in np.eye(3))
    return LinearizedSystem(A, jacobian_DQ(closure.tau).matrix, V_e, closure.tau)


def reduce_1d(V_e, closure: ThermoClosure) -> LinearizedSystem:
    """Restriction to (rho, v1, theta, q1) with x1-dependence only."""
    V_e = _as_equilibrium(V_e)
    A1 = assemble_A(np.array([1.0, 0, 0]), V_e.embed(), closure).matrix
    A = A1[np.ix_(REDUCED_1D, REDUCED_1D)]
    B = np.diag([0.0, 0.0, 0.0, 1.0 / closure.tau])
    return LinearizedSystem((A,), B, V_e, closure.tau, reduced=True)


@dataclass(frozen=True)
class CouplingWitness:
    xi: np.ndarray
    Z: np.ndarray
    mu: float
    residual_B: float
    residual_eig: float

    def to_dict(self) -> dict:
        return {
            "xi": [float(x) for x in self.xi],
            "Z": [float(z) for z in self.Z],
            "mu": self.mu,
            "residual_DQ": self.residual_B,
            "residual_eigen": self.residual_eig,
        }


@dataclass(frozen=True)
class CouplingResult:
    verdict: str  # "violated" | "coupled"
    xi: np.ndarray
    min_sigma: float  # min over eigenspaces of sigma_min(B E)
    witness: Optional[CouplingWitness] = None


def _canonical_vector(K: np.ndarray) -> np.ndarray:
    """A deterministic real unit vector in span(K): the largest projection of a coordinate axis."""
    P = K @ K.conj().T
    norms = np.linalg.norm(P, axis=0)
    i = int(np.argmax(norms > norms.max() * (1 - 1e-9)))
    Z = np.real(P[:, i])
    return Z / np.linalg.norm(Z)


def genuinely_coupled(sys: LinearizedSystem, xi, tol: float = COUPLING_TOL) -> CouplingResult:
    """Look for an eigenvector of A(xi) in ker B.

    Each eigenspace E is tested through sigma_min(B E): it vanishes iff E meets ker B.
    """
    xi = sys.frequency(xi)
    if not np.linalg.norm(xi) > 0:
        raise DomainError("xi must be nonzero")
    A = sys.symbol(xi)
    basis = eigenbasis(A)
    scale = max(1.0, float(np.max(np.abs(sys.B))))
    best, best_K, best_mu = np.inf, None, None
    for mu, cols in basis.blocks():
        E = basis.vectors[:, cols]
        _, s, vt = np.linalg.svd(sys.B @ E)
        s = np.concatenate([s, np.zeros(E.shape[1] - s.size)])
        smin = float(s[-1]) / scale
        if smin < best:
            best = smin
            kernel = s <= tol * scale
            best_K = E @ vt[kernel].conj().T if np.any(kernel) else None
            best_mu = mu
    if best_K is None:
        return CouplingResult("coupled", xi, best)
    Z = _canonical_vector(np.linalg.qr(best_K)[0])
    mu = float(Z @ A @ Z)
    wit = CouplingWitness(xi, Z, mu, float(np.linalg.norm(sys.B @ Z)),
                          float(np.linalg.norm(A @ Z - mu * Z)))
    return CouplingResult("violated", xi, best, wit)


def _probe_for(xi_bar: np.ndarray) -> np.ndarray:
    axis = np.eye(3)[int(np.argmin(np.abs(xi_bar)))]
    z = np.cross(xi_bar, axis)
    return z / np.linalg.norm(z)


@dataclass(frozen=True)
class WitnessBranch:
    """Smooth eigenvector field Z(xi) = (0, h(xi), 0, 0, 0) in ker B near xi_bar.

    h(xi) = (xi x z') / (|xi_bar| |xi x z'|) solves xi.h = 0, z'.h = 0, |h| = 1/|xi_bar|.
    """

    xi_bar: np.ndarray
    probe: np.ndarray
    v_e: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def h(self, xi) -> np.ndarray:
        c = np.cross(np.asarray(xi, dtype=float), self.probe)
        nc = np.linalg.norm(c)
        if nc < 1e-12:
            raise DegenerateDirection(f"xi={xi} is parallel to the probe {self.probe}")
        return c / (np.linalg.norm(self.xi_bar) * nc)

    def Z(self, xi) -> np.ndarray:
        out = np.zeros(8)
        out[VEL] = self.h(xi)
        return out

    def mu(self, xi) -> float:
        return float(np.dot(xi, self.v_e))

    def F(self, xi) -> np.ndarray:
        """Residuals of the defining system (xi.h, z'.h, |h|^2 - |xi_bar|^-2)."""
        h = self.h(xi)
        return np.array([np.dot(xi, h), np.dot(self.probe, h),
                         np.dot(h, h) - 1.0 / np.dot(self.xi_bar, self.xi_bar)])

    def __call__(self, xi) -> Tuple[np.ndarray, float]:
        return self.Z(xi), self.mu(xi)


def witness_branch(xi_bar, probe=None, v_e=None) -> WitnessBranch:
    xi_bar = direction(xi_bar)
    if probe is None:
        probe = _probe_for(xi_bar)
    probe = np.asarray(probe, dtype=float).reshape(3)
    if not np.linalg.norm(probe) > 0:
        raise DomainError("probe z' must be nonzero")
    if abs(np.dot(probe, xi_bar)) > 1e-12 * np.linalg.norm(probe) * np.linalg.norm(xi_bar):
        raise DomainError(f"probe {probe} is not orthogonal to xi_bar {xi_bar}")
    v = np.zeros(3) if v_e is None else np.asarray(v_e, dtype=float).reshape(3)
    return WitnessBranch(xi_bar, probe, v)


def icosphere(subdivisions: int = 2) -> np.ndarray:
    """Vertices of a subdivided icosahedron on S^2 (10*4^k + 2 points)."""
    t = (1 + np.sqrt(5)) / 2
    verts = [(-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0), (0, -1, t), (0, 1, t),
             (0, -1, -t), (0, 1, -t), (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1)]
    verts = [np.array(v, dtype=float) / np.linalg.norm(v) for v in verts]
    faces = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11), (1, 5, 9), (5, 11, 4),
             (11, 10, 2), (10, 7, 6), (7, 1, 8), (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8),
             (3, 8, 9), (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    for _ in range(subdivisions):
        cache = {}

        def mid(a, b):
            key = (min(a, b), max(a, b))
            if key not in cache:
                m = verts[a] + verts[b]
                verts.append(m / np.linalg.norm(m))
                cache[key] = len(verts) - 1
            return cache[key]

        new = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new
    return np.array(verts)


def default_grid(sys: LinearizedSystem) -> np.ndarray:
    if sys.dim == 1:
        return np.logspace(-1, 1, 64).reshape(-1, 1)
    dirs = icosphere(2)
    radii = np.logspace(-2, 2, 16)
    return (radii[:, None, None] * dirs[None]).reshape(-1, 3)


@dataclass
class DissipativitySweep:
    xis: np.ndarray
    eigenvalues: np.ndarray  # (G, n) eigenvalues of -(iA(xi) + B)
    max_real: float
    argmax_xi: np.ndarray
    threshold: float = STRICT_THRESHOLD

    @property
    def per_point_max(self) -> np.ndarray:
        return self.eigenvalues.real.max(axis=1)

    @property
    def strictly_dissipative(self) -> bool:
        return bool(np.all(self.per_point_max < -self.threshold))

    def to_dict(self) -> dict:
        return {
            "grid_points": int(len(self.xis)),
            "max_real_part": self.max_real,
            "argmax_xi": [float(x) for x in self.argmax_xi],
            "strict_threshold": self.threshold,
            "strictly_dissipative": self.strictly_dissipative,
        }


def _eigs(sys: LinearizedSystem, xis: np.ndarray) -> np.ndarray:
    G = -(1j * sys.symbols(xis) + sys.B)
    return np.linalg.eigvals(G)


def dissipativity_sweep(sys: LinearizedSystem, xis=None, radii=None, threads: int = 1,
                        threshold: float = STRICT_THRESHOLD) -> DissipativitySweep:
    """Eigenvalues of -(iA(xi) + B) on a frequency grid.

    `xis` are sample directions (3D) or scalars (1D); with `radii` they are
    scaled into a product grid. Without either, the default grid is used.
    """
    if xis is None:
        grid = default_grid(sys)
    else:
        pts = np.asarray(xis, dtype=float).reshape(-1, sys.dim)
        if radii is not None:
            radii = np.asarray(radii, dtype=float).reshape(-1)
            if np.any(radii <= 0):
                raise DomainError("radii must be positive")
            pts = (radii[:, None, None] * pts[None]).reshape(-1, sys.dim)
        grid = pts
    if threads > 1 and len(grid) > threads:
        chunks = np.array_split(grid, threads)
        with ThreadPoolExecutor(threads) as pool:
            eigs = np.concatenate(list(pool.map(lambda g: _eigs(sys, g), chunks)))
    else:
        eigs = _eigs(sys, grid)
    per = eigs.real.max(axis=1)
    k = int(np.argmax(per))
    return DissipativitySweep(grid, eigs, float(per[k]), grid[k], threshold)


def write_sweep_csv(sweep: DissipativitySweep, path) -> None:
    d, n = sweep.xis.shape[1], sweep.eigenvalues.shape[1]
    header = [f"xi{j + 1}" for j in range(d)]
    header += [f"{part}_lambda{k + 1}" for k in range(n) for part in ("re", "im")]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for xi, lam in zip(sweep.xis, sweep.eigenvalues):
            row = [repr(float(x)) for x in xi]
            for z in lam:
                row += [repr(float(z.real)), repr(float(z.imag))]
            w.writerow(row)
