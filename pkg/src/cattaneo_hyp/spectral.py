"""Characteristic speeds, multiplicities, diagonalizability and spectral-gap constants."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import List, Optional, Tuple

import numpy as np

from .errors import ConvergenceError, NumericalError, ProfileMismatch
from .symbol import FluidState, assemble_A, assemble_symbol, direction
from .thermo import StateBox, ThermoClosure, eval_closure

CLUSTER_RTOL = 1e-7
COND_LIMIT = 1e8
NULL_EIG_RTOL = 1e-6


@dataclass(frozen=True)
class SpectrumReport:
    eta0: float
    etas: Tuple[float, float, float, float]  # eta_1 .. eta_4
    z_plus_sq: float
    z_minus_sq: float
    numeric: Optional[np.ndarray] = None
    condition: Optional[float] = None
    pairing_error: Optional[float] = None

    @property
    def closed_form(self) -> np.ndarray:
        """All eight speeds, sorted, with eta_0 repeated four times."""
        return np.sort(np.array([self.eta0] * 4 + list(self.etas)))

    def ordering_holds(self) -> bool:
        e1, e2, e3, e4 = self.etas
        return e3 < e4 < self.eta0 < e2 < e1


def theta_phi(rho, theta, closure: ThermoClosure):
    """The two invariants whose quadratic X^2 - Theta X + Phi/4 has roots z_+^2, z_-^2."""
    c = eval_closure(closure, rho, theta)
    tau = closure.tau
    Theta = c.p_rho + theta * c.p_theta**2 / (rho**2 * c.e_theta) + c.kappa / (rho * c.e_theta * tau)
    Phi = 4 * c.p_rho * c.kappa / (rho * c.e_theta * tau)
    return Theta, Phi


def z_squares(rho, theta, closure: ThermoClosure):
    Theta, Phi = theta_phi(rho, theta, closure)
    disc = Theta**2 - Phi
    if np.any(disc < -1e-12):
        raise NumericalError(f"negative discriminant {np.min(disc):.3e}; closure violates positivity")
    root = np.sqrt(np.maximum(disc, 0.0))
    zp = 0.5 * (Theta + root)
    zm = 0.5 * (Theta - root)
    # cancellation guard: Theta - sqrt(Theta^2 - Phi) loses digits when Phi << Theta^2
    guard = np.abs(Phi) <= 1e-8 * Theta**2
    zm = np.where(guard, (Phi / 4) / zp, zm)
    if np.ndim(zp) == 0:
        return float(zp), float(zm)
    return zp, zm


def char_speeds(xi, U: FluidState, closure: ThermoClosure) -> SpectrumReport:
    """Closed-form characteristic speeds for an arbitrary (nonzero) frequency vector."""
    xi = direction(xi)
    scale = np.linalg.norm(xi)
    zp, zm = z_squares(U.rho, U.theta, closure)
    eta0 = float(np.dot(xi, U.v))
    sp, sm = scale * np.sqrt(zp), scale * np.sqrt(zm)
    return SpectrumReport(eta0, (eta0 + sp, eta0 + sm, eta0 - sp, eta0 - sm), zp, zm)


def cluster_complex(values, tol: float) -> List[List[int]]:
    """Single-linkage grouping of eigenvalues closer than tol in the complex plane."""
    values = np.asarray(values, dtype=complex)
    groups: List[List[int]] = []
    for i in np.lexsort((values.imag, values.real)):
        hit = [g for g in groups if np.min(np.abs(values[g] - values[i])) <= tol]
        if not hit:
            groups.append([int(i)])
            continue
        merged = [int(i)]
        for g in hit:
            merged.extend(g)
            groups.remove(g)
        groups.append(sorted(merged))
    groups.sort(key=lambda g: (np.mean(values[g]).real, np.mean(values[g]).imag))
    return groups


@dataclass(frozen=True)
class EigenBasis:
    """Eigenvalue clusters with an eigenspace basis for each (columns of vectors)."""

    eigenvalues: np.ndarray
    centers: np.ndarray
    multiplicities: Tuple[int, ...]
    nullities: Tuple[int, ...]
    vectors: Optional[np.ndarray]  # n x n when complete, else None
    scale: float

    @property
    def complete(self) -> bool:
        return self.multiplicities == self.nullities

    def blocks(self):
        start = 0
        for c, m in zip(self.centers, self.multiplicities):
            yield c, slice(start, start + m)
            start += m


def eigenbasis(M, cluster_rtol: float = CLUSTER_RTOL, null_rtol: float = NULL_EIG_RTOL) -> EigenBasis:
    """Eigenspaces from SVD null spaces of M - mu I, one per eigenvalue cluster.

    LAPACK eigenvectors of an exactly repeated eigenvalue of a non-normal
    matrix can be numerically parallel even when the matrix is diagonalizable;
    null spaces of the shifted matrix do not have that problem.
    """
    M = np.asarray(M)
    n = M.shape[0]
    try:
        w = np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(str(exc)) from exc
    scale = max(1.0, float(np.linalg.norm(M, 2)))
    groups = cluster_complex(w, cluster_rtol * max(1.0, float(np.max(np.abs(w)))))
    centers, mults, nulls, cols = [], [], [], []
    for g in groups:
        mu = complex(np.mean(w[g]))
        if abs(mu.imag) <= 1e-13 * scale:
            mu = mu.real
        _, s, vh = np.linalg.svd(M - mu * np.eye(n))
        k = int(np.sum(s <= null_rtol * scale))
        centers.append(mu)
        mults.append(len(g))
        nulls.append(k)
        cols.append(vh[n - len(g):].conj().T if k >= len(g) else None)
    complete = all(c is not None for c in cols) and mults == nulls
    V = np.hstack(cols) if complete else None
    return EigenBasis(w, np.array(centers), tuple(mults), tuple(nulls), V, scale)


@dataclass(frozen=True)
class NumericSpectrum:
    eigenvalues: np.ndarray
    vectors: np.ndarray
    condition: float
    residual: float


def spectrum_numeric(M) -> NumericSpectrum:
    """Dense eigendecomposition, sorted by real then imaginary part.

    Eigenvectors come from the cluster eigenspaces when those are complete,
    otherwise from LAPACK directly.
    """
    M = np.asarray(M)
    if not np.all(np.isfinite(M)):
        raise ConvergenceError("matrix has non-finite entries")
    try:
        w, V = np.linalg.eig(M)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(str(exc)) from exc
    order = np.lexsort((w.imag, w.real))
    w, V = w[order], V[:, order]
    basis = eigenbasis(M)
    if basis.complete:
        w = np.concatenate([np.full(m, c) for c, m in zip(basis.centers, basis.multiplicities)])
        V = basis.vectors
    scale = max(np.linalg.norm(M, 2), 1.0)
    residual = float(np.linalg.norm(M @ V - V * w, 2))
    if residual > 1e-10 * scale:
        raise ConvergenceError(f"eigen-residual {residual:.3e} too large")
    return NumericSpectrum(w, V, float(np.linalg.cond(V)), residual)


def spectrum_report(xi, U: FluidState, closure: ThermoClosure, M=None) -> SpectrumReport:
    """Closed-form speeds together with the numeric spectrum of A (or of a supplied matrix)."""
    rep = char_speeds(xi, U, closure)
    if M is None:
        M = assemble_A(xi, U, closure).matrix
    num = spectrum_numeric(M)
    err = float(np.max(np.abs(np.sort(num.eigenvalues.real) - rep.closed_form)))
    err = max(err, float(np.max(np.abs(num.eigenvalues.imag))))
    return replace(rep, numeric=num.eigenvalues, condition=num.condition, pairing_error=err)


def cluster_real(values, tol: Optional[float] = None) -> List[Tuple[float, List[int]]]:
    """Group (nearly) real eigenvalues whose sorted neighbours are within tol.

    Default tol is CLUSTER_RTOL * max(1, spectral radius).
    """
    values = np.asarray(values)
    re = values.real
    if tol is None:
        tol = CLUSTER_RTOL * max(1.0, float(np.max(np.abs(values))) if values.size else 1.0)
    order = np.argsort(re)
    groups: List[List[int]] = []
    for i in order:
        if groups and re[i] - re[groups[-1][-1]] <= tol:
            groups[-1].append(int(i))
        else:
            groups.append([int(i)])
    return [(float(np.mean(re[g])), g) for g in groups]


def multiplicity_profile(xi, U: FluidState, closure: ThermoClosure,
                         tol: Optional[float] = None) -> List[Tuple[float, int]]:
    M = assemble_A(xi, U, closure).matrix
    w = spectrum_numeric(M).eigenvalues
    if np.max(np.abs(w.imag)) > (tol or CLUSTER_RTOL) * max(1.0, np.max(np.abs(w))):
        raise ProfileMismatch("non-real eigenvalues in the symbol")
    profile = [(c, len(g)) for c, g in cluster_real(w, tol)]
    if sorted(m for _, m in profile) != [1, 1, 1, 1, 4]:
        raise ProfileMismatch(f"multiplicity profile {profile} is not {{4,1,1,1,1}}")
    return profile


@dataclass(frozen=True)
class GapBounds:
    delta1: float
    delta2: float
    delta3: float
    delta4: float
    box: StateBox
    tau: float

    @property
    def delta(self) -> float:
        return min(self.delta1, self.delta3, self.delta4)


def gap_bounds(box: StateBox, tau: float) -> GapBounds:
    """Lower bounds on z_+^2, z_-^2 and sqrt(z_+^2)-sqrt(z_-^2) over a state box."""
    r0, r1, t0, t1, M1, M2 = box.rho0, box.rho1, box.theta0, box.theta1, box.M1, box.M2
    d1 = 0.5 * (M1 + t0 * M1**2 / (r1**2 * M2) + M1 / (r1 * M2 * tau))
    d2 = M2 + t1 * M2**2 / (r0**2 * M1) + M2 / (r0 * M1 * tau)
    d3 = M1**2 / (np.sqrt(2.0) * r1 * M2 * tau) / (d2 + 2 * M2 / np.sqrt(r0 * M1 * tau))
    d4 = t0 * M1**2 / (2 * r1**2 * M2) / np.sqrt(d2)
    return GapBounds(float(d1), float(d2), float(d3), float(d4), box, float(tau))


def distinct_speed_gap(eigenvalues, tol: Optional[float] = None) -> float:
    """Smallest distance between distinct (clustered) eigenvalues."""
    centers = [c for c, _ in cluster_real(eigenvalues, tol)]
    return float(np.min(np.diff(centers))) if len(centers) > 1 else np.inf


@dataclass(frozen=True)
class Diagonalizability:
    verdict: str  # "diagonalizable" | "defective" | "complex"
    condition: float
    max_imag: float


def diagonalizability_check(M, tol: float = 1e-8) -> Diagonalizability:
    """Classify M as diagonalizable (real spectrum), defective, or complex.

    Defective: some eigenvalue cluster has fewer independent eigenvectors than
    its size, or the assembled eigenbasis has condition number above 1/tol.
    """
    basis = eigenbasis(np.asarray(M))
    max_imag = float(np.max(np.abs(basis.eigenvalues.imag)))
    if np.max(np.abs(np.imag(basis.centers))) > tol * basis.scale:
        cond = np.inf if basis.vectors is None else float(np.linalg.cond(basis.vectors))
        return Diagonalizability("complex", cond, max_imag)
    if not basis.complete:
        return Diagonalizability("defective", np.inf, max_imag)
    cond = float(np.linalg.cond(basis.vectors))
    verdict = "defective" if not np.isfinite(cond) or cond > 1.0 / tol else "diagonalizable"
    return Diagonalizability(verdict, cond, max_imag)


def random_states(rng: np.random.Generator, n: int, rho_range=(0.5, 2.0), theta_range=(0.5, 2.0),
                  v_scale: float = 1.0, q_scale: float = 1.0) -> List[FluidState]:
    """Uniform (rho, theta) in a box, normal v and q."""
    rho = rng.uniform(*rho_range, size=n)
    theta = rng.uniform(*theta_range, size=n)
    v = rng.normal(scale=v_scale, size=(n, 3))
    q = rng.normal(scale=q_scale, size=(n, 3))
    return [FluidState(rho[i], v[i], theta[i], q[i]) for i in range(n)]


def random_directions(rng: np.random.Generator, n: int) -> np.ndarray:
    x = rng.normal(size=(n, 3))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


@dataclass(frozen=True)
class HyperbolicitySweep:
    lam: float
    nu: float
    samples: int
    non_hyperbolic: int
    max_imag: float
    max_condition: float
    witness_xi: Optional[np.ndarray]
    witness_state: Optional[FluidState]
    witness_verdict: Optional[str]

    @property
    def hyperbolic(self) -> bool:
        return self.non_hyperbolic == 0


def hyperbolicity_sweep(closure: ThermoClosure, lam: float, nu: float, rng: np.random.Generator,
                        n_states: int = 50, n_directions: int = 8, tol: float = 1e-8) -> HyperbolicitySweep:
    """Scan random (xi, U) for a non-diagonalizable symbol of the (lam, nu) model."""
    worst = None
    bad = 0
    max_imag = max_cond = 0.0
    total = 0
    for U in random_states(rng, n_states):
        for xi in random_directions(rng, n_directions):
            d = diagonalizability_check(assemble_symbol(xi, U, closure, lam, nu).matrix, tol)
            total += 1
            max_imag = max(max_imag, d.max_imag)
            max_cond = max(max_cond, d.condition if np.isfinite(d.condition) else np.inf)
            if d.verdict != "diagonalizable":
                bad += 1
                if worst is None or d.condition > worst[2].condition:
                    worst = (xi, U, d)
    return HyperbolicitySweep(
        lam, nu, total, bad, max_imag, max_cond,
        None if worst is None else worst[0],
        None if worst is None else worst[1],
        None if worst is None else worst[2].verdict,
    )
