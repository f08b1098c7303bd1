"""Friedrichs-symmetrizer feasibility certificates and microlocal symmetrizers.

A constant symmetric S symmetrizes a family of symbols M(xi) iff the
antisymmetric matrices S M(xi) - M(xi)^T S vanish. Their strict upper
triangles give n(n-1)/2 equations per direction, linear in the n(n+1)/2
upper-triangle unknowns of S (ordered row-major: s11, s12, ..., snn).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from .errors import CascadeBroken, ConvergenceError, NotDiagonalizable
from .spectral import COND_LIMIT, eigenbasis, random_directions
from .symbol import FluidState, assemble_A, direction, matrix_rows
from .thermo import ThermoClosure

NULL_RTOL = 1e-10
PD_FLOOR = 1e-8
CANONICAL = {"e1": np.array([1.0, 0, 0]), "e2": np.array([0, 1.0, 0]), "e3": np.array([0, 0, 1.0])}


def unknown_pairs(n: int) -> List[Tuple[int, int]]:
    return [(i, j) for i in range(n) for j in range(i, n)]


def unknown_label(i: int, j: int) -> str:
    return f"s{i + 1}{j + 1}"


def unknown_index(label: str, n: int = 8) -> int:
    i, j = int(label[1]) - 1, int(label[2]) - 1
    return unknown_pairs(n).index((min(i, j), max(i, j)))


def _basis_tensor(n: int) -> np.ndarray:
    pairs = unknown_pairs(n)
    B = np.zeros((len(pairs), n, n))
    for u, (i, j) in enumerate(pairs):
        B[u, i, j] = B[u, j, i] = 1.0
    return B


def sym_from_vector(s, n: int) -> np.ndarray:
    return np.einsum("u,uij->ij", np.asarray(s, dtype=float), _basis_tensor(n))


def vector_from_sym(S) -> np.ndarray:
    S = np.asarray(S)
    return np.array([S[i, j] for i, j in unknown_pairs(S.shape[0])])


def commutator_rows(M) -> np.ndarray:
    """Rows (k<l) of the linear map s -> (S M - M^T S)_kl."""
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    B = _basis_tensor(n)
    C = np.einsum("uij,jl->uil", B, M) - np.einsum("ji,ujl->uil", M, B)
    k, l = np.triu_indices(n, 1)
    return C[:, k, l].T


@dataclass(frozen=True)
class SymmetryConstraintSystem:
    matrix: np.ndarray
    n: int
    directions: np.ndarray
    row_labels: List[Tuple[int, int, int]]  # (k, l, direction index), 1-based k, l
    state: Optional[FluidState] = None

    def residual(self, S) -> float:
        return float(np.max(np.abs(self.matrix @ vector_from_sym(S))))


def constraints_from_symbols(symbols: Sequence[np.ndarray], directions=None,
                             state: Optional[FluidState] = None) -> SymmetryConstraintSystem:
    symbols = [np.asarray(M, dtype=float) for M in symbols]
    n = symbols[0].shape[0]
    k, l = np.triu_indices(n, 1)
    labels = [(int(a) + 1, int(b) + 1, d) for d in range(len(symbols)) for a, b in zip(k, l)]
    C = np.vstack([commutator_rows(M) for M in symbols])
    dirs = np.asarray(directions) if directions is not None else np.arange(len(symbols))
    return SymmetryConstraintSystem(C, n, dirs, labels, state)


def build_constraints(U: FluidState, directions, closure: ThermoClosure) -> SymmetryConstraintSystem:
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    if len(directions) < 1:
        raise ValueError("need at least one direction")
    mats = [assemble_A(xi, U, closure).matrix for xi in directions]
    return constraints_from_symbols(mats, directions, U)


def null_space(C: np.ndarray, rtol: float = NULL_RTOL) -> np.ndarray:
    """Orthonormal basis (columns) of ker C with singular-value cutoff rtol * sigma_max."""
    _, s, vt = np.linalg.svd(C, full_matrices=True)
    if s.size == 0 or s[0] == 0:
        return np.eye(C.shape[1])
    rank = int(np.sum(s > rtol * s[0]))
    return vt[rank:].T.copy()


def pd_search(basis: np.ndarray, n: int, rng: np.random.Generator, starts: int = 32,
              iters: int = 300) -> Tuple[float, Optional[np.ndarray]]:
    """Maximize lambda_min(S(c)) over the unit ball of null-space coefficients c.

    lambda_min is concave in c, so projected supergradient ascent from a few
    random starts suffices. Returns (best lambda_min of S/||S||_F, S).
    """
    d = basis.shape[1]
    if d == 0:
        return -np.inf, None
    mats = np.einsum("ud,uij->dij", basis, _basis_tensor(n))
    best_val, best_S = -np.inf, None
    for _ in range(starts):
        c = rng.normal(size=d)
        c /= np.linalg.norm(c)
        for it in range(iters):
            S = np.einsum("d,dij->ij", c, mats)
            w, V = np.linalg.eigh(S)
            nrm = np.linalg.norm(S)
            if nrm > 0 and w[0] / nrm > best_val:
                best_val, best_S = w[0] / nrm, S / nrm
            u = V[:, 0]
            g = np.einsum("i,dij,j->d", u, mats, u)
            c = c + g / np.sqrt(it + 1.0)
            c /= max(1.0, np.linalg.norm(c))
        if best_val > 0.1:
            break
    return float(best_val), best_S


@dataclass
class SymmetrizerCertificate:
    verdict: str  # "feasible" | "infeasible" | "inconclusive"
    n: int
    null_dim: int
    null_basis: np.ndarray
    forced_zero: List[str]
    forced_zero_bounds: Dict[str, float]
    forced_zero_diagonal: List[str]
    witness: Optional[np.ndarray] = None
    min_eig: Optional[float] = None
    residual: Optional[float] = None
    outside_hypothesis: bool = False
    n_directions: int = 0
    notes: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "n": self.n,
            "n_directions": self.n_directions,
            "null_space_dimension": self.null_dim,
            "forced_zero": self.forced_zero,
            "forced_zero_bounds": self.forced_zero_bounds,
            "forced_zero_diagonal": self.forced_zero_diagonal,
            "pd_witness": None if self.witness is None else matrix_rows(self.witness),
            "witness_min_eigenvalue": self.min_eig,
            "witness_residual": self.residual,
            "outside_hypothesis": self.outside_hypothesis,
            "notes": self.notes,
        }


def certify(system: SymmetryConstraintSystem, tol: float = NULL_RTOL,
            rng: Optional[np.random.Generator] = None, starts: int = 32) -> SymmetrizerCertificate:
    """Decide whether a positive definite S lies in the kernel of the constraint system."""
    n = system.n
    pairs = unknown_pairs(n)
    N = null_space(system.matrix, tol)
    bounds = np.linalg.norm(N, axis=1) if N.shape[1] else np.zeros(len(pairs))
    forced = [u for u in range(len(pairs)) if bounds[u] < tol]
    labels = [unknown_label(*pairs[u]) for u in forced]
    diag = [unknown_label(*pairs[u]) for u in forced if pairs[u][0] == pairs[u][1]]
    cert = SymmetrizerCertificate(
        verdict="inconclusive", n=n, null_dim=N.shape[1], null_basis=N,
        forced_zero=labels, forced_zero_bounds={lab: float(bounds[u]) for lab, u in zip(labels, forced)},
        forced_zero_diagonal=diag, n_directions=len(system.directions),
    )
    if diag:
        cert.verdict = "infeasible"
        return cert
    rng = rng if rng is not None else np.random.default_rng(0)
    val, S = pd_search(N, n, rng, starts)
    if S is not None and val > PD_FLOOR:
        try:
            np.linalg.cholesky(S)
        except np.linalg.LinAlgError:
            cert.notes.append("PD search candidate failed Cholesky verification")
            return cert
        cert.verdict = "feasible"
        cert.witness = S
        cert.min_eig = float(np.linalg.eigvalsh(S)[0])
        cert.residual = system.residual(S)
    else:
        cert.notes.append(f"best normalized min eigenvalue found: {val:.3e}")
    return cert


def feasibility_directions(n_random: int = 29, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return np.vstack([np.eye(3), random_directions(rng, n_random)]) if n_random else np.eye(3)


def friedrichs_feasibility(U: FluidState, closure: ThermoClosure, n_random_directions: int = 29,
                           tol: float = NULL_RTOL, seed: int = 0) -> SymmetrizerCertificate:
    """Certificate for the (1,-1) symbol at U over canonical plus fixed-seed random directions."""
    system = build_constraints(U, feasibility_directions(n_random_directions, seed), closure)
    cert = certify(system, tol, np.random.default_rng(seed))
    if np.any(U.q != 0) and not np.all(U.q != 0):
        cert.outside_hypothesis = True
        cert.notes.append("some heat-flux components vanish: state outside the all-nonzero-q hypothesis")
    return cert


def validate_symmetrizer(S, symbols: Sequence[np.ndarray]) -> Tuple[float, float]:
    """(max |S M - M^T S| over the symbols, min eigenvalue of S)."""
    S = np.asarray(S)
    res = max(float(np.max(np.abs(S @ M - M.T @ S))) for M in symbols)
    return res, float(np.linalg.eigvalsh(S)[0])


# Replay of the forced-zero cascade. Each step: (description, equations with the
# directions they are evaluated at, entries the step must force, pivot quantities).
# "all" means the three canonical directions, which is the same as requiring an
# equation linear in xi to hold on the whole sphere.
CASCADE = (
    ("xi-independence of (1:6),(1:7),(1:8),(6:7),(6:8),(7:8)",
     [((1, 6), "all"), ((1, 7), "all"), ((1, 8), "all"), ((6, 7), "all"), ((6, 8), "all"), ((7, 8), "all")],
     ("s27", "s28", "s36", "s38", "s46", "s47", "s56", "s57", "s58"), "alpha, gamma > 0"),
    ("(4:6),(4:8) at e2 and (3:6) at e3",
     [((4, 6), "e2"), ((4, 8), "e2"), ((3, 6), "e3")],
     ("s67", "s68", "s78"), "N23(e2;q) = -q3 and N23(e3;q) = q2"),
    ("xi-independence of (2:5),(3:5)",
     [((2, 5), "all"), ((3, 5), "all")],
     ("s23", "s24", "s34"), "eta > 0"),
    ("(1:2) at e3 and e2, (1:3) at e1",
     [((1, 2), "e3"), ((1, 2), "e2"), ((1, 3), "e1")],
     ("s16", "s17", "s18"), "N13(e3;q) = q1, N12(e2;q) = q1, N12(e1;q) = -q2"),
    ("(2:6) at e1, (3:7) at e2, (4:8) at e3",
     [((2, 6), "e1"), ((3, 7), "e2"), ((4, 8), "e3")],
     ("s25", "s35", "s45"), "gamma > 0"),
    ("xi-independence of (3:8),(4:6),(4:7)",
     [((3, 8), "all"), ((4, 6), "all"), ((4, 7), "all")],
     ("s66", "s77", "s88"), "N13(.;q) and N23(.;q) not identically zero"),
)


@dataclass(frozen=True)
class TraceStep:
    description: str
    equations: List[Tuple[Tuple[int, int], str]]
    forced: List[str]


def forced_zero_trace(U: FluidState, closure: ThermoClosure, tol: float = NULL_RTOL) -> List[TraceStep]:
    """Replay the canonical-direction elimination that forces s66 = s77 = s88 = 0."""
    n = 8
    pairs = unknown_pairs(n)
    rows_at = {name: commutator_rows(assemble_A(xi, U, closure).matrix) for name, xi in CANONICAL.items()}
    k, l = np.triu_indices(n, 1)
    row_of = {(int(a) + 1, int(b) + 1): r for r, (a, b) in enumerate(zip(k, l))}
    known: List[int] = []
    steps = []
    for description, equations, expected, pivot in CASCADE:
        rows = []
        for eq, where in equations:
            for name in (CANONICAL if where == "all" else (where,)):
                rows.append(rows_at[name][row_of[eq]])
        for u in known:
            e = np.zeros(len(pairs))
            e[u] = 1.0
            rows.append(e)
        C = np.array(rows)
        C_scale = np.max(np.abs(C))
        N = null_space(C / C_scale, tol)
        bounds = np.linalg.norm(N, axis=1) if N.shape[1] else np.zeros(len(pairs))
        forced = {u for u in range(len(pairs)) if bounds[u] < tol}
        missing = [lab for lab in expected if unknown_index(lab) not in forced]
        if missing:
            raise CascadeBroken(f"step '{description}' failed to force {missing}; pivot ({pivot}) vanishes")
        new = sorted(forced - set(known))
        known.extend(new)
        steps.append(TraceStep(description, list(equations), [unknown_label(*pairs[u]) for u in new]))
    return steps


@dataclass(frozen=True)
class MicrolocalSymmetrizer:
    matrix: np.ndarray
    xi: np.ndarray
    state: Optional[FluidState]
    min_eig: float
    residual: float
    hermitian_defect: float


def projector_symmetrizer(M, cond_limit: float = COND_LIMIT) -> np.ndarray:
    """Sum over distinct eigenvalues of P_j^* P_j / m_j, P_j the spectral projectors."""
    M = np.asarray(M)
    basis = eigenbasis(M)
    if (not basis.complete or np.max(np.abs(np.imag(basis.centers))) > 1e-8 * basis.scale
            or np.linalg.cond(basis.vectors) > cond_limit):
        raise NotDiagonalizable("symbol is not diagonalizable with real spectrum")
    V = basis.vectors
    try:
        Vinv = np.linalg.inv(V)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(str(exc)) from exc
    S = np.zeros(M.shape, dtype=complex)
    for _, cols in basis.blocks():
        P = V[:, cols] @ Vinv[cols, :]
        S += P.conj().T @ P / (cols.stop - cols.start)
    return S


def microlocal_symmetrizer(xi, U: FluidState, closure: ThermoClosure) -> MicrolocalSymmetrizer:
    xi = direction(xi)
    M = assemble_A(xi, U, closure).matrix
    S = projector_symmetrizer(M)
    return MicrolocalSymmetrizer(
        matrix=S,
        xi=xi,
        state=U,
        min_eig=float(np.linalg.eigvalsh(0.5 * (S + S.conj().T))[0]),
        residual=float(np.max(np.abs(S @ M - M.conj().T @ S))),
        hermitian_defect=float(np.max(np.abs(S - S.conj().T))),
    )


def contour_symmetrizer(M, roots: Sequence[Tuple[float, int]], nodes: int = 64) -> np.ndarray:
    """Trapezoidal evaluation of (1/2 pi i) oint (l - M^*)^-1 (l - M)^-1 P(l)/P'(l) dl.

    The contour is a union of circles around the given real roots (with their
    multiplicities); each radius is half the distance to the nearest other root
    or zero of P'. P/P' is evaluated as 1 / tr((l - M)^-1), so the integrand
    does not use any eigendecomposition of M.
    """
    M = np.asarray(M, dtype=complex)
    n = M.shape[0]
    centers = np.array(sorted(c for c, _ in roots))
    mult = dict(roots)
    mult = np.array([mult[c] for c in centers])

    def dlog(x):
        return np.sum(mult / (x - centers))

    crit = []
    for a, b in zip(centers[:-1], centers[1:]):
        eps = 1e-9 * (b - a)
        crit.append(brentq(dlog, a + eps, b - eps, xtol=1e-15 * max(1.0, abs(b))))
    crit = np.array(crit)
    I = np.eye(n)
    Mh = M.conj().T
    theta = 2 * np.pi * np.arange(nodes) / nodes
    S = np.zeros((n, n), dtype=complex)
    for c in centers:
        others = np.concatenate([centers[centers != c], crit])
        r = 0.5 * np.min(np.abs(others - c)) if others.size else 1.0
        for t in theta:
            lam = c + r * np.exp(1j * t)
            R = np.linalg.inv(lam * I - M)
            Rh = np.linalg.inv(lam * I - Mh)
            S += Rh @ R / np.trace(R) * (r * np.exp(1j * t) / nodes)
    return S
