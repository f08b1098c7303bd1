"""Symbol matrices of the quasilinear heat-conducting fluid system.

Variable ordering is fixed everywhere as (rho, v1, v2, v3, theta, q1, q2, q3).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainError
from .thermo import ThermoClosure, eval_closure

RHO, VEL, THETA, FLUX = 0, slice(1, 4), 4, slice(5, 8)
SYMBOL_KINDS = ("A", "A0", "N", "DQ", "S0", "S_microlocal")


@dataclass(frozen=True)
class FluidState:
    rho: float
    v: np.ndarray
    theta: float
    q: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "v", np.asarray(self.v, dtype=float).reshape(3))
        object.__setattr__(self, "q", np.asarray(self.q, dtype=float).reshape(3))
        if not (self.rho > 0 and self.theta > 0):
            raise DomainError(f"state outside O: rho={self.rho}, theta={self.theta}")

    @classmethod
    def from_vector(cls, u) -> "FluidState":
        u = np.asarray(u, dtype=float)
        return cls(float(u[0]), u[1:4], float(u[4]), u[5:8])

    def as_vector(self) -> np.ndarray:
        return np.concatenate([[self.rho], self.v, [self.theta], self.q])


@dataclass(frozen=True)
class EquilibriumState:
    rho: float
    v: np.ndarray
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "v", np.asarray(self.v, dtype=float).reshape(3))
        if not (self.rho > 0 and self.theta > 0):
            raise DomainError(f"state outside O: rho={self.rho}, theta={self.theta}")

    def embed(self) -> FluidState:
        return FluidState(self.rho, self.v, self.theta, np.zeros(3))


@dataclass(frozen=True)
class Symbol8:
    """An 8x8 matrix tagged with what it is and where it was evaluated."""

    matrix: np.ndarray
    kind: str
    xi: Optional[np.ndarray] = None
    state: Optional[FluidState] = None

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)

    @property
    def shape(self):
        return self.matrix.shape


def direction(xi, unit: bool = False) -> np.ndarray:
    """Validate a frequency vector; optionally normalize it to the unit sphere."""
    xi = np.asarray(xi, dtype=float).reshape(-1)
    norm = np.linalg.norm(xi)
    if not norm > 0 or not np.all(np.isfinite(xi)):
        raise DomainError(f"direction must be finite and nonzero, got {xi}")
    return xi / norm if unit else xi


def convective_block(xi, q, lam: float, nu: float) -> np.ndarray:
    """Symbol of the velocity-gradient terms of the objective heat-flux derivative.

    Entry (i, k) multiplies the velocity amplitude v_k in the equation for q_i:
    ((lam-1)/2)(xi.q) delta_ik + ((lam+1)/2) xi_i q_k + nu xi_k q_i.
    At (lam, nu) = (1, -1) this is the antisymmetric block xi_i q_k - xi_k q_i.
    """
    xi = np.asarray(xi, dtype=float)
    q = np.asarray(q, dtype=float)
    return (0.5 * (lam - 1.0) * np.dot(xi, q) * np.eye(3)
            + 0.5 * (lam + 1.0) * np.outer(xi, q)
            + nu * np.outer(q, xi))


def _principal(xi: np.ndarray, U: FluidState, closure: ThermoClosure) -> np.ndarray:
    c = eval_closure(closure, U.rho, U.theta)
    rho, theta, tau = U.rho, U.theta, closure.tau
    p_rho, p_theta, e_theta, kappa = float(c.p_rho), float(c.p_theta), float(c.e_theta), float(c.kappa)
    M = np.dot(xi, U.v) * np.eye(8)
    M[RHO, VEL] = rho * xi
    M[VEL, RHO] = p_rho / rho * xi
    M[VEL, THETA] = p_theta / rho * xi
    M[THETA, VEL] = theta * p_theta / (rho * e_theta) * xi
    M[THETA, FLUX] = xi / (rho * e_theta)
    M[FLUX, THETA] = kappa / tau * xi
    return M


def assemble_symbol(xi, U: FluidState, closure: ThermoClosure,
                    lam: float = 1.0, nu: float = -1.0) -> Symbol8:
    """Full symbol for an arbitrary objective derivative parameter pair (lam, nu)."""
    xi = direction(xi)
    M = _principal(xi, U, closure)
    M[FLUX, VEL] = convective_block(xi, U.q, lam, nu)
    kind = "A" if (lam, nu) == (1.0, -1.0) else f"A[{lam},{nu}]"
    return Symbol8(M, kind, xi, U)


def assemble_A(xi, U: FluidState, closure: ThermoClosure) -> Symbol8:
    return assemble_symbol(xi, U, closure, 1.0, -1.0)


def assemble_A0(xi, U: FluidState, closure: ThermoClosure) -> Symbol8:
    """Symbol of the material-derivative (Christov-Jordan) model; independent of q."""
    xi = direction(xi)
    return Symbol8(_principal(xi, U, closure), "A0", xi, U)


def assemble_N(xi, U: FluidState) -> Symbol8:
    xi = direction(xi)
    M = np.zeros((8, 8))
    M[FLUX, VEL] = convective_block(xi, U.q, 1.0, -1.0)
    return Symbol8(M, "N", xi, U)


def source_Q(U: FluidState, tau: float) -> np.ndarray:
    out = np.zeros(8)
    out[FLUX] = U.q / tau
    return out


def jacobian_DQ(tau: float, V: Optional[FluidState] = None) -> Symbol8:
    """Jacobian of the relaxation source; the same constant matrix for every state."""
    return Symbol8(np.diag([0, 0, 0, 0, 0, 1, 1, 1]) / tau, "DQ", None, V)


def friedrichs_S0(U: FluidState, closure: ThermoClosure) -> Symbol8:
    """Diagonal symmetrizer of the q-independent part A0 of the symbol."""
    c = eval_closure(closure, U.rho, U.theta)
    d = np.empty(8)
    d[RHO] = c.p_rho / U.rho**2
    d[VEL] = 1.0
    d[THETA] = c.e_theta / U.theta
    d[FLUX] = closure.tau / (c.kappa * U.rho * U.theta)
    return Symbol8(np.diag(d), "S0", None, U)


def matrix_rows(m) -> list:
    """Array-of-rows form for JSON reports (complex entries as [re, im])."""
    m = np.asarray(m)
    if np.iscomplexobj(m):
        return [[[float(z.real), float(z.imag)] for z in row] for row in m]
    return [[float(x) for x in row] for row in m]
