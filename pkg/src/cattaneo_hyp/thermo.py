"""Equation-of-state closures and the positivity checks they must pass.

A closure supplies p, e, kappa as functions of (rho, theta) together with the
partial derivatives the symbol needs, plus the constant relaxation time tau.
All callables accept scalars or numpy arrays (broadcasting).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, NamedTuple

import numpy as np

from .errors import AssumptionViolation, DomainError

Fn = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ThermoClosure:
    name: str
    p: Fn
    p_rho: Fn
    p_theta: Fn
    e: Fn
    e_theta: Fn
    kappa: Fn
    tau: float = 1.0
    params: tuple = ()

    def __post_init__(self):
        if not self.tau > 0:
            raise AssumptionViolation(f"relaxation time tau must be positive, got {self.tau}")


class ClosureValues(NamedTuple):
    p: np.ndarray
    p_rho: np.ndarray
    p_theta: np.ndarray
    e: np.ndarray
    e_theta: np.ndarray
    kappa: np.ndarray


_POSITIVE = ("p", "p_rho", "p_theta", "e_theta", "kappa")


def eval_closure(closure: ThermoClosure, rho, theta) -> ClosureValues:
    """Evaluate all closure functions at (rho, theta), checking positivity.

    Scalars in give 0-d results out; arrays broadcast.
    """
    rho = np.asarray(rho, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if np.any(~(rho > 0)) or np.any(~(theta > 0)):
        raise DomainError(f"need rho > 0 and theta > 0, got rho={rho}, theta={theta}")
    shape = np.broadcast(rho, theta).shape
    vals = ClosureValues(
        *(np.broadcast_to(np.asarray(getattr(closure, f)(rho, theta), dtype=float), shape)
          for f in ClosureValues._fields)
    )
    for f in ClosureValues._fields:
        if not np.all(np.isfinite(getattr(vals, f))):
            raise AssumptionViolation(f"closure {closure.name!r}: {f} is not finite")
    for f in _POSITIVE:
        if np.any(getattr(vals, f) <= 0):
            raise AssumptionViolation(f"closure {closure.name!r}: {f} must be positive")
    return vals


def derivative_errors(closure: ThermoClosure, rho: float, theta: float) -> Dict[str, float]:
    """Relative mismatch between analytic and central-difference derivatives."""
    h_rho = 1e-5 * max(1.0, abs(rho), abs(theta))
    h_theta = h_rho
    fd = {
        "p_rho": (closure.p(rho + h_rho, theta) - closure.p(rho - h_rho, theta)) / (2 * h_rho),
        "p_theta": (closure.p(rho, theta + h_theta) - closure.p(rho, theta - h_theta)) / (2 * h_theta),
        "e_theta": (closure.e(rho, theta + h_theta) - closure.e(rho, theta - h_theta)) / (2 * h_theta),
    }
    out = {}
    for name, approx in fd.items():
        exact = float(getattr(closure, name)(rho, theta))
        out[name] = abs(float(approx) - exact) / max(1.0, abs(exact))
    return out


def check_derivatives(closure: ThermoClosure, points, rtol: float = 1e-6) -> float:
    """Raise AssumptionViolation if supplied derivatives disagree with finite differences."""
    worst = 0.0
    for rho, theta in points:
        for name, err in derivative_errors(closure, rho, theta).items():
            if err > rtol:
                raise AssumptionViolation(
                    f"closure {closure.name!r}: {name} inconsistent at ({rho}, {theta}), rel. error {err:.3e}"
                )
            worst = max(worst, err)
    return worst


@dataclass(frozen=True)
class StateBox:
    rho0: float
    rho1: float
    theta0: float
    theta1: float
    M1: float
    M2: float

    def __post_init__(self):
        if not (0 < self.rho0 <= self.rho1 and 0 < self.theta0 <= self.theta1):
            raise DomainError(f"invalid box rho=[{self.rho0},{self.rho1}] theta=[{self.theta0},{self.theta1}]")
        if not (0 < self.M1 <= self.M2):
            raise AssumptionViolation(f"need 0 < M1 <= M2, got M1={self.M1}, M2={self.M2}")


def box_bounds(closure: ThermoClosure, rho_range, theta_range, samples: int = 64) -> StateBox:
    """Bound p_rho, p_theta, e_theta, kappa over a (rho, theta) rectangle by dense sampling."""
    rho0, rho1 = map(float, rho_range)
    theta0, theta1 = map(float, theta_range)
    if not (0 < rho0 <= rho1 and 0 < theta0 <= theta1):
        raise DomainError(f"invalid box rho={rho_range} theta={theta_range}")
    r, t = np.meshgrid(np.linspace(rho0, rho1, samples), np.linspace(theta0, theta1, samples))
    vals = eval_closure(closure, r, t)
    stacked = np.stack([vals.p_rho, vals.p_theta, vals.e_theta, vals.kappa])
    return StateBox(rho0, rho1, theta0, theta1, float(stacked.min()), float(stacked.max()))


# registry

def ideal_gas(R: float = 1.0, cv: float = 1.5, kappa: float = 1.0, tau: float = 1.0) -> ThermoClosure:
    """p = R rho theta, e = cv theta, constant conductivity."""
    return ThermoClosure(
        name="ideal-gas",
        p=lambda r, t: R * r * t,
        p_rho=lambda r, t: R * t + 0 * r,
        p_theta=lambda r, t: R * r + 0 * t,
        e=lambda r, t: cv * t + 0 * r,
        e_theta=lambda r, t: cv + 0 * (r + t),
        kappa=lambda r, t: kappa + 0 * (r + t),
        tau=tau,
        params=(("R", R), ("cv", cv), ("kappa", kappa), ("tau", tau)),
    )


def power_law(R: float = 1.0, a: float = 0.5, cv: float = 1.5, kappa0: float = 1.0,
              exponent: float = 0.75, tau: float = 1.0) -> ThermoClosure:
    """p = R rho theta + a rho^2, e = cv theta, kappa = kappa0 theta^exponent."""
    if a < 0 or kappa0 <= 0:
        raise AssumptionViolation("power-law closure needs a >= 0 and kappa0 > 0")
    return ThermoClosure(
        name="power-law",
        p=lambda r, t: R * r * t + a * r**2,
        p_rho=lambda r, t: R * t + 2 * a * r,
        p_theta=lambda r, t: R * r + 0 * t,
        e=lambda r, t: cv * t + 0 * r,
        e_theta=lambda r, t: cv + 0 * (r + t),
        kappa=lambda r, t: kappa0 * np.power(t, exponent) + 0 * r,
        tau=tau,
        params=(("R", R), ("a", a), ("cv", cv), ("kappa0", kappa0), ("exponent", exponent), ("tau", tau)),
    )


CLOSURES: Dict[str, Callable[..., ThermoClosure]] = {
    "ideal-gas": ideal_gas,
    "power-law": power_law,
}


def register_closure(name: str, factory: Callable[..., ThermoClosure]) -> None:
    CLOSURES[name] = factory


def get_closure(name: str, **params) -> ThermoClosure:
    try:
        factory = CLOSURES[name]
    except KeyError:
        raise KeyError(f"unknown closure {name!r}; known: {sorted(CLOSURES)}") from None
    return factory(**params)
