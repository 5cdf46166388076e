"""Dimensionless parameters and closed-form forces of the V-spring belt harvester.

All force functions broadcast over numpy arrays and are total on finite input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from typing import NamedTuple

import numpy as np


class ParameterError(ValueError):
    """Raised when a parameter set violates its invariants."""


@dataclass(frozen=True)
class DimensionalParams:
    """Physical parameters of the rig (SI units)."""

    m: float
    k: float
    c: float
    l0: float
    le: float
    a: float
    b: float
    mu_s: float
    mu_m: float
    v_m: float
    v0: float
    L: float
    C: float
    R: float
    B: float
    f0: float = 0.0
    omega0: float = 0.0

    def validate(self) -> None:
        for name in ("m", "k", "l0", "C", "L", "v_m"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be > 0")
        if self.mu_s < self.mu_m:
            raise ParameterError("mu_s must be >= mu_m")
        for f in fields(self):
            value = getattr(self, f.name)
            if not math.isfinite(value) or value < 0:
                raise ParameterError(f"{f.name} must be finite and >= 0")
        if self.a == 0 and self.b == 0:
            raise ParameterError("degenerate spring geometry: a = b = 0")


@dataclass(frozen=True)
class Params:
    """Dimensionless parameter vector.

    Defaults are the simulation values used for the harvesting study
    (gamma = 1, theta = xi_x = xi_q = mu = xi = 0.1, eta = 1) on the
    QZS3 geometry with the belt at V0 = 0.3 and no harmonic forcing.
    """

    alpha: float = 0.0
    beta: float = 1.0
    gamma: float = 1.0
    theta: float = 0.1
    xi_x: float = 0.1
    xi_q: float = 0.1
    mu: float = 0.1
    xi: float = 0.1
    eta: float = 1.0
    V0: float = 0.3
    F0: float = 0.0
    Omega0: float = 0.0

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        for f in fields(self):
            if not math.isfinite(getattr(self, f.name)):
                raise ParameterError(f"{f.name} must be finite")
        if self.alpha < 0:
            raise ParameterError("alpha must be >= 0")
        if self.beta < 0:
            raise ParameterError("beta must be >= 0")
        if self.alpha == 0 and self.beta == 0:
            raise ParameterError("degenerate spring geometry: alpha = beta = 0")
        if not self.gamma > 0:
            raise ParameterError("gamma must be > 0")
        if self.eta < 0:
            raise ParameterError("eta must be >= 0")
        if self.mu < 0:
            raise ParameterError("mu must be >= 0")

    def with_(self, **changes: float) -> Params:
        return replace(self, **changes)

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, f.name) for f in fields(self)], dtype=np.float64)


PARAM_NAMES = tuple(f.name for f in fields(Params))


class TaylorCoeffs(NamedTuple):
    A1: float
    A3: float
    A5: float


def stribeck_coefficients(mu_s: float, mu_m: float, v_m: float) -> tuple[float, float]:
    """Linear and cubic slip coefficients (D1, D3) of the dimensional Stribeck law.

    D1 = 3 (mu_s - mu_m) / (2 v_m) and D3 = (mu_s - mu_m) / (2 v_m**3) place the
    minimum of the slip branch at v_r = v_m with value mu_m.
    """
    if v_m <= 0:
        raise ParameterError("v_m must be > 0")
    drop = mu_s - mu_m
    return 3.0 * drop / (2.0 * v_m), drop / (2.0 * v_m**3)


def nondimensionalize(p: DimensionalParams) -> Params:
    p.validate()
    omega_n = math.sqrt(p.k / p.m)
    root_mk = math.sqrt(p.m * p.k)
    q0 = p.l0 * math.sqrt(p.k * p.C)
    d1, d3 = stribeck_coefficients(p.mu_s, p.mu_m, p.v_m)
    return Params(
        alpha=p.a / p.l0,
        beta=p.b / p.l0,
        gamma=p.L * q0**2 / (p.m * p.l0**2),
        theta=p.B * p.le * math.sqrt(p.C / p.m),
        xi_x=p.c / (2.0 * root_mk),
        xi_q=p.C * p.R * omega_n,
        mu=p.mu_s / (p.k * p.l0),
        xi=d1 / (2.0 * root_mk),
        eta=d3 / root_mk,
        V0=p.v0 / (p.l0 * omega_n),
        F0=p.f0 / (p.k * p.l0),
        Omega0=p.omega0 / omega_n,
    )


def restoring_force(X, alpha: float, beta: float):
    """Horizontal force of the two inclined springs, odd in X."""
    X = np.asarray(X, dtype=float)
    b2 = beta * beta
    out = _spring_term(X + alpha, b2) + _spring_term(X - alpha, b2)
    return out if out.ndim else float(out)


def _spring_term(u, b2: float):
    r = np.sqrt(u * u + b2)
    # beta = 0 and u = 0: the spring is at its free length and pulls with zero force
    safe = np.where(r > 0.0, r, 1.0)
    return np.where(r > 0.0, u - u / safe, 0.0)


def restoring_stiffness(X, alpha: float, beta: float):
    """dF_s/dX, evaluated in closed form."""
    X = np.asarray(X, dtype=float)
    b2 = beta * beta
    total = np.zeros_like(X)
    for u in (X + alpha, X - alpha):
        r = np.sqrt(u * u + b2)
        # r = 0 only when beta = 0, where the one-sided slope is 1
        safe = np.where(r > 0.0, r, 1.0)
        total = total + 1.0 - np.where(r > 0.0, b2 / safe**3, 0.0)
    return total if total.ndim else float(total)


def restoring_force_dimensional(x, a: float, b: float, k: float, l0: float):
    """Spring force in newtons for displacement x (m)."""
    x = np.asarray(x, dtype=float)
    out = k * (x + a) * (1.0 - l0 / np.sqrt((x + a) ** 2 + b * b)) + k * (x - a) * (
        1.0 - l0 / np.sqrt((x - a) ** 2 + b * b)
    )
    return out if out.ndim else float(out)


def potential_energy(X, alpha: float, beta: float):
    X = np.asarray(X, dtype=float)
    b2 = beta * beta
    out = 0.5 * (np.sqrt((X + alpha) ** 2 + b2) - 1.0) ** 2 + 0.5 * (
        np.sqrt((X - alpha) ** 2 + b2) - 1.0
    ) ** 2
    return out if out.ndim else float(out)


def _geometric_quotient(u, b2: float):
    den = u * u + b2
    # beta = 0 and u = 0: take the limit along u != 0, which is 1
    safe = np.where(den > 0.0, den, 1.0)
    return np.where(den > 0.0, u * u / safe, 1.0)


def damping_force(X, V, alpha: float, beta: float, xi_x: float):
    """Viscous damper force projected through the V-geometry; |F_m| <= 2 xi_x |V|."""
    X = np.asarray(X, dtype=float)
    V = np.asarray(V, dtype=float)
    b2 = beta * beta
    out = xi_x * (_geometric_quotient(X + alpha, b2) + _geometric_quotient(X - alpha, b2)) * V
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class FrictionValue:
    """Friction at a given relative velocity.

    ``value`` is set for slip; ``lo``/``hi`` bound the admissible set at stick.
    """

    value: float | None = None
    lo: float | None = None
    hi: float | None = None

    @property
    def is_set_valued(self) -> bool:
        return self.value is None

    def contains(self, f: float) -> bool:
        if self.is_set_valued:
            return self.lo <= f <= self.hi
        return f == self.value


def slip_friction(Vr, mu: float, xi: float, eta: float, sign=None):
    """Slip branch mu*sgn(Vr) - xi*Vr + eta*Vr**3.

    ``sign`` overrides sgn(Vr); it is how one-sided limits at Vr = 0 are taken.
    """
    Vr = np.asarray(Vr, dtype=float)
    s = np.sign(Vr) if sign is None else sign
    out = mu * s - xi * Vr + eta * Vr * Vr * Vr
    return out if np.ndim(out) else float(out)


def stribeck_friction(Vr: float, mu: float, xi: float, eta: float) -> FrictionValue:
    if Vr == 0.0:
        return FrictionValue(lo=-mu, hi=mu)
    return FrictionValue(value=slip_friction(float(Vr), mu, xi, eta))


def relative_friction(Vr, V0: float, mu: float, xi: float, eta: float):
    """F_d(Vr) + F_d(-V0), both on the slip branch.

    At Vr = 0 the right-hand limit is used, so it vanishes only when mu = 0.
    """
    Vr = np.asarray(Vr, dtype=float)
    s = np.where(Vr >= 0.0, 1.0, -1.0)
    out = slip_friction(Vr, mu, xi, eta, sign=s) + slip_friction(-V0, mu, xi, eta, sign=-1.0)
    return out if np.ndim(out) else float(out)


def taylor_coefficients(alpha: float, beta: float) -> TaylorCoeffs:
    """Odd Taylor coefficients of the restoring force about X = 0."""
    r2 = alpha * alpha + beta * beta
    if r2 <= 0.0:
        raise ParameterError("taylor_coefficients needs alpha**2 + beta**2 > 0")
    r = math.sqrt(r2)
    a2 = alpha * alpha
    A1 = 2.0 - 2.0 / r + 2.0 * a2 / r**3
    A3 = 1.0 / r**3 - 6.0 * a2 / r**5 + 5.0 * a2 * a2 / r**7
    # alpha**2 term is 45/4; 15/4 breaks agreement with the fifth derivative
    A5 = (
        -0.75 / r**5
        + 11.25 * a2 / r**7
        - 26.25 * a2 * a2 / r**9
        + 15.75 * a2**3 / r**11
    )
    return TaylorCoeffs(A1, A3, A5)


def hamiltonian(X, V, alpha: float, beta: float):
    """Kinetic plus elastic energy of the undamped free oscillator."""
    V = np.asarray(V, dtype=float)
    out = 0.5 * V * V + potential_energy(X, alpha, beta)
    return out if np.ndim(out) else float(out)
