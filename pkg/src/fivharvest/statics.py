"""Equilibria, well topology and bifurcation sets of the V-spring restoring force."""

from __future__ import annotations

import enum
import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from fivharvest.model import (
    ParameterError,
    hamiltonian,
    restoring_force,
    restoring_stiffness,
    slip_friction,
    taylor_coefficients,
)

log = logging.getLogger(__name__)

ALPHA_O = 4.0 * math.sqrt(5.0) / 25.0
BETA_O = 8.0 * math.sqrt(5.0) / 25.0

TOL_QZS = 1e-6
_ROOT_RESIDUAL = 1e-10
_DEDUP = 1e-8
_SCAN_POINTS = 4096


class Stability(str, enum.Enum):
    CENTER = "Center"
    SADDLE = "Saddle"


@dataclass(frozen=True)
class Equilibrium:
    X_star: float
    stability: Stability
    local_stiffness: float
    degenerate: bool = False


class EquilibriumCountWarning(UserWarning):
    """Root count outside {1, 3, 5}; usually a parameter point sitting on a fold."""


def _scan_roots(f, x_lo: float, x_hi: float, n: int) -> list[tuple[float, int]]:
    """Bracket sign changes of f on an n-point grid and polish each one.

    Returns (root, direction) pairs; direction is +1 where f increases.
    """
    grid = np.linspace(x_lo, x_hi, n)
    vals = f(grid)
    out = []
    for i in range(n - 1):
        a, b = vals[i], vals[i + 1]
        if a == 0.0:
            out.append((float(grid[i]), 1 if b > 0 else -1))
        elif a * b < 0.0:
            r = brentq(f, grid[i], grid[i + 1], xtol=1e-15, rtol=1e-15, maxiter=200)
            out.append((float(r), 1 if b > a else -1))
    if vals[-1] == 0.0:
        out.append((float(grid[-1]), 1 if vals[-2] < 0 else -1))
    return out


def _classify(x: float, direction: int, alpha: float, beta: float) -> Equilibrium:
    k = float(restoring_stiffness(x, alpha, beta))
    stab = Stability.CENTER if direction > 0 else Stability.SADDLE
    return Equilibrium(X_star=x, stability=stab, local_stiffness=k, degenerate=abs(k) < 1e-9)


def find_equilibria(alpha: float, beta: float, X_max: float = 3.0) -> list[Equilibrium]:
    """All zeros of the restoring force on [-X_max, X_max], sorted by position.

    Positive roots are found by bracketing and mirrored, so the set is exactly
    symmetric. Sign changes across the jumps of the beta = 0 force are not roots
    and are dropped.
    """
    if X_max <= 0:
        raise ValueError("X_max must be > 0")
    if alpha == 0 and beta == 0:
        raise ParameterError("degenerate spring geometry: alpha = beta = 0")

    def f(x):
        return restoring_force(x, alpha, beta)

    # the origin is always a root; its type comes from the first nonzero odd coefficient
    k0 = float(restoring_stiffness(0.0, alpha, beta))
    if abs(k0) > 1e-12:
        d0 = 1 if k0 > 0 else -1
    else:
        tc = taylor_coefficients(alpha, beta)
        lead = tc.A3 if abs(tc.A3) > 1e-12 else tc.A5
        d0 = 1 if lead > 0 else -1

    h = X_max / (_SCAN_POINTS // 2)
    candidates = _scan_roots(f, h, X_max, _SCAN_POINTS // 2)
    if d0 * f(h) < 0.0:
        # a root between the origin and the first grid node
        x_in = h
        while d0 * f(x_in) < 0.0 and x_in > 1e-7:
            x_in *= 0.25
        if d0 * f(x_in) > 0.0:
            r = brentq(f, x_in, h, xtol=1e-15, rtol=1e-15, maxiter=200)
            candidates.insert(0, (float(r), -d0))

    positive = []
    for x, d in candidates:
        if abs(f(x)) > _ROOT_RESIDUAL or x < _DEDUP:
            continue
        if positive and abs(x - positive[-1][0]) < _DEDUP:
            continue
        positive.append((x, d))

    eqs = [_classify(0.0, d0, alpha, beta)]
    for x, d in positive:
        e = _classify(x, d, alpha, beta)
        eqs.append(e)
        eqs.insert(0, Equilibrium(-e.X_star, e.stability, e.local_stiffness, e.degenerate))
    if len(eqs) not in (1, 3, 5):
        warnings.warn(
            f"{len(eqs)} equilibria at alpha={alpha!r}, beta={beta!r}",
            EquilibriumCountWarning,
            stacklevel=2,
        )
    return eqs


def equilibrium_surface(alphas, betas, X_max: float = 3.0) -> np.ndarray:
    """Point cloud (X, alpha, beta) of the zero set of the restoring force."""
    rows = []
    for a in np.atleast_1d(alphas):
        for b in np.atleast_1d(betas):
            if a == 0 and b == 0:
                continue
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", EquilibriumCountWarning)
                for e in find_equilibria(float(a), float(b), X_max):
                    rows.append((e.X_star, float(a), float(b)))
    return np.array(rows).reshape(-1, 3)


class WellLabel(str, enum.Enum):
    SW = "SW"
    QZS3 = "QZS3"
    QZS5 = "QZS5"
    DW = "DW"
    TW = "TW"


@dataclass(frozen=True)
class WellTopology:
    label: WellLabel
    equilibrium_count: int


def classify_wells(alpha: float, beta: float, tol_qzs: float = TOL_QZS) -> WellTopology:
    eqs = find_equilibria(alpha, beta)
    n = len(eqs)
    if n == 3:
        return WellTopology(WellLabel.DW, 3)
    if n == 5:
        return WellTopology(WellLabel.TW, 5)
    tc = taylor_coefficients(alpha, beta)
    if abs(tc.A1) < tol_qzs:
        label = WellLabel.QZS5 if abs(tc.A3) < tol_qzs else WellLabel.QZS3
    else:
        label = WellLabel.SW
    return WellTopology(label, n)


# --- geometric bifurcation sets -------------------------------------------------


@dataclass(frozen=True)
class BifurcationCurve:
    """Points of one named set; ``X_c`` is the critical displacement per point."""

    name: str
    points: np.ndarray
    X_c: np.ndarray

    def residuals(self) -> np.ndarray:
        a, b = self.points[:, 0], self.points[:, 1]
        return np.array(
            [
                abs(restoring_force(x, ai, bi)) + abs(restoring_stiffness(x, ai, bi))
                for x, ai, bi in zip(self.X_c, a, b)
            ]
        )


def pitchfork_alpha(beta: float) -> float:
    """alpha >= 0 where the linear stiffness A1 vanishes, for 0 < beta <= 1."""
    if not 0.0 < beta <= 1.0:
        raise ValueError("pitchfork set exists for 0 < beta <= 1")

    def a1(a):
        return taylor_coefficients(a, beta).A1

    if a1(0.0) >= 0.0:
        return 0.0
    return float(brentq(a1, 0.0, 1.0, xtol=1e-16, rtol=1e-15, maxiter=200))


def _fold_system(z, xc):
    a, b = z
    return np.array([restoring_force(xc, a, b), restoring_stiffness(xc, a, b)])


def _fold_jacobian(z, xc, h=1e-7):
    J = np.empty((2, 2))
    for j in range(2):
        dz = np.zeros(2)
        dz[j] = h
        J[:, j] = (_fold_system(z + dz, xc) - _fold_system(z - dz, xc)) / (2 * h)
    return J


def _damped_newton(z, xc, tol=1e-13, max_iter=60):
    r = _fold_system(z, xc)
    for _ in range(max_iter):
        if np.abs(r).sum() < tol:
            return z, True
        try:
            step = np.linalg.solve(_fold_jacobian(z, xc), r)
        except np.linalg.LinAlgError:
            return z, False
        lam = 1.0
        while lam > 1e-8:
            cand = z - lam * step
            if cand[0] >= 0 and cand[1] > 0:
                rc = _fold_system(cand, xc)
                if np.abs(rc).sum() < np.abs(r).sum():
                    z, r = cand, rc
                    break
            lam *= 0.5
        else:
            return z, False
    return z, bool(np.abs(r).sum() < 1e-8)


def trace_geometric_bifurcation_sets(resolution: int = 64) -> list[BifurcationCurve]:
    """Trace B_B, B_H (pitchfork, X_c = 0) and B_D (fold of the outer roots).

    The pitchfork branch is solved point-by-point in beta. The fold branch is
    continued in the critical displacement X_c from point O towards (1, 0)
    with damped Newton on {F_s = 0, dF_s/dX = 0}; points that fail to converge
    are skipped.
    """
    if resolution < 16:
        raise ValueError("resolution must be >= 16")
    s = np.linspace(0.0, 1.0, resolution)

    bb_beta = BETA_O + (1.0 - BETA_O) * s
    bh_beta = BETA_O * (1.0 - s * (1.0 - 1e-3))
    curves = []
    for name, betas in (("B_B", bb_beta), ("B_H", bh_beta)):
        pts = np.array([(pitchfork_alpha(b), b) for b in betas])
        curves.append(BifurcationCurve(name, pts, np.zeros(len(pts))))

    pts = [(ALPHA_O, BETA_O)]
    xcs = [0.0]
    z = np.array([ALPHA_O, BETA_O])
    for xc in (1.0 - 1e-3) * s[1:]:
        z_new, ok = _damped_newton(z.copy(), xc)
        if not ok:
            log.warning("fold continuation failed at X_c=%.6g; point skipped", xc)
            continue
        z = z_new
        pts.append((z[0], z[1]))
        xcs.append(xc)
    curves.append(BifurcationCurve("B_D", np.array(pts), np.array(xcs)))
    return curves


# --- polynomial (A1, A3, A5) regions ------------------------------------------------


def polynomial_region(A1: float, A3: float, A5: float, tol: float = 1e-12) -> str:
    """Region of the quintic force A1 X + A3 X^3 + A5 X^5.

    A5 > 0: I (one root), II (three, origin a saddle), III (five, three wells).
    A5 < 0: IV (three, origin a center), V (one, origin a saddle),
    VI (five, two wells). Boundary points return ``on-set(<name>)``.
    """
    if A5 == 0:
        raise ValueError("A5 = 0: quintic regions are undefined")
    suffix = "1" if A5 > 0 else "2"
    disc = A3 * A3 - 4.0 * A1 * A5
    scale = max(A3 * A3, abs(4.0 * A1 * A5), 1e-300)
    if abs(A1) <= tol:
        if A3 < 0:
            return f"on-set(B_B{suffix})"
        if A3 > 0:
            return f"on-set(B_H{suffix})"
        return "on-set(O)"
    if abs(disc) <= tol * scale and A1 * A5 > 0 and A3 * A5 < 0:
        return f"on-set(B_D{suffix})"
    two_positive = A1 * A5 > 0 and A3 * A5 < 0 and disc > 0
    if A5 > 0:
        if A1 < 0:
            return "II"
        return "III" if two_positive else "I"
    if A1 > 0:
        return "IV"
    return "VI" if two_positive else "V"


def quintic_root_count(A1: float, A3: float, A5: float) -> int:
    """Distinct real roots of A1 X + A3 X^3 + A5 X^5, by polynomial eigenvalues."""
    roots = np.roots([A5, 0.0, A3, 0.0, A1, 0.0])
    real = np.sort(roots[np.abs(roots.imag) < 1e-9].real)
    distinct = [r for i, r in enumerate(real) if i == 0 or r - real[i - 1] > 1e-9]
    return len(distinct)


# --- codimension-two limit-cycle sets ------------------------------------------------

CODIM2_LINES = (("B_h", 1.0), ("B_sc", 0.8), ("B_po", 0.752))


def codim2_region(
    value: float,
    xi: float,
    plane: str = "A1",
    alpha: float = 0.0,
    eta: float = 1.0,
    tol: float = 1e-12,
) -> str:
    """Region of (A1, xi) or (beta, xi) relative to the Hopf, saddle-connection
    and periodic-orbit lines xi = c*A1 with c = 1, 0.8, 0.752.

    Regions I-IV run top to bottom in xi. In the beta plane A1 is the linear
    stiffness at (alpha, beta); ``eta`` does not move the lines.
    """
    if plane == "A1":
        A1 = value
    elif plane == "beta":
        A1 = taylor_coefficients(alpha, value).A1
    else:
        raise ValueError("plane must be 'A1' or 'beta'")
    lines = sorted(((c * A1, name) for name, c in CODIM2_LINES), reverse=True)
    for level, name in lines:
        if abs(xi - level) <= tol * max(1.0, abs(A1)):
            return f"on-set({name})"
    for label, (level, _) in zip(("I", "II", "III"), lines):
        if xi > level:
            return label
    return "IV"


# --- equilibrium under belt drag -------------------------------------------------------


def belt_drag(V0: float, mu: float, xi: float, eta: float) -> float:
    """Friction at rest against the belt, F_d(-V0), on the left slip branch."""
    return slip_friction(-V0, mu, xi, eta, sign=-1.0)


def shifted_equilibrium(
    alpha: float,
    beta: float,
    V0: float,
    mu: float,
    xi: float,
    eta: float,
    X_max: float = 3.0,
) -> list[Equilibrium]:
    """Rest positions where the spring balances the belt drag: F_s(X) = -F_d(-V0)."""
    target = -belt_drag(V0, mu, xi, eta)

    def g(x):
        return restoring_force(x, alpha, beta) - target

    eqs = []
    for x, d in _scan_roots(g, -X_max, X_max, 2 * _SCAN_POINTS):
        if abs(g(x)) > _ROOT_RESIDUAL:
            continue
        if eqs and abs(x - eqs[-1].X_star) < _DEDUP:
            continue
        eqs.append(_classify(x, d, alpha, beta))
    if not eqs:
        raise ValueError(f"no rest position in [-{X_max}, {X_max}]")
    return eqs


# --- phase portraits -----------------------------------------------------------------


def portrait_grid(alpha: float, beta: float, X_lim: float = 2.0, V_lim: float = 1.5, n: int = 101):
    """Hamiltonian sampled on an (X, V) grid; its level sets are the free orbits."""
    X, V = np.meshgrid(np.linspace(-X_lim, X_lim, n), np.linspace(-V_lim, V_lim, n), indexing="ij")
    return X, V, hamiltonian(X, V, alpha, beta)
