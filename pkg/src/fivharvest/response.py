"""Single-harmonic amplitude-frequency curves and electrical-output sweeps."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

from fivharvest.dynamics import (
    SimulationError,
    State,
    SteadyStats,
    Trajectory,
    electrical_series,
    integrate,
    steady_state,
)
from fivharvest.model import Params, TaylorCoeffs, taylor_coefficients

log = logging.getLogger(__name__)

VERBATIM = "verbatim"
CORRECTED = "corrected"
REAL_PART = "RealPart"
IMAG_PART = "ImagPart"


class HBCoefficients(NamedTuple):
    a1: float
    a2: float
    a3: float
    a4: float
    a5: float


def hb_coefficients(A_X, Omega, p: Params, tc: TaylorCoeffs, mode: str = VERBATIM) -> HBCoefficients:
    """Entries of the 2x2 complex determinant [[a1 + i a2, i a3], [i a3, a4 + i a5]].

    ``verbatim`` uses the polynomial stiffness and cubic friction with unit
    harmonic factors. ``corrected`` applies the first-harmonic averaging
    factors 3/4 and 5/8 to the nonlinear terms.
    """
    A2 = np.square(A_X)
    a3 = -Omega * p.theta
    a4 = 1.0 - p.gamma * Omega**2
    if mode == VERBATIM:
        a1 = tc.A1 + tc.A3 * A2 + tc.A5 * A2 * A2 - Omega**2
        a2 = Omega * (p.xi - p.eta * A2)
    elif mode == CORRECTED:
        a1 = tc.A1 + 0.75 * tc.A3 * A2 + 0.625 * tc.A5 * A2 * A2 - Omega**2
        a2 = Omega * (p.xi - 0.75 * p.eta * Omega**2 * A2)
    else:
        raise ValueError(f"unknown harmonic-balance mode {mode!r}")
    a5 = Omega * np.ones_like(A2) if np.ndim(A2) else Omega
    return HBCoefficients(a1, a2, a3, a4, a5)


def real_residual(c: HBCoefficients):
    return c.a1 * c.a4 - c.a2 * c.a5 + c.a3 * c.a3


def imag_residual(c: HBCoefficients):
    return c.a1 * c.a5 + c.a2 * c.a4


def hb_residual(A_X, Omega, p: Params, tc: TaylorCoeffs, source: str = REAL_PART, mode: str = VERBATIM):
    c = hb_coefficients(A_X, Omega, p, tc, mode)
    if source == REAL_PART:
        return real_residual(c)
    if source == IMAG_PART:
        return imag_residual(c)
    raise ValueError(f"unknown residual source {source!r}")


def amplitude_roots(
    Omega: float,
    p: Params,
    tc: TaylorCoeffs,
    source: str = REAL_PART,
    mode: str = VERBATIM,
    A_max: float = 5.0,
    n_scan: int = 2048,
) -> list[float]:
    """All amplitudes in (0, A_max] where the residual changes sign at this Omega."""

    def f(a):
        return hb_residual(a, Omega, p, tc, source, mode)

    grid = np.linspace(0.0, A_max, n_scan)
    vals = f(grid)
    roots = []
    for i in range(n_scan - 1):
        lo, hi = vals[i], vals[i + 1]
        if hi == 0.0 and i + 1 < n_scan - 1:
            continue
        if lo == 0.0:
            if i > 0:
                roots.append(float(grid[i]))
            continue
        if lo * hi < 0.0:
            roots.append(float(brentq(f, grid[i], grid[i + 1], xtol=1e-14, rtol=1e-15, maxiter=200)))
    if vals[-1] == 0.0:
        roots.append(float(grid[-1]))
    return roots


@dataclass
class AmplitudeCurve:
    """Points (Omega, A_X, branch) of one residual's zero set."""

    source: str
    mode: str
    points: np.ndarray = field(default_factory=lambda: np.empty((0, 3)))

    @property
    def Omega(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def A_X(self) -> np.ndarray:
        return self.points[:, 1]

    @property
    def branch(self) -> np.ndarray:
        return self.points[:, 2].astype(int)

    def roots_at(self, Omega: float) -> np.ndarray:
        return np.sort(self.A_X[self.Omega == Omega])

    def branches(self) -> dict[int, np.ndarray]:
        return {int(b): self.points[self.branch == b, :2] for b in np.unique(self.branch)}


def _chain(columns: list[tuple[float, list[float]]]) -> np.ndarray:
    """Link roots across consecutive frequencies into branches.

    Greedy nearest-neighbour matching in A_X; ties go to the smaller jump.
    """
    rows = []
    active: dict[int, float] = {}
    next_id = 0
    for Om, roots in columns:
        pairs = sorted(
            (abs(r - a_prev), j, bid) for j, r in enumerate(roots) for bid, a_prev in active.items()
        )
        taken_roots: set[int] = set()
        taken_branches: set[int] = set()
        assignment: dict[int, int] = {}
        for _, j, bid in pairs:
            if j in taken_roots or bid in taken_branches:
                continue
            assignment[j] = bid
            taken_roots.add(j)
            taken_branches.add(bid)
        new_active = {}
        for j, r in enumerate(roots):
            bid = assignment.get(j)
            if bid is None:
                bid = next_id
                next_id += 1
            new_active[bid] = r
            rows.append((Om, r, bid))
        active = new_active
    return np.array(rows, dtype=float).reshape(-1, 3)


def amplitude_curve(
    p: Params,
    tc: TaylorCoeffs | None = None,
    Omega_range: tuple[float, float] = (0.05, 5.0),
    grid_n: int = 200,
    source: str = REAL_PART,
    mode: str = VERBATIM,
    A_max: float = 5.0,
    n_scan: int = 2048,
) -> AmplitudeCurve:
    lo, hi = Omega_range
    if not 0.0 < lo < hi:
        raise ValueError("Omega range must be positive and increasing")
    if grid_n < 64:
        raise ValueError("grid_n must be >= 64")
    tc = tc or taylor_coefficients(p.alpha, p.beta)
    columns = []
    for Om in np.linspace(lo, hi, grid_n):
        columns.append((float(Om), amplitude_roots(float(Om), p, tc, source, mode, A_max, n_scan)))
    return AmplitudeCurve(source=source, mode=mode, points=_chain(columns))


# --- electrical output sweeps -------------------------------------------------------

CASES: dict[str, tuple[float, float]] = {
    "QZS3": (0.0, 1.0),
    "QZS5": (0.25, 0.72),
    "BS": (0.25, 0.5),
    "TS": (0.5, 0.25),
}
SWEEPABLE = ("V0", "theta", "xi_x", "xi_q")


@dataclass(frozen=True)
class SimConfig:
    T_end: float = 400.0
    dt: float = 1e-3
    window: float = 100.0


@dataclass
class SweepRow:
    value: float
    stats: SteadyStats | None
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.stats is None


@dataclass
class SweepResult:
    varied: str
    case: str
    rows: list[SweepRow]

    def metric(self, name: str) -> np.ndarray:
        return np.array([getattr(r.stats, name) if r.stats else np.nan for r in self.rows])

    @property
    def values(self) -> np.ndarray:
        return np.array([r.value for r in self.rows])


def electrical_outputs(traj: Trajectory, xi_q: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Voltage and power time series across the load."""
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    xi_q = traj.params.xi_q if xi_q is None else xi_q
    return electrical_series(traj.I, xi_q)


def run_point(p: Params, sim: SimConfig) -> SteadyStats:
    traj = integrate(p, State(), sim.T_end, sim.dt)
    return steady_state(traj, p.xi_q, window=sim.window if p.F0 == 0.0 else None)


def sweep(
    base: Params,
    varied: str,
    value_range: tuple[float, float] = (0.0, 1.0),
    steps: int = 20,
    cases: dict[str, tuple[float, float]] | None = None,
    sim: SimConfig | None = None,
) -> list[SweepResult]:
    """Steady electrical metrics versus one parameter, for each geometry case.

    Every run starts from rest with an idle circuit. ``steps`` is the number of
    parameter values, spaced evenly over ``value_range``.
    """
    if varied not in SWEEPABLE:
        raise ValueError(f"cannot sweep {varied!r}; choose from {SWEEPABLE}")
    if steps < 2:
        raise ValueError("steps must be >= 2")
    cases = CASES if cases is None else cases
    sim = sim or SimConfig()
    values = np.linspace(value_range[0], value_range[1], steps)
    results = []
    for name, (alpha, beta) in cases.items():
        rows = []
        for v in values:
            p = base.with_(alpha=alpha, beta=beta, **{varied: float(v)})
            try:
                rows.append(SweepRow(float(v), run_point(p, sim)))
            except (SimulationError, ValueError) as exc:
                log.warning("sweep %s %s=%g failed: %s", name, varied, v, exc)
                rows.append(SweepRow(float(v), None, str(exc)))
        results.append(SweepResult(varied=varied, case=name, rows=rows))
    return results
