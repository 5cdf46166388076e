"""Event-driven simulation of the belt-driven harvester with stick-slip switching.

Slip phases are advanced with classical RK4 at a fixed step. A step whose
relative velocity changes sign is bisected until the crossing is bracketed to
``dt * 1e-6``; there the mass either sticks to the belt (the net non-friction
force is within the static limit ``mu``) or keeps slipping with the friction
sign reversed. While stuck, V is pinned to V0 and the circuit keeps evolving.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from fivharvest import _kernel
from fivharvest.model import Params, damping_force, restoring_force, slip_friction

log = logging.getLogger(__name__)


class Mode(enum.IntEnum):
    SLIP = _kernel.SLIP
    STICK = _kernel.STICK


class Transition(enum.IntEnum):
    STICK_TO_SLIP = _kernel.STICK_TO_SLIP
    SLIP_TO_STICK = _kernel.SLIP_TO_STICK


class SimulationError(RuntimeError):
    """Integration produced a non-finite state or could not resolve switching."""

    def __init__(self, message: str, last_time: float, last_state: np.ndarray):
        super().__init__(f"{message} (last good sample T={last_time:.6g}, state={last_state.tolist()})")
        self.last_time = last_time
        self.last_state = last_state


@dataclass(frozen=True)
class State:
    X: float = 0.0
    V: float = 0.0
    Q: float = 0.0
    I: float = 0.0
    mode: Mode = Mode.SLIP
    T: float = 0.0

    def vector(self) -> np.ndarray:
        return np.array([self.X, self.V, self.Q, self.I], dtype=np.float64)


@dataclass
class Trajectory:
    """Uniformly sampled solution plus the switching log.

    ``y`` has columns X, V, Q, I; ``mode`` holds 0 (slip) or 1 (stick).
    """

    t: np.ndarray
    y: np.ndarray
    mode: np.ndarray
    events: list[tuple[float, Transition]]
    params: Params
    dt: float

    @property
    def X(self) -> np.ndarray:
        return self.y[:, 0]

    @property
    def V(self) -> np.ndarray:
        return self.y[:, 1]

    @property
    def Q(self) -> np.ndarray:
        return self.y[:, 2]

    @property
    def I(self) -> np.ndarray:
        return self.y[:, 3]

    def __len__(self) -> int:
        return len(self.t)

    def state(self, i: int) -> State:
        X, V, Q, I = self.y[i]
        return State(float(X), float(V), float(Q), float(I), Mode(int(self.mode[i])), float(self.t[i]))

    def held_force(self) -> np.ndarray:
        """Force the belt contact must supply to keep V fixed, per sample."""
        p = self.params
        f = -p.theta * self.I - damping_force(self.X, self.V, p.alpha, p.beta, p.xi_x)
        f = f - restoring_force(self.X, p.alpha, p.beta)
        if p.F0 != 0.0:
            f = f + p.F0 * np.sin(p.Omega0 * self.t)
        return f


def derivative(s: State, p: Params) -> np.ndarray:
    """Rate of (X, V, Q, I) in the state's contact mode.

    In slip with V == V0 the right-hand limit of the friction is used.
    """
    out = np.empty(4)
    vr = s.V - p.V0
    sgn = 1.0 if vr >= 0.0 else -1.0
    _kernel.rate(p.as_array(), s.T, s.vector(), int(s.mode), sgn, out)
    return out


def friction_on_slip(s: State, p: Params) -> float:
    return slip_friction(s.V - p.V0, p.mu, p.xi, p.eta)


def integrate(
    p: Params,
    s0: State | None = None,
    T_end: float = 400.0,
    dt: float = 1e-3,
) -> Trajectory:
    if not dt > 0 or not T_end > 0:
        raise ValueError("dt and T_end must be positive")
    s0 = s0 or State()
    n_steps = int(round(T_end / dt))
    if n_steps < 1:
        raise ValueError("T_end must cover at least one step")
    pa = p.as_array()
    Y, modes, ev_t, ev_kind, n_ev, status, last = _kernel.integrate_kernel(
        pa, s0.vector(), int(s0.mode), float(s0.T), n_steps, float(dt), float(dt) * 1e-6
    )
    if status != _kernel.OK:
        reason = {
            _kernel.NONFINITE: "non-finite state",
            _kernel.EVENT_OVERFLOW: "event log overflow",
            _kernel.CHATTER: "unresolved stick-slip chattering",
        }[status]
        raise SimulationError(reason, s0.T + last * dt, Y[last].copy())
    t = s0.T + dt * np.arange(n_steps + 1)
    events = [(float(ev_t[i]), Transition(int(ev_kind[i]))) for i in range(n_ev)]
    return Trajectory(t=t, y=Y, mode=modes, events=events, params=p, dt=dt)


@dataclass(frozen=True)
class LimitCycle:
    period: float
    amplitude: float
    mean_X: float
    signature: tuple[float, ...]
    X_min: float
    X_max: float
    stick_fraction: float
    closure: float


@dataclass
class CycleSearch:
    """Outcome of a multi-start cycle search."""

    cycles: list[LimitCycle]
    excluded: list[tuple[tuple[float, float], str]] = field(default_factory=list)


# stick-slip cycle study: negative friction slope, no coupling, slow belt
CYCLE_PRESET = Params(gamma=1.0, theta=0.0, xi_x=0.4, xi_q=0.1, mu=0.1, xi=0.8, eta=0.1, V0=0.025)
CYCLE_CASES = {"SW": (0.0, 1.0), "DW": (0.25, 2.5), "TW": (0.5, 0.2)}


def cycle_params(case: str) -> Params:
    alpha, beta = CYCLE_CASES[case]
    return CYCLE_PRESET.with_(alpha=alpha, beta=beta)


def _section_hits(t: np.ndarray, X: np.ndarray, V: np.ndarray):
    """Local maxima of X, located where V falls through zero."""
    idx = np.nonzero((V[:-1] > 0.0) & (V[1:] <= 0.0))[0]
    if len(idx) == 0:
        return np.empty(0), np.empty(0)
    v0 = V[idx]
    v1 = V[idx + 1]
    frac = v0 / (v0 - v1)
    h = t[idx + 1] - t[idx]
    tau = frac * h
    accel = (v1 - v0) / h
    x_hit = X[idx] + v0 * tau + 0.5 * accel * tau * tau
    return t[idx] + tau, x_hit


def _minima(X: np.ndarray, V: np.ndarray) -> np.ndarray:
    idx = np.nonzero((V[:-1] < 0.0) & (V[1:] >= 0.0))[0]
    return X[idx]


def _cycle_from_window(
    t: np.ndarray,
    y: np.ndarray,
    mode: np.ndarray,
    close_tol: float,
    max_multiplicity: int,
) -> LimitCycle | None:
    X = y[:, 0]
    V = y[:, 1]
    th, xh = _section_hits(t, X, V)
    if len(xh) < 3:
        return None
    for k in range(1, max_multiplicity + 1):
        if len(xh) < 2 * k + 1:
            break
        tail = xh[-(2 * k + 1):]
        if np.all(np.abs(tail[k:] - tail[: k + 1]) < close_tol):
            t_start, t_end = th[-(k + 1)], th[-1]
            sel = (t >= t_start) & (t <= t_end)
            Xs = X[sel]
            maxima = tuple(float(v) for v in xh[-(k + 1):-1])
            minima = tuple(float(v) for v in _minima(Xs, V[sel]))
            return LimitCycle(
                period=float(t_end - t_start),
                amplitude=float(np.max(np.abs(Xs))),
                mean_X=float(np.trapezoid(Xs, t[sel]) / (t_end - t_start)),
                signature=_canonical(maxima) + _canonical(minima),
                X_min=float(Xs.min()),
                X_max=float(Xs.max()),
                stick_fraction=float(mode[sel].mean()),
                closure=float(abs(xh[-1] - xh[-(k + 1)])),
            )
    return None


def _canonical(values: tuple[float, ...]) -> tuple[float, ...]:
    if not values:
        return ()
    i = int(np.argmax(values))
    rot = values[i:] + values[:i]
    return tuple(round(v, 3) for v in rot)


def same_cycle(a: LimitCycle, b: LimitCycle, tol: float = 1e-3) -> bool:
    if len(a.signature) != len(b.signature):
        return False
    sig = all(abs(x - y) <= tol for x, y in zip(a.signature, b.signature))
    return sig and abs(a.mean_X - b.mean_X) <= tol and abs(a.X_min - b.X_min) <= tol and abs(
        a.X_max - b.X_max
    ) <= tol


def initial_grid(n: int = 5, span: float = 1.0) -> list[State]:
    """n x n grid of (X, V) starts on [-span, span]^2 with an idle circuit."""
    pts = np.linspace(-span, span, n)
    return [State(X=float(x), V=float(v)) for x in pts for v in pts]


def detect_limit_cycles(
    p: Params,
    ic_grid: list[State] | None = None,
    T_settle: float = 300.0,
    T_observe: float = 100.0,
    dt: float = 1e-3,
    close_tol: float = 1e-6,
    cluster_tol: float = 1e-3,
    max_multiplicity: int = 8,
    observer: Callable[[State, Trajectory], None] | None = None,
) -> CycleSearch:
    """Integrate every start, detect periodic recurrence, return distinct cycles.

    Starts that settle on an equilibrium or never recur are reported in
    ``excluded``. Cycles are ordered by amplitude. ``observer`` sees every
    completed trajectory.
    """
    if p.F0 != 0.0:
        raise ValueError("cycle detection requires the autonomous system (F0 = 0)")
    grid = initial_grid() if ic_grid is None else list(ic_grid)
    if not grid:
        raise ValueError("empty initial-condition grid")
    found: list[LimitCycle] = []
    excluded = []
    for s0 in grid:
        start = (s0.X, s0.V)
        try:
            traj = integrate(p, s0, T_settle + T_observe, dt)
        except SimulationError as exc:
            log.warning("start %s diverged: %s", start, exc)
            excluded.append((start, f"diverged: {exc}"))
            continue
        if observer is not None:
            observer(s0, traj)
        i0 = int(round(T_settle / dt))
        cyc = _cycle_from_window(
            traj.t[i0:], traj.y[i0:], traj.mode[i0:], close_tol, max_multiplicity
        )
        if cyc is None:
            log.info("start %s shows no periodic recurrence", start)
            excluded.append((start, "no recurrence"))
            continue
        if not any(same_cycle(cyc, c, cluster_tol) for c in found):
            found.append(cyc)
    found.sort(key=lambda c: (c.amplitude, c.mean_X))
    return CycleSearch(cycles=found, excluded=excluded)


@dataclass(frozen=True)
class SteadyStats:
    Q_rms: float
    I_rms: float
    U_rms: float
    P_avg: float
    X_amp: float
    t_start: float
    t_end: float


def _rms(x: np.ndarray) -> float:
    return float(np.sqrt(np.mean(x * x)))


def steady_state(
    traj: Trajectory,
    xi_q: float | None = None,
    n_periods: int | None = None,
    window: float | None = None,
) -> SteadyStats:
    """RMS charge/current/voltage and mean power over the final window.

    The window is ``n_periods`` forcing periods when the system is forced,
    otherwise ``window`` time units (default 50). It must lie within the
    second half of the run.
    """
    p = traj.params
    xi_q = p.xi_q if xi_q is None else xi_q
    span = traj.t[-1] - traj.t[0]
    if p.F0 != 0.0 and p.Omega0 > 0.0 and window is None:
        period = 2.0 * math.pi / p.Omega0
        n = n_periods if n_periods is not None else max(1, int((0.5 * span) // period))
        length = n * period
        min_len = period
    else:
        length = 50.0 if window is None else window
        min_len = length
    if length > 0.5 * span + 1e-9 or len(traj) < 2:
        raise ValueError(f"analysis window {length:g} does not fit in the second half of a {span:g} run")
    if length < min_len or length < traj.dt:
        raise ValueError("analysis window shorter than one period")
    n_win = int(round(length / traj.dt))
    sl = slice(len(traj) - n_win - 1, len(traj))
    # drop the duplicated end point so the window spans whole periods
    Q = traj.Q[sl][:-1]
    I = traj.I[sl][:-1]
    X = traj.X[sl]
    U, P = electrical_series(I, xi_q)
    return SteadyStats(
        Q_rms=_rms(Q),
        I_rms=_rms(I),
        U_rms=_rms(U),
        P_avg=float(np.mean(P)),
        X_amp=float(0.5 * (X.max() - X.min())),
        t_start=float(traj.t[sl.start]),
        t_end=float(traj.t[-1]),
    )


def electrical_series(I: np.ndarray, xi_q: float) -> tuple[np.ndarray, np.ndarray]:
    """Load voltage xi_q*I and dissipated power xi_q*I**2."""
    I = np.asarray(I, dtype=float)
    return xi_q * I, xi_q * I * I
