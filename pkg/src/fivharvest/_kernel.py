"""Compiled stick-slip RK4 kernel.

Parameter vector layout follows ``Params.as_array``:
alpha, beta, gamma, theta, xi_x, xi_q, mu, xi, eta, V0, F0, Omega0.
"""

import math

import numpy as np
from numba import njit

SLIP = 0
STICK = 1

STICK_TO_SLIP = 0
SLIP_TO_STICK = 1

OK = 0
NONFINITE = 1
EVENT_OVERFLOW = 2
CHATTER = 3

_MAX_EVENTS_PER_STEP = 32


@njit(cache=True)
def _spring(X, alpha, beta):
    b2 = beta * beta
    return _spring_term(X + alpha, b2) + _spring_term(X - alpha, b2)


@njit(cache=True)
def _spring_term(u, b2):
    r = math.sqrt(u * u + b2)
    if r > 0.0:
        return u - u / r
    return 0.0


@njit(cache=True)
def _quot(u, b2):
    den = u * u + b2
    if den > 0.0:
        return u * u / den
    return 1.0


@njit(cache=True)
def _damper(X, V, alpha, beta, xi_x):
    b2 = beta * beta
    return xi_x * (_quot(X + alpha, b2) + _quot(X - alpha, b2)) * V


@njit(cache=True)
def held_force(p, t, X, V, I):
    """Net non-friction force on the mass; friction must cancel it to hold V."""
    alpha, beta, theta, xi_x = p[0], p[1], p[3], p[4]
    F0, Om = p[10], p[11]
    f = -theta * I - _damper(X, V, alpha, beta, xi_x) - _spring(X, alpha, beta)
    if F0 != 0.0:
        f += F0 * math.sin(Om * t)
    return f


@njit(cache=True)
def rate(p, t, y, mode, sgn, out):
    gamma, theta, xi_q = p[2], p[3], p[5]
    mu, xi, eta, V0 = p[6], p[7], p[8], p[9]
    X, V, Q, I = y[0], y[1], y[2], y[3]
    if mode == STICK:
        out[0] = V0
        out[1] = 0.0
        V = V0
    else:
        vr = V - V0
        out[0] = V
        out[1] = held_force(p, t, X, V, I) - (mu * sgn - xi * vr + eta * vr * vr * vr)
    out[2] = I
    out[3] = (-xi_q * I - theta * V - Q) / gamma


@njit(cache=True)
def rk4_step(p, t, y, h, mode, sgn, k1, k2, k3, k4, tmp, out, inc):
    rate(p, t, y, mode, sgn, k1)
    for j in range(4):
        tmp[j] = y[j] + 0.5 * h * k1[j]
    rate(p, t + 0.5 * h, tmp, mode, sgn, k2)
    for j in range(4):
        tmp[j] = y[j] + 0.5 * h * k2[j]
    rate(p, t + 0.5 * h, tmp, mode, sgn, k3)
    for j in range(4):
        tmp[j] = y[j] + h * k3[j]
    rate(p, t + h, tmp, mode, sgn, k4)
    for j in range(4):
        inc[j] = h * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]) / 6.0
        out[j] = y[j] + inc[j]
    if mode == STICK:
        out[1] = p[9]
        inc[1] = 0.0


@njit(cache=True)
def _accept(y, inc, comp):
    """Kahan-compensated y += inc; keeps long fixed-step runs at rounding level."""
    for j in range(4):
        z = inc[j] - comp[j]
        s = y[j] + z
        comp[j] = (s - y[j]) - z
        y[j] = s


@njit(cache=True)
def _jump(y, trial, comp):
    for j in range(4):
        y[j] = trial[j]
        comp[j] = 0.0


@njit(cache=True)
def _finite(y):
    for j in range(4):
        if not math.isfinite(y[j]):
            return False
    return True


@njit(cache=True)
def integrate_kernel(p, y0, mode0, t0, n_steps, dt, loc_tol):
    """Fixed-step integration with localized stick/slip switching.

    Returns (Y, modes, ev_t, ev_kind, n_ev, status, last_index).
    """
    mu, V0 = p[6], p[9]
    nonsmooth = mu > 0.0

    Y = np.empty((n_steps + 1, 4))
    modes = np.empty(n_steps + 1, dtype=np.int8)
    cap = 2 * n_steps + 64
    ev_t = np.empty(cap)
    ev_kind = np.empty(cap, dtype=np.int8)
    n_ev = 0

    k1 = np.empty(4)
    k2 = np.empty(4)
    k3 = np.empty(4)
    k4 = np.empty(4)
    tmp = np.empty(4)
    trial = np.empty(4)
    inc = np.empty(4)
    comp = np.zeros(4)
    y = np.empty(4)
    for j in range(4):
        y[j] = y0[j]

    mode = mode0
    if mode == STICK:
        y[1] = V0
    vr = y[1] - V0
    if vr > 0.0:
        sgn = 1.0
    elif vr < 0.0:
        sgn = -1.0
    else:
        f = held_force(p, t0, y[0], V0, y[3])
        if nonsmooth and abs(f) <= mu and mode0 == STICK:
            sgn = 0.0
        else:
            sgn = 1.0 if f >= 0.0 else -1.0
    if not nonsmooth:
        mode = SLIP

    for j in range(4):
        Y[0, j] = y[j]
    modes[0] = mode

    for n in range(n_steps):
        t = t0 + n * dt
        h_rem = dt
        n_sub = 0
        while h_rem > 0.0:
            n_sub += 1
            if n_sub > _MAX_EVENTS_PER_STEP:
                return Y, modes, ev_t, ev_kind, n_ev, CHATTER, n
            if mode == SLIP:
                rk4_step(p, t, y, h_rem, SLIP, sgn, k1, k2, k3, k4, tmp, trial, inc)
                if not nonsmooth or (trial[1] - V0) * sgn > 0.0:
                    _accept(y, inc, comp)
                    t += h_rem
                    h_rem = 0.0
                    break
                lo = 0.0
                hi = h_rem
                while hi - lo > loc_tol:
                    mid = 0.5 * (lo + hi)
                    rk4_step(p, t, y, mid, SLIP, sgn, k1, k2, k3, k4, tmp, trial, inc)
                    if (trial[1] - V0) * sgn > 0.0:
                        lo = mid
                    else:
                        hi = mid
                rk4_step(p, t, y, hi, SLIP, sgn, k1, k2, k3, k4, tmp, trial, inc)
                _jump(y, trial, comp)
                y[1] = V0
                t += hi
                h_rem -= hi
                f = held_force(p, t, y[0], V0, y[3])
                if abs(f) <= mu:
                    mode = STICK
                    if n_ev >= cap:
                        return Y, modes, ev_t, ev_kind, n_ev, EVENT_OVERFLOW, n
                    ev_t[n_ev] = t
                    ev_kind[n_ev] = SLIP_TO_STICK
                    n_ev += 1
                else:
                    sgn = 1.0 if f > 0.0 else -1.0
            else:
                rk4_step(p, t, y, h_rem, STICK, 0.0, k1, k2, k3, k4, tmp, trial, inc)
                f = held_force(p, t + h_rem, trial[0], V0, trial[3])
                if abs(f) <= mu:
                    _accept(y, inc, comp)
                    y[1] = V0
                    t += h_rem
                    h_rem = 0.0
                    break
                lo = 0.0
                hi = h_rem
                while hi - lo > loc_tol:
                    mid = 0.5 * (lo + hi)
                    rk4_step(p, t, y, mid, STICK, 0.0, k1, k2, k3, k4, tmp, trial, inc)
                    if abs(held_force(p, t + mid, trial[0], V0, trial[3])) <= mu:
                        lo = mid
                    else:
                        hi = mid
                rk4_step(p, t, y, hi, STICK, 0.0, k1, k2, k3, k4, tmp, trial, inc)
                _jump(y, trial, comp)
                t += hi
                h_rem -= hi
                f = held_force(p, t, y[0], V0, y[3])
                sgn = 1.0 if f > 0.0 else -1.0
                mode = SLIP
                if n_ev >= cap:
                    return Y, modes, ev_t, ev_kind, n_ev, EVENT_OVERFLOW, n
                ev_t[n_ev] = t
                ev_kind[n_ev] = STICK_TO_SLIP
                n_ev += 1
        if not _finite(y):
            return Y, modes, ev_t, ev_kind, n_ev, NONFINITE, n
        for j in range(4):
            Y[n + 1, j] = y[j]
        modes[n + 1] = mode

    return Y, modes, ev_t, ev_kind, n_ev, OK, n_steps
