"""Shared oracles for the test suite."""

import math

import numpy as np

from fivharvest.statics import BETA_O, trace_geometric_bifurcation_sets


def pitchfork_alpha_closed(beta):
    # A1 = 0 with r = sqrt(alpha^2 + beta^2): r^3 = beta^2, alpha = r*sqrt(1 - r)
    r = beta ** (2.0 / 3.0)
    return r * math.sqrt(1.0 - r)


def fold_alpha_of_beta():
    """alpha on B_D as a function of beta (B_D is monotone), by interpolation."""
    fold = {c.name: c for c in trace_geometric_bifurcation_sets(64)}["B_D"].points
    order = np.argsort(fold[:, 1])
    bs, als = fold[order, 1], fold[order, 0]
    return lambda b: float(np.interp(b, bs, als))


def sample_regions(n=20, seed=7):
    """n points strictly inside each of the mono/bi/tri-stable regions of the (alpha, beta) plane."""
    rng = np.random.default_rng(seed)
    alpha_d = fold_alpha_of_beta()
    out = {"I": [], "II": [], "III": []}
    while len(out["II"]) < n:
        b = rng.uniform(0.02, 0.98)
        out["II"].append((rng.uniform(0.0, 0.95) * pitchfork_alpha_closed(b), b))
    while len(out["III"]) < n:
        b = rng.uniform(0.02, BETA_O - 0.02)
        lo, hi = pitchfork_alpha_closed(b), alpha_d(b)
        w = hi - lo
        if w <= 0:
            continue
        out["III"].append((rng.uniform(lo + 0.1 * w, hi - 0.1 * w), b))
    while len(out["I"]) < n:
        b = rng.uniform(0.02, 2.5)
        a = rng.uniform(0.0, 2.0)
        if b < 1.0:
            edge = alpha_d(b) if b < BETA_O else pitchfork_alpha_closed(b)
            if a < 1.05 * edge + 0.01:
                continue
        elif b < 1.02:
            continue
        out["I"].append((a, b))
    return out


def dense_root_count(f, lo, hi, n=100_000):
    """Sign changes of f on a dense grid; exact zeros count once."""
    x = np.linspace(lo, hi, n)
    s = np.sign(f(x))
    nz = s[s != 0]
    return int(np.count_nonzero(nz[1:] != nz[:-1])) + int(np.count_nonzero(s == 0))
