"""Shared oracle helpers for the test suite.

Everything here is deliberately independent of the library's computation
paths: brute-force grids, vertex enumeration, quadrature, and direct sums.
"""

import itertools

import numpy as np
import pytest
from scipy.integrate import quad

from ssmd.gaussian import rng_from_seed


@pytest.fixture
def rng():
    return rng_from_seed(20240817)


def feasible_grid(cap, budget, n, pts_per_axis):
    """All points of a regular [0, cap]^n grid satisfying the budget."""
    axis = np.linspace(0.0, cap, pts_per_axis)
    mesh = np.meshgrid(*([axis] * n), indexing="ij")
    grid = np.stack([m.ravel() for m in mesh], axis=1)
    return grid[grid.sum(axis=1) <= budget + 1e-12]


def grid_argmin_distance(grid, x):
    """The grid point closest to x and its distance."""
    d2 = np.sum((grid - x) ** 2, axis=1)
    i = int(np.argmin(d2))
    return grid[i], float(np.sqrt(d2[i]))


def capped_box_vertices(cap, budget, n):
    """All vertices of {0 <= x_i <= cap, sum x <= budget} by enumeration.

    A vertex has every coordinate at 0 or cap, except possibly one
    fractional coordinate on the active budget face.
    """
    verts = []
    for pattern in itertools.product((0.0, cap), repeat=n):
        v = np.array(pattern)
        if v.sum() <= budget + 1e-12:
            verts.append(v)
    q = int(np.floor(budget / cap + 1e-12))
    r = budget - q * cap
    if r > 1e-12 and q < n:
        for support in itertools.combinations(range(n), q + 1):
            for frac_pos in support:
                v = np.zeros(n)
                for i in support:
                    v[i] = cap
                v[frac_pos] = r
                verts.append(v)
    return np.array(verts)


def max_pairwise_sq_distance(points):
    d2 = 0.0
    for i in range(len(points)):
        diff = points[i + 1:] - points[i]
        if len(diff):
            d2 = max(d2, float(np.max(np.sum(diff * diff, axis=1))))
    return d2


def piecewise_gaussian_quadrature(intercepts, slopes, breakpoints, mu, sigma):
    """Adaptive quadrature of E[max_j (c_j + d_j S)] for S ~ N(mu, sigma^2)."""
    def integrand(t):
        z = (t - mu) / sigma
        dens = np.exp(-0.5 * z * z) / (sigma * np.sqrt(2.0 * np.pi))
        return np.max(intercepts + slopes * t) * dens

    pts = [mu + sigma * s for s in (-12, 12)]
    inner = [b for b in breakpoints if pts[0] < b < pts[1]]
    val, err = quad(integrand, pts[0], pts[1], points=inner, limit=400)
    return val, err


def kkt_residual_capped_box(cap, budget, x, p):
    """Max KKT violation of p as the projection of x onto the capped box."""
    interior = (p > 1e-9) & (p < cap - 1e-9)
    if interior.any():
        taus = x[interior] - p[interior]
        tau = float(np.mean(taus))
        spread = float(np.max(np.abs(taus - tau)))
    else:
        # tau is only pinned to an interval; pick the smallest consistent value
        lo = 0.0
        if (p <= 1e-9).any():
            lo = max(lo, float(np.max(x[p <= 1e-9])))
        tau = max(lo, 0.0)
        spread = 0.0
    tau = max(tau, 0.0)
    rebuilt = np.clip(x - tau, 0.0, cap)
    res = float(np.max(np.abs(rebuilt - p)))
    res = max(res, spread)
    res = max(res, float(np.max(-np.minimum(p, 0.0), initial=0.0)))
    res = max(res, float(np.max(p - cap, initial=0.0)))
    res = max(res, p.sum() - budget)
    res = max(res, tau * max(0.0, budget - p.sum()) / max(1.0, budget))
    return res
