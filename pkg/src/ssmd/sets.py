"""Feasible sets with exact Euclidean projection and membership tests.

``CappedBox`` is the budgeted box {x : 0 <= x_i <= cap, sum x_i <= budget};
its projection clamps componentwise and, when the budget binds, shifts by
the unique threshold tau >= 0 with sum clip(x - tau, 0, cap) = budget.
The threshold is found exactly by sorting the 2n kink locations of that
piecewise-linear sum, so the projection is deterministic to roundoff.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mirror import EUCLIDEAN, MirrorMap


def _as_vec(x, n: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != n:
        raise ValueError(f"expected a vector of length {n}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite components")
    return x


@dataclass(frozen=True)
class CappedBox:
    """{x in R^n : 0 <= x_i <= cap for all i, sum_i x_i <= budget}."""

    n: int
    cap: float
    budget: float

    is_bounded = True
    is_simplex = False

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be a positive integer")
        if self.cap <= 0.0 or self.budget <= 0.0:
            raise ValueError("cap and budget must be positive")

    def contains(self, x, tol: float = 0.0) -> bool:
        x = _as_vec(x, self.n)
        return bool(
            np.all(x >= -tol)
            and np.all(x <= self.cap + tol)
            and x.sum() <= self.budget + tol
        )

    def project(self, x) -> np.ndarray:
        x = _as_vec(x, self.n)
        y = np.clip(x, 0.0, self.cap)
        if y.sum() <= self.budget:
            return y
        tau = self._budget_tau(x)
        p = np.clip(x - tau, 0.0, self.cap)
        # nudge tau up by ulps if roundoff left the sum a hair over budget,
        # so the result is exactly feasible and projection is idempotent
        for _ in range(64):
            if p.sum() <= self.budget:
                break
            tau = np.nextafter(tau, np.inf)
            p = np.clip(x - tau, 0.0, self.cap)
        return p

    def _budget_tau(self, x: np.ndarray) -> float:
        # h(t) = sum clip(x - t, 0, cap) is piecewise linear, non-increasing,
        # with kinks at x_i and x_i - cap.  Solve h(tau) = budget on the
        # segment where it crosses; h(0) > budget is guaranteed by the caller.
        xs = np.sort(x)
        tail = np.concatenate([(xs[::-1].cumsum())[::-1], [0.0]])

        def h(ts):
            idx = np.searchsorted(xs, ts, side="right")
            above = tail[idx] - ts * (self.n - idx)
            idx_c = np.searchsorted(xs, ts + self.cap, side="right")
            above_c = tail[idx_c] - (ts + self.cap) * (self.n - idx_c)
            return above - above_c

        kinks = np.unique(np.concatenate([x, x - self.cap]))
        ts = np.concatenate([[0.0], kinks[kinks > 0.0]])
        vals = h(ts)
        i = int(np.argmax(vals <= self.budget))
        if vals[i] > self.budget:
            raise AssertionError("budget threshold search failed")
        if i == 0:
            return float(ts[0])
        lo, hi = ts[i - 1], ts[i]
        vlo, vhi = vals[i - 1], vals[i]
        if vhi == vlo:
            return float(hi)
        return float(lo + (vlo - self.budget) * (hi - lo) / (vlo - vhi))


@dataclass(frozen=True)
class Simplex:
    """The probability simplex {x in R^n : x_i >= 0, sum_i x_i = 1}."""

    n: int

    is_bounded = True
    is_simplex = True

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be a positive integer")

    def contains(self, x, tol: float = 0.0) -> bool:
        x = _as_vec(x, self.n)
        return bool(np.all(x >= -tol) and abs(x.sum() - 1.0) <= tol)

    def project(self, x) -> np.ndarray:
        x = _as_vec(x, self.n)
        u = np.sort(x)[::-1]
        css = np.cumsum(u) - 1.0
        ind = np.arange(1, self.n + 1)
        rho = ind[u - css / ind > 0][-1]
        theta = css[rho - 1] / rho
        return np.maximum(x - theta, 0.0)


def project_bisection(feasible_set: CappedBox, x, tol: float = 1e-12) -> np.ndarray:
    """Reference capped-box projection with a bisected budget threshold.

    Independent of the breakpoint-sort path in :meth:`CappedBox.project`;
    used as a cross-check oracle.
    """
    x = _as_vec(x, feasible_set.n)
    cap, budget = feasible_set.cap, feasible_set.budget
    y = np.clip(x, 0.0, cap)
    if y.sum() <= budget:
        return y
    lo, hi = 0.0, float(x.max())
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if np.clip(x - mid, 0.0, cap).sum() > budget:
            lo = mid
        else:
            hi = mid
    return np.clip(x - 0.5 * (lo + hi), 0.0, cap)


def bregman_diameter_sq(feasible_set, mirror_map: MirrorMap) -> float:
    """max over pairs x, y in the set of D_w(x, y).

    Closed forms for the Euclidean map only.  For the capped box the maximum
    of ||x - y||^2 is attained by two greedy vectors with disjoint supports
    (q = floor(budget/cap) components at cap plus a remainder r), which
    requires n >= 2*(q + 1).
    """
    if mirror_map.kind != EUCLIDEAN:
        raise ValueError("diameter closed form is only available for the euclidean map")
    if isinstance(feasible_set, Simplex):
        return 1.0 if feasible_set.n >= 2 else 0.0
    if isinstance(feasible_set, CappedBox):
        q = int(np.floor(feasible_set.budget / feasible_set.cap + 1e-12))
        r = feasible_set.budget - q * feasible_set.cap
        if r < 0.0:
            r = 0.0
        if feasible_set.n < 2 * (q + 1):
            raise ValueError(
                "disjoint-support diameter formula needs n >= 2*(floor(budget/cap) + 1)"
            )
        return q * feasible_set.cap**2 + r * r
    raise ValueError(f"unsupported set type: {type(feasible_set).__name__}")
