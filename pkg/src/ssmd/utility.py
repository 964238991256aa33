"""Stochastic piecewise-linear utility benchmark.

The objective is

    f(x) = E[ phi( sum_i (a_i + xi_i) x_i ) ] + (reg_weight/2) ||x - anchor||^2,

with xi_i i.i.d. standard normal and phi a convex piecewise-linear envelope
(pointwise max of affine pieces).  Because sum_i (a_i + xi_i) x_i is exactly
N(a'x, ||x||^2), the expectation reduces to a one-dimensional Gaussian
integral of a piecewise-affine function, which has a closed form per piece:

    int_[l,r] (c + d t) dN(mu, s^2)
        = (c + d mu) (Phi(beta) - Phi(alpha)) + d s (pdf(alpha) - pdf(beta)),

with alpha = (l - mu)/s, beta = (r - mu)/s.  The stochastic oracle draws one
xi vector per call and returns phi'(t) (a + xi) + reg_weight (x - anchor).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .gaussian import norm_cdf_interval, norm_pdf, rng_from_seed, standard_normals
from .sets import CappedBox
from .mirror import MirrorMap
from .solver import OracleSample, ProblemHandle

# Seed for the one-time draw of the linear coefficients a (kept in the
# instance and its serialized metadata so runs are reproducible).
DEFAULT_COEFF_SEED = 54321

F_FEAS_TOL = 1e-8


class ConvergenceError(RuntimeError):
    """Raised when the reference solver hits its iteration cap."""


@dataclass(frozen=True)
class AffinePiece:
    intercept: float
    slope: float


@dataclass(frozen=True, eq=False)
class Envelope:
    """Upper envelope of affine pieces, slope-sorted with dominated pieces removed."""

    intercepts: np.ndarray
    slopes: np.ndarray
    breakpoints: np.ndarray

    def __post_init__(self):
        if self.intercepts.shape != self.slopes.shape or self.intercepts.ndim != 1:
            raise ValueError("inconsistent piece arrays")
        if self.breakpoints.shape != (self.slopes.shape[0] - 1,):
            raise ValueError("need exactly one breakpoint between consecutive pieces")
        if np.any(np.diff(self.slopes) <= 0.0):
            raise ValueError("slopes must be strictly increasing")
        if np.any(np.diff(self.breakpoints) <= 0.0):
            raise ValueError("breakpoints must be strictly increasing")

    @property
    def num_pieces(self) -> int:
        return self.intercepts.shape[0]


def build_envelope(pieces: Sequence[AffinePiece]) -> Envelope:
    """Reduce raw pieces to the envelope: max over pieces at every t."""
    if len(pieces) == 0:
        raise ValueError("need at least one piece")
    by_slope: dict[float, float] = {}
    for p in pieces:
        c, d = float(p.intercept), float(p.slope)
        if not (np.isfinite(c) and np.isfinite(d)):
            raise ValueError("pieces must be finite")
        if d not in by_slope or c > by_slope[d]:
            by_slope[d] = c
    lines = sorted((d, c) for d, c in by_slope.items())

    hull: list[tuple[float, float]] = []  # (slope, intercept)
    for d, c in lines:
        while len(hull) >= 2:
            d2, c2 = hull[-1]
            d1, c1 = hull[-2]
            # hull[-1] survives only if it beats its neighbors somewhere
            if (c2 - c) / (d - d2) > (c1 - c2) / (d2 - d1):
                break
            hull.pop()
        hull.append((d, c))

    slopes = np.array([d for d, _ in hull])
    intercepts = np.array([c for _, c in hull])
    if len(hull) > 1:
        breakpoints = (intercepts[:-1] - intercepts[1:]) / (slopes[1:] - slopes[:-1])
    else:
        breakpoints = np.empty(0)
    return Envelope(intercepts=intercepts, slopes=slopes, breakpoints=breakpoints)


def _active_piece(envelope: Envelope, t):
    # Ties at a breakpoint resolve to the larger slope.
    return np.searchsorted(envelope.breakpoints, t, side="right")


def phi(envelope: Envelope, t):
    """Envelope value max_j (c_j + d_j t); vectorized over t."""
    t = np.asarray(t, dtype=float)
    j = _active_piece(envelope, t)
    out = envelope.intercepts[j] + envelope.slopes[j] * t
    return float(out) if out.ndim == 0 else out


def phi_slope(envelope: Envelope, t):
    """Slope of a maximizing piece (a valid subgradient of phi)."""
    t = np.asarray(t, dtype=float)
    out = envelope.slopes[_active_piece(envelope, t)]
    return float(out) if out.ndim == 0 else out


def expected_phi_gaussian(envelope: Envelope, mu, sigma):
    """E[phi(S)] for S ~ N(mu, sigma^2), exact up to CDF accuracy.

    mu and sigma broadcast; sigma must be >= 0, and sigma = 0 rows fall back
    to a plain envelope evaluation.
    """
    mu = np.asarray(mu, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    if np.any(sigma < 0.0):
        raise ValueError("sigma must be nonnegative")
    scalar = mu.ndim == 0 and sigma.ndim == 0
    mu, sigma = np.broadcast_arrays(np.atleast_1d(mu), np.atleast_1d(sigma))
    mu = mu.astype(float)
    sigma = sigma.astype(float)

    out = np.empty(mu.shape)
    zero = sigma == 0.0
    if np.any(zero):
        out[zero] = phi(envelope, mu[zero])
    pos = ~zero
    if np.any(pos):
        mp = mu[pos][..., None]
        sp = sigma[pos][..., None]
        z = (envelope.breakpoints[None, :] - mp) / sp
        ninf = np.full((z.shape[0], 1), -np.inf)
        pinf = np.full((z.shape[0], 1), np.inf)
        lo = np.concatenate([ninf, z], axis=-1)
        hi = np.concatenate([z, pinf], axis=-1)
        prob = norm_cdf_interval(lo, hi)
        pdf_diff = norm_pdf(lo) - norm_pdf(hi)
        c = envelope.intercepts[None, :]
        d = envelope.slopes[None, :]
        out[pos] = np.sum((c + d * mp) * prob + d * sp * pdf_diff, axis=-1)
    return float(out[0]) if scalar else out


@dataclass(frozen=True, eq=False)
class UtilityInstance:
    """One benchmark instance: coefficients, envelope, regularizer, constraint set."""

    label: str
    coeffs: np.ndarray
    envelope: Envelope
    reg_weight: float
    anchor: np.ndarray
    feasible_set: CappedBox
    x0: np.ndarray
    coeff_seed: int

    def __post_init__(self):
        n = self.feasible_set.n
        if self.coeffs.shape != (n,) or self.anchor.shape != (n,) or self.x0.shape != (n,):
            raise ValueError("inconsistent dimensions")
        if self.reg_weight < 0.0:
            raise ValueError("reg_weight must be nonnegative")

    @property
    def n(self) -> int:
        return self.feasible_set.n

    @property
    def mu_f(self) -> float:
        return self.reg_weight


def default_pieces(m: int = 10) -> list[AffinePiece]:
    """The documented deterministic envelope: a risk-averse piecewise-linear
    disutility with m pieces, slopes (j - m)/(2.5 m) rising from -0.36 to a
    flat tail at 0, and m-1 breakpoints at j/m in (0, 1).

    Intercepts follow from anchoring phi(0) = 0 and placing the j-th
    breakpoint at j/m: c_{j+1} = c_j - (j/m) * (d_{j+1} - d_j).
    """
    slopes = [(j - m) / (2.5 * m) for j in range(1, m + 1)]
    pieces = [AffinePiece(intercept=0.0, slope=slopes[0])]
    c = 0.0
    for j in range(1, m):
        c -= (j / m) * (slopes[j] - slopes[j - 1])
        pieces.append(AffinePiece(intercept=c, slope=slopes[j]))
    return pieces


def make_instance(label: str, n: int, cap: float, budget: float, reg_weight: float,
                  x0: Optional[np.ndarray] = None,
                  pieces: Optional[Sequence[AffinePiece]] = None,
                  coeff_seed: int = DEFAULT_COEFF_SEED) -> UtilityInstance:
    feasible_set = CappedBox(n=n, cap=cap, budget=budget)
    coeffs = rng_from_seed(coeff_seed).random(n)
    anchor = np.zeros(n)
    anchor[0] = 0.5
    x0 = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float)
    env = build_envelope(default_pieces() if pieces is None else pieces)
    return UtilityInstance(label=label, coeffs=coeffs, envelope=env,
                           reg_weight=float(reg_weight), anchor=anchor,
                           feasible_set=feasible_set, x0=x0, coeff_seed=coeff_seed)


_TEST_BUDGETS = {"test1": 10.0, "test2": 100.0, "test3": 10.0, "test4": 100.0}


def default_instance(label: str, reg_weight: float) -> UtilityInstance:
    """The four documented benchmark instances (n = 100, cap = 10)."""
    key = label.lower()
    if key not in _TEST_BUDGETS:
        raise ValueError(f"unknown instance label: {label!r}")
    x0 = np.zeros(100)
    if key == "test3":
        x0[:10] = 1.0
    elif key == "test4":
        x0[:10] = 10.0
    return make_instance(key, n=100, cap=10.0, budget=_TEST_BUDGETS[key],
                         reg_weight=reg_weight, x0=x0)


def f_value(instance: UtilityInstance, x, check_feasible: bool = True) -> float:
    """Exact objective value via the closed-form Gaussian integral."""
    x = np.asarray(x, dtype=float)
    if check_feasible and not instance.feasible_set.contains(x, F_FEAS_TOL):
        raise ValueError("x is infeasible")
    mu = float(instance.coeffs @ x)
    sigma = float(np.sqrt(x @ x))
    reg = 0.5 * instance.reg_weight * float(np.sum((x - instance.anchor) ** 2))
    return expected_phi_gaussian(instance.envelope, mu, sigma) + reg


def grad_f(instance: UtilityInstance, x) -> np.ndarray:
    """Gradient of the smoothed objective (subgradient selection at x = 0).

    For sigma = ||x|| > 0 the Gaussian smoothing makes the utility term
    differentiable: d/dmu E[phi] = E[phi'] and d/dsigma E[phi] = E[phi' Z],
    both closed-form sums over the envelope pieces.
    """
    x = np.asarray(x, dtype=float)
    env = instance.envelope
    mu = float(instance.coeffs @ x)
    sigma = float(np.sqrt(x @ x))
    reg_grad = instance.reg_weight * (x - instance.anchor)
    if sigma == 0.0:
        return phi_slope(env, mu) * instance.coeffs + reg_grad
    z = (env.breakpoints - mu) / sigma
    lo = np.concatenate([[-np.inf], z])
    hi = np.concatenate([z, [np.inf]])
    prob = norm_cdf_interval(lo, hi)
    pdf_diff = norm_pdf(lo) - norm_pdf(hi)
    e_slope = float(env.slopes @ prob)
    e_slope_z = float(env.slopes @ pdf_diff)
    return e_slope * instance.coeffs + e_slope_z * (x / sigma) + reg_grad


def stochastic_subgradient(instance: UtilityInstance, x,
                           rng: np.random.Generator) -> OracleSample:
    """One-sample stochastic subgradient: phi'((a+xi)'x) (a+xi) + reg term."""
    x = np.asarray(x, dtype=float)
    if not instance.feasible_set.contains(x, F_FEAS_TOL):
        raise ValueError("x is infeasible")
    noisy = instance.coeffs + standard_normals(rng, instance.n)
    t = float(noisy @ x)
    g_tilde = phi_slope(instance.envelope, t) * noisy \
        + instance.reg_weight * (x - instance.anchor)
    return OracleSample(g_tilde=g_tilde)


def mc_estimate_f(instance: UtilityInstance, x, n_samples: int,
                  rng: np.random.Generator) -> tuple[float, float]:
    """Monte-Carlo estimate (mean, stderr) of f using the scalar reduction
    (a + xi)'x ~ N(a'x, ||x||^2)."""
    x = np.asarray(x, dtype=float)
    mu = float(instance.coeffs @ x)
    sigma = float(np.sqrt(x @ x))
    vals = phi(instance.envelope, mu + sigma * standard_normals(rng, n_samples))
    reg = 0.5 * instance.reg_weight * float(np.sum((x - instance.anchor) ** 2))
    stderr = float(vals.std(ddof=1) / np.sqrt(n_samples))
    return float(vals.mean()) + reg, stderr


def mc_estimate_f_dense(instance: UtilityInstance, x, n_samples: int,
                        rng: np.random.Generator,
                        batch: int = 20_000) -> tuple[float, float]:
    """Monte-Carlo estimate drawing full xi vectors (validates the scalar
    reduction in :func:`mc_estimate_f`); slower, for tests."""
    x = np.asarray(x, dtype=float)
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < n_samples:
        b = min(batch, n_samples - done)
        xi = standard_normals(rng, (b, instance.n))
        t = xi @ x + float(instance.coeffs @ x)
        vals = phi(instance.envelope, t)
        total += float(vals.sum())
        total_sq += float((vals * vals).sum())
        done += b
    mean = total / n_samples
    var = (total_sq - n_samples * mean * mean) / (n_samples - 1)
    reg = 0.5 * instance.reg_weight * float(np.sum((x - instance.anchor) ** 2))
    return mean + reg, float(np.sqrt(max(var, 0.0) / n_samples))


def _fd_grad(f, x: np.ndarray, h: float) -> np.ndarray:
    g = np.empty_like(x)
    for i in range(x.shape[0]):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2.0 * h)
    return g


def reference_solution(instance: UtilityInstance, tol: float,
                       x_init: Optional[np.ndarray] = None,
                       max_iter: int = 20_000,
                       fd_step: float = 1e-6) -> tuple[np.ndarray, float]:
    """High-accuracy minimizer via deterministic projected descent.

    Gradients are central finite differences of the exact objective;
    backtracking keeps the procedure deterministic while the accepted steps
    shrink near the solution.  Convergence requires both the last move and
    the unit-step projected-gradient residual to drop below tol; hitting the
    iteration cap raises :class:`ConvergenceError`.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    proj = instance.feasible_set.project

    def f(v):
        return f_value(instance, v, check_feasible=False)

    x = proj(np.asarray(instance.x0 if x_init is None else x_init, dtype=float))
    fx = f(x)
    step = 1.0
    last_move = np.inf
    for _ in range(max_iter):
        g = _fd_grad(f, x, fd_step)
        residual = float(np.sqrt(np.sum((x - proj(x - g)) ** 2)))
        if residual <= tol and last_move <= tol:
            return x, fx
        step = min(step * 2.0, 1e6)
        # roundoff allowance proportional to the objective's own scale; an
        # additive constant here would swamp problems whose optimum is ~0
        slack = 1e-14 * abs(fx)
        # c1 = 1/4 keeps the accepted step below 1.5/L on quadratics, so the
        # iteration contracts instead of ping-ponging across the minimizer
        while True:
            x_new = proj(x - step * g)
            f_new = f(x_new)
            if f_new <= fx + 0.25 * float(g @ (x_new - x)) + slack:
                break
            step *= 0.5
            if step < 1e-20:
                x_new, f_new = x, fx
                break
        last_move = float(np.sqrt(np.sum((x_new - x) ** 2)))
        x, fx = x_new, f_new
    raise ConvergenceError(f"no convergence to tol={tol} within {max_iter} iterations")


def estimate_constants(instance: UtilityInstance, sample_count: int,
                       rng: np.random.Generator) -> tuple[float, float]:
    """Empirical (C, nu): max deterministic-subgradient norm over uniformly
    sampled feasible points, and the RMS noise norm of the stochastic oracle."""
    if sample_count < 1000:
        raise ValueError("sample_count must be at least 1000")
    set_ = instance.feasible_set
    c_max = 0.0
    noise_sq = 0.0
    for _ in range(sample_count):
        x = set_.project(set_.cap * rng.random(instance.n))
        g = grad_f(instance, x)
        c_max = max(c_max, float(np.sqrt(g @ g)))
        d = stochastic_subgradient(instance, x, rng).g_tilde - g
        noise_sq += float(d @ d)
    return c_max, float(np.sqrt(noise_sq / sample_count))


def make_problem(instance: UtilityInstance, f_eval_samples: int = 10_000,
                 analytic_f: bool = True) -> ProblemHandle:
    """Bridge an instance to the solver engines."""

    def oracle(x, rng):
        return stochastic_subgradient(instance, x, rng)

    def f_exact(x):
        return f_value(instance, x, check_feasible=False)

    def f_sampler(x, rng):
        mu = float(instance.coeffs @ x)
        sigma = float(np.sqrt(x @ x))
        reg = 0.5 * instance.reg_weight * float(np.sum((x - instance.anchor) ** 2))
        return float(phi(instance.envelope, mu + sigma * standard_normals(rng, 1)[0])) + reg

    return ProblemHandle(
        oracle=oracle,
        feasible_set=instance.feasible_set,
        mirror_map=MirrorMap.euclidean(),
        x0=instance.x0,
        mu_f=instance.reg_weight,
        f_exact=f_exact if analytic_f else None,
        f_sampler=None if analytic_f else f_sampler,
        f_eval_samples=f_eval_samples,
    )


def instance_metadata(instance: UtilityInstance) -> dict[str, str]:
    """Flat key = value view of an instance for the experiment sidecar."""
    env = instance.envelope
    return {
        "instance": instance.label,
        "n": str(instance.n),
        "cap": repr(instance.feasible_set.cap),
        "budget": repr(instance.feasible_set.budget),
        "reg_weight": repr(instance.reg_weight),
        "coeff_seed": str(instance.coeff_seed),
        "piece_intercepts": ",".join(repr(v) for v in env.intercepts.tolist()),
        "piece_slopes": ",".join(repr(v) for v in env.slopes.tolist()),
        "anchor": ",".join(repr(v) for v in instance.anchor.tolist()),
        "x0": ",".join(repr(v) for v in instance.x0.tolist()),
    }
