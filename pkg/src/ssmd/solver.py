"""Iteration engines for stochastic subgradient mirror descent.

Two regimes are provided: the strongly convex engine, which scales the
schedule by 1/mu_f and requires a mirror map with the quadratic upper
bound, and the compact-set engine with the a/sqrt(k+1) schedule.  Both
maintain the 1/alpha-weighted running average and record a per-iteration
trace.  A uniform-averaging baseline shares the compact engine's iterates.

The rate-bound calculators evaluate the guarantees the engines are tested
against:

* strongly convex, weighted average:   gap <= 2*Ct^2 / ((k+1) mu_f mu_w)
                                        ||xhat - x*||^2 <= 4*Ct^2 / ((k+1) mu_f^2 mu_w)
                                        ||x_k - x*||^2  <= 4*Ct^2 / ((k+1) mu_f^2 mu_w^2)
* compact set:   gap <= 3/(2 sqrt(k+1)) * (d^2/a + a (C^2 + nu^2)/mu_w)
  (noiseless variant uses a C^2/(2 mu_w) second term)

where Ct^2 bounds the second moment of the stochastic subgradient, C the
deterministic subgradient norm, nu^2 the noise variance, and d^2 the
Bregman diameter of the set.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .averaging import AverageState
from .gaussian import rng_from_seed
from .mirror import FEAS_TOL, MirrorMap, prox_step
from .sets import CappedBox, project_bisection
from .stepsizes import InverseSqrtStepsize

TRACE_FEAS_TOL = 1e-8


@dataclass
class OracleSample:
    """One stochastic subgradient draw; g carries the exact subgradient when known."""

    g_tilde: np.ndarray
    g: Optional[np.ndarray] = None


@dataclass
class ProblemHandle:
    """Everything an engine needs to run on one problem instance."""

    oracle: Callable[[np.ndarray, np.random.Generator], OracleSample]
    feasible_set: object
    mirror_map: MirrorMap
    x0: np.ndarray
    mu_f: float = 0.0
    f_exact: Optional[Callable[[np.ndarray], float]] = None
    f_sampler: Optional[Callable[[np.ndarray, np.random.Generator], float]] = None
    f_star: Optional[float] = None
    x_star: Optional[np.ndarray] = None
    f_eval_samples: int = 10_000
    f_eval_seed: int = 0


@dataclass
class RunTrace:
    """Per-iteration metrics of one run; arrays all have length K+1."""

    k: np.ndarray
    f_iter: np.ndarray
    f_avg: np.ndarray
    f_min: np.ndarray
    dist_iter_sq: Optional[np.ndarray]
    dist_avg_sq: Optional[np.ndarray]
    x_hat_final: np.ndarray
    seed: Optional[int]
    meta: dict = field(default_factory=dict)


def _f_evaluator(problem: ProblemHandle):
    if problem.f_exact is not None:
        return problem.f_exact, {"f_mode": "exact"}
    if problem.f_sampler is None:
        return None, {"f_mode": "none"}

    def estimate(x):
        rng = rng_from_seed(problem.f_eval_seed)
        total = 0.0
        for _ in range(problem.f_eval_samples):
            total += problem.f_sampler(x, rng)
        return total / problem.f_eval_samples

    return estimate, {"f_mode": "sample_average", "f_eval_samples": problem.f_eval_samples,
                      "f_eval_seed": problem.f_eval_seed}


def _eval_mask(num_iterations: int) -> np.ndarray:
    # Full fidelity up to K = 1000; geometric spacing beyond that.
    if num_iterations <= 1000:
        return np.ones(num_iterations + 1, dtype=bool)
    ks = np.unique(np.round(np.geomspace(1, num_iterations, 1000)).astype(int))
    mask = np.zeros(num_iterations + 1, dtype=bool)
    mask[0] = True
    mask[ks] = True
    mask[num_iterations] = True
    return mask


def _run(problem: ProblemHandle, alpha_fn, step_scale: float, num_iterations: int,
         rng: np.random.Generator, seed: Optional[int], uniform_average: bool,
         cross_check: bool) -> RunTrace:
    set_ = problem.feasible_set
    mmap = problem.mirror_map
    x = np.asarray(problem.x0, dtype=float)
    if not set_.contains(x, FEAS_TOL):
        raise ValueError("initial point is infeasible")

    f, meta = _f_evaluator(problem)
    mask = _eval_mask(num_iterations)
    m = num_iterations + 1
    f_iter = np.full(m, np.nan)
    f_avg = np.full(m, np.nan)
    f_min = np.full(m, np.nan)
    track_dist = problem.x_star is not None
    dist_iter = np.empty(m) if track_dist else None
    dist_avg = np.empty(m) if track_dist else None
    x_star = None if problem.x_star is None else np.asarray(problem.x_star, dtype=float)

    state = AverageState.empty()
    run_sum = np.zeros_like(x)
    x_hat = x
    best = np.inf
    for k in range(m):
        a_k = float(alpha_fn(k))
        if uniform_average:
            run_sum = run_sum + x
            x_hat = run_sum / (k + 1)
        else:
            state = state.absorb(x, a_k)
            x_hat = state.x_hat
        if f is not None and mask[k]:
            f_iter[k] = f(x)
            f_avg[k] = f(x_hat)
            best = min(best, f_iter[k])
        f_min[k] = best
        if track_dist:
            dist_iter[k] = float(np.sum((x - x_star) ** 2))
            dist_avg[k] = float(np.sum((x_hat - x_star) ** 2))
        if k < num_iterations:
            sample = problem.oracle(x, rng)
            step = a_k * step_scale
            x_next = prox_step(mmap, set_, x, sample.g_tilde, step)
            if cross_check:
                if not set_.contains(x_next, TRACE_FEAS_TOL) \
                        or not set_.contains(x_hat, TRACE_FEAS_TOL):
                    raise AssertionError("iterate or average left the feasible set")
                if mmap.kind == "euclidean" and isinstance(set_, CappedBox):
                    alt = project_bisection(
                        set_, x - step * np.asarray(sample.g_tilde, dtype=float))
                    if not np.allclose(x_next, alt, rtol=0.0, atol=1e-10):
                        raise AssertionError("prox step disagrees with bisection projection")
            x = x_next

    return RunTrace(
        k=np.arange(m),
        f_iter=f_iter,
        f_avg=f_avg,
        f_min=f_min,
        dist_iter_sq=dist_iter,
        dist_avg_sq=dist_avg,
        x_hat_final=x_hat.copy(),
        seed=seed,
        meta=meta,
    )


def run_strongly_convex(problem: ProblemHandle, schedule, num_iterations: int,
                        rng: np.random.Generator, seed: Optional[int] = None,
                        cross_check: bool = False) -> RunTrace:
    """Run the strongly convex engine: prox steps of size alpha_k / mu_f."""
    if problem.mu_f <= 0.0:
        raise ValueError("the strongly convex engine requires mu_f > 0")
    if not problem.mirror_map.satisfies_quadratic_upper_bound:
        raise ValueError("the strongly convex engine requires the quadratic upper bound")
    if isinstance(schedule, InverseSqrtStepsize):
        raise ValueError("a/sqrt(k+1) is not certified for the strongly convex engine")
    if num_iterations < 1:
        raise ValueError("num_iterations must be positive")
    return _run(problem, schedule.alpha, 1.0 / problem.mu_f, num_iterations, rng, seed,
                uniform_average=False, cross_check=cross_check)


def run_compact(problem: ProblemHandle, a: float, num_iterations: int,
                rng: np.random.Generator, seed: Optional[int] = None,
                cross_check: bool = False) -> RunTrace:
    """Run the compact-set engine with alpha_k = a/sqrt(k+1)."""
    if not getattr(problem.feasible_set, "is_bounded", False):
        raise ValueError("the compact engine requires a bounded feasible set")
    if num_iterations < 1:
        raise ValueError("num_iterations must be positive")
    sched = InverseSqrtStepsize(a)
    return _run(problem, sched.alpha, 1.0, num_iterations, rng, seed,
                uniform_average=False, cross_check=cross_check)


def run_baseline_uniform(problem: ProblemHandle, a: float, num_iterations: int,
                         rng: np.random.Generator, seed: Optional[int] = None) -> RunTrace:
    """Compact-engine iterates with a plain arithmetic-mean average."""
    if not getattr(problem.feasible_set, "is_bounded", False):
        raise ValueError("the compact engine requires a bounded feasible set")
    if num_iterations < 1:
        raise ValueError("num_iterations must be positive")
    sched = InverseSqrtStepsize(a)
    return _run(problem, sched.alpha, 1.0, num_iterations, rng, seed,
                uniform_average=True, cross_check=False)


def combined_second_moment(grad_bound_sq: float, noise_var: float,
                           euclidean_norm: bool = True) -> float:
    """Second-moment bound Ct^2 for a noisy subgradient with ||g|| <= C and
    noise variance <= nu^2: C^2 + nu^2 under the Euclidean norm, doubled for
    a general norm."""
    s = grad_bound_sq + noise_var
    return s if euclidean_norm else 2.0 * s


def strongly_convex_rate_bounds(k, c_tilde_sq: float, mu_f: float, mu_w: float):
    """(gap bound, avg distance bound, iterate distance bound) at iteration k."""
    if c_tilde_sq <= 0.0 or mu_f <= 0.0 or mu_w <= 0.0:
        raise ValueError("parameters must be positive")
    k = np.asarray(k, dtype=float)
    gap = 2.0 / (k + 1.0) * c_tilde_sq / (mu_f * mu_w)
    avg_dist = 4.0 / (k + 1.0) * c_tilde_sq / (mu_f**2 * mu_w)
    iter_dist = 4.0 / (k + 1.0) * c_tilde_sq / (mu_f**2 * mu_w**2)
    return gap, avg_dist, iter_dist


def compact_rate_bound(k, a: float, diameter_sq: float, grad_bound_sq: float,
                       noise_var: float, mu_w: float):
    """Gap bound for the compact engine at iteration k."""
    if a <= 0.0 or mu_w <= 0.0:
        raise ValueError("parameters must be positive")
    k = np.asarray(k, dtype=float)
    return 1.5 / np.sqrt(k + 1.0) * (
        diameter_sq / a + a * (grad_bound_sq + noise_var) / mu_w
    )


def noiseless_compact_rate_bound(k, a: float, diameter_sq: float,
                                 grad_bound_sq: float, mu_w: float):
    """Gap bound for the compact engine with error-free subgradients."""
    if a <= 0.0 or mu_w <= 0.0:
        raise ValueError("parameters must be positive")
    k = np.asarray(k, dtype=float)
    return 1.5 / np.sqrt(k + 1.0) * (
        diameter_sq / a + a * grad_bound_sq / (2.0 * mu_w)
    )


def optimal_stepsize_scale(diameter: float, grad_bound_sq: float, noise_var: float,
                           mu_w: float, noiseless: bool = False) -> float:
    """The scale a minimizing the compact-engine gap bound.

    With ``noiseless=True`` the minimized expression is the error-free bound
    (second term C^2/(2 mu_w)), which requires noise_var = 0 and gives
    a* = d*sqrt(2*mu_w)/C; otherwise a* = d / sqrt((C^2 + nu^2)/mu_w).
    """
    if diameter <= 0.0 or mu_w <= 0.0:
        raise ValueError("parameters must be positive")
    if noiseless:
        if noise_var != 0.0:
            raise ValueError("the noiseless optimum requires noise_var = 0")
        return diameter * np.sqrt(2.0 * mu_w) / np.sqrt(grad_bound_sq)
    return diameter / np.sqrt((grad_bound_sq + noise_var) / mu_w)
