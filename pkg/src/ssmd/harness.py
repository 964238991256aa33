"""Experiment configuration, Monte-Carlo orchestration, and CSV output.

Config files are UTF-8 ``key = value`` lines with ``#`` comments; unknown
keys are rejected.  Run r of an experiment uses the 64-bit seed
``base_seed + r`` (wrapping), so the result is a deterministic function of
the config alone: re-running a config reproduces the CSV byte for byte,
and the worker count only changes how runs are scheduled, not the fold
order of the reduction.
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .gaussian import rng_from_seed
from .mirror import MirrorMap
from .sets import bregman_diameter_sq
from .solver import (
    combined_second_moment,
    compact_rate_bound,
    run_compact,
    run_strongly_convex,
    strongly_convex_rate_bounds,
)
from .stepsizes import (
    NesterovStepsize,
    TsengStepsize,
    alpha_cap_violations,
    alpha_sq_sum_violations,
    sqrt_sum_growth_violations,
    step_condition_violations,
)
from .utility import (
    default_instance,
    estimate_constants,
    instance_metadata,
    make_instance,
    make_problem,
    reference_solution,
)

STRONGLY_CONVEX = "strongly_convex"
COMPACT = "compact"

_SCHEDULES = {"step-1": TsengStepsize, "step-2": NesterovStepsize}
_INSTANCE_LABELS = ("test1", "test2", "test3", "test4")

# Samples used for the empirical constants behind the bound column; the
# estimation stream is derived from base_seed so the bound is reproducible.
CONSTANT_SAMPLES = 2000
_CONSTANTS_SEED_XOR = 0xA5A5A5A5A5A5A5A5

CSV_HEADER = "k,mean_f_avg,stderr_f_avg,mean_f_iter,mean_f_min,bound"


class ConfigError(ValueError):
    """Invalid experiment configuration; message lists every violation."""


@dataclass(frozen=True)
class ExperimentConfig:
    regime: str
    instance: str = "test1"
    n: Optional[int] = None
    cap: Optional[float] = None
    budget: Optional[float] = None
    reg_weight: float = 0.0
    schedule: str = "step-1"
    a_values: tuple = (1.0,)
    iterations: int = 0
    runs: int = 100
    base_seed: int = 0
    eval_samples: int = 10_000
    analytic_f: bool = True
    workers: int = 1
    compute_reference: bool = False
    reference_tol: float = 1e-6
    out: Optional[str] = None


_KEY_TYPES = {
    "regime": str,
    "instance": str,
    "n": int,
    "cap": float,
    "budget": float,
    "lambda": float,
    "schedule": str,
    "a": str,
    "iterations": int,
    "runs": int,
    "seed": int,
    "eval_samples": int,
    "analytic_f": bool,
    "workers": int,
    "compute_reference": bool,
    "reference_tol": float,
    "out": str,
}


def _parse_bool(raw: str) -> bool:
    low = raw.lower()
    if low in ("true", "1", "yes"):
        return True
    if low in ("false", "0", "no"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate a config; raises ConfigError with every problem found."""
    values: dict = {}
    errors: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value', got {raw!r}")
            continue
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in _KEY_TYPES:
            errors.append(f"line {lineno}: unknown key {key!r}")
            continue
        if key in values:
            errors.append(f"line {lineno}: duplicate key {key!r}")
            continue
        try:
            caster = _KEY_TYPES[key]
            values[key] = _parse_bool(val) if caster is bool else caster(val)
        except ValueError:
            errors.append(f"line {lineno}: cannot parse value for {key!r}: {val!r}")
    if errors:
        raise ConfigError("; ".join(errors))

    regime = values.get("regime")
    if regime not in (STRONGLY_CONVEX, COMPACT):
        errors.append("regime must be 'strongly_convex' or 'compact'")
        regime = COMPACT
    reg_default = 100.0 if regime == STRONGLY_CONVEX else 0.0
    iter_default = 100 if regime == STRONGLY_CONVEX else 1000

    a_values = (1.0,)
    if "a" in values:
        try:
            a_values = tuple(float(s) for s in values["a"].split(","))
        except ValueError:
            errors.append(f"cannot parse 'a' as a comma list of reals: {values['a']!r}")

    cfg = ExperimentConfig(
        regime=regime,
        instance=values.get("instance", "test1").lower(),
        n=values.get("n"),
        cap=values.get("cap"),
        budget=values.get("budget"),
        reg_weight=values.get("lambda", reg_default),
        schedule=values.get("schedule", "step-1"),
        a_values=a_values,
        iterations=values.get("iterations", iter_default),
        runs=values.get("runs", 100),
        base_seed=values.get("seed", 0),
        eval_samples=values.get("eval_samples", 10_000),
        analytic_f=values.get("analytic_f", True),
        workers=values.get("workers", 1),
        compute_reference=values.get("compute_reference", False),
        reference_tol=values.get("reference_tol", 1e-6),
        out=values.get("out"),
    )

    if cfg.runs < 1:
        errors.append("runs must be >= 1")
    if cfg.iterations < 1:
        errors.append("iterations must be >= 1")
    if cfg.regime == STRONGLY_CONVEX and cfg.reg_weight <= 0.0:
        errors.append("strongly_convex requires lambda > 0")
    if cfg.reg_weight < 0.0:
        errors.append("lambda must be nonnegative")
    if cfg.schedule not in _SCHEDULES:
        errors.append(f"schedule must be one of {sorted(_SCHEDULES)}")
    if any(a <= 0.0 for a in cfg.a_values):
        errors.append("all a values must be positive")
    if cfg.instance == "inline":
        if cfg.n is None or cfg.cap is None or cfg.budget is None:
            errors.append("inline instance requires n, cap and budget")
    elif cfg.instance not in _INSTANCE_LABELS:
        errors.append(f"instance must be one of {list(_INSTANCE_LABELS)} or 'inline'")
    if cfg.eval_samples < 1:
        errors.append("eval_samples must be >= 1")
    if cfg.workers < 1:
        errors.append("workers must be >= 1")
    if cfg.reference_tol <= 0.0:
        errors.append("reference_tol must be positive")
    if errors:
        raise ConfigError("; ".join(errors))
    return cfg


def config_text(cfg: ExperimentConfig) -> str:
    """Canonical serialization; parsing it back yields an equal config."""
    lines = [
        f"regime = {cfg.regime}",
        f"instance = {cfg.instance}",
    ]
    if cfg.instance == "inline":
        lines += [f"n = {cfg.n}", f"cap = {cfg.cap!r}", f"budget = {cfg.budget!r}"]
    lines += [
        f"lambda = {cfg.reg_weight!r}",
        f"schedule = {cfg.schedule}",
        "a = " + ",".join(repr(a) for a in cfg.a_values),
        f"iterations = {cfg.iterations}",
        f"runs = {cfg.runs}",
        f"seed = {cfg.base_seed}",
        f"eval_samples = {cfg.eval_samples}",
        f"analytic_f = {str(cfg.analytic_f).lower()}",
        f"workers = {cfg.workers}",
        f"compute_reference = {str(cfg.compute_reference).lower()}",
        f"reference_tol = {cfg.reference_tol!r}",
    ]
    if cfg.out is not None:
        lines.append(f"out = {cfg.out}")
    return "\n".join(lines) + "\n"


def config_hash(cfg: ExperimentConfig) -> str:
    """Content hash of the canonical serialization (git blob convention)."""
    body = config_text(cfg).encode("utf-8")
    return hashlib.sha1(b"blob %d\0" % len(body) + body).hexdigest()


@dataclass
class McSummary:
    """Mean/stderr aggregates over Monte-Carlo runs plus the bound curve."""

    k: np.ndarray
    mean_f_avg: np.ndarray
    stderr_f_avg: np.ndarray
    mean_f_iter: np.ndarray
    mean_f_min: np.ndarray
    bound: np.ndarray
    metadata: dict = field(default_factory=dict)


def build_instance(cfg: ExperimentConfig):
    if cfg.instance == "inline":
        return make_instance("inline", n=cfg.n, cap=cfg.cap, budget=cfg.budget,
                             reg_weight=cfg.reg_weight)
    return default_instance(cfg.instance, reg_weight=cfg.reg_weight)


def _mc_run(args: tuple) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """One Monte-Carlo run; top level so process pools can dispatch it."""
    cfg, a, seed = args
    instance = build_instance(cfg)
    problem = make_problem(instance, f_eval_samples=cfg.eval_samples,
                           analytic_f=cfg.analytic_f)
    rng = rng_from_seed(seed)
    if cfg.regime == STRONGLY_CONVEX:
        trace = run_strongly_convex(problem, _SCHEDULES[cfg.schedule](),
                                    cfg.iterations, rng, seed=seed)
    else:
        trace = run_compact(problem, a, cfg.iterations, rng, seed=seed)
    return trace.f_avg, trace.f_iter, trace.f_min


def instance_constants(cfg: ExperimentConfig) -> dict:
    """Empirical constants behind the bound column, derived from base_seed."""
    instance = build_instance(cfg)
    const_rng = rng_from_seed(cfg.base_seed ^ _CONSTANTS_SEED_XOR)
    c_est, nu_est = estimate_constants(instance, CONSTANT_SAMPLES, const_rng)
    d_sq = bregman_diameter_sq(instance.feasible_set, MirrorMap.euclidean())
    return {
        "c_est": c_est,
        "nu_est": nu_est,
        "c_tilde_sq": combined_second_moment(c_est**2, nu_est**2),
        "diameter_sq": d_sq,
    }


def bound_curve(cfg: ExperimentConfig, a: float, constants: dict) -> np.ndarray:
    """Theoretical gap-bound values at k = 0..iterations for this config."""
    ks = np.arange(cfg.iterations + 1)
    if cfg.regime == STRONGLY_CONVEX:
        return strongly_convex_rate_bounds(ks, constants["c_tilde_sq"],
                                           cfg.reg_weight, 1.0)[0]
    return compact_rate_bound(ks, a, constants["diameter_sq"],
                              constants["c_est"]**2, constants["nu_est"]**2, 1.0)


def run_experiment(cfg: ExperimentConfig, a: Optional[float] = None,
                   workers: Optional[int] = None) -> McSummary:
    """Execute `runs` independent runs and aggregate, ordered by run index."""
    a = cfg.a_values[0] if a is None else float(a)
    workers = cfg.workers if workers is None else int(workers)
    instance = build_instance(cfg)
    constants = instance_constants(cfg)

    seeds = [(cfg.base_seed + r) % (1 << 64) for r in range(cfg.runs)]
    tasks = [(cfg, a, s) for s in seeds]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_mc_run, tasks,
                                    chunksize=max(1, cfg.runs // (4 * workers))))
    else:
        results = [_mc_run(t) for t in tasks]

    f_avg = np.vstack([r[0] for r in results])
    f_iter = np.vstack([r[1] for r in results])
    f_min = np.vstack([r[2] for r in results])
    ks = np.arange(cfg.iterations + 1)
    if cfg.runs > 1:
        stderr = f_avg.std(axis=0, ddof=1) / np.sqrt(cfg.runs)
    else:
        stderr = np.zeros(cfg.iterations + 1)

    metadata = {
        "config_hash": config_hash(cfg),
        "a_used": repr(a),
        "c_est": repr(constants["c_est"]),
        "nu_est": repr(constants["nu_est"]),
        "c_tilde_sq": repr(constants["c_tilde_sq"]),
        "diameter_sq": repr(constants["diameter_sq"]),
        "mu_f": repr(cfg.reg_weight),
        "mu_w": repr(1.0),
    }
    metadata.update(instance_metadata(instance))
    if cfg.compute_reference:
        _, f_ref = reference_solution(instance, cfg.reference_tol)
        metadata["f_ref"] = repr(f_ref)
    metadata["config"] = config_text(cfg)

    return McSummary(k=ks, mean_f_avg=f_avg.mean(axis=0), stderr_f_avg=stderr,
                     mean_f_iter=f_iter.mean(axis=0), mean_f_min=f_min.mean(axis=0),
                     bound=bound_curve(cfg, a, constants), metadata=metadata)


def sweep_a(cfg: ExperimentConfig, workers: Optional[int] = None):
    """run_experiment for every configured a value, in order."""
    return [(a, run_experiment(cfg, a=a, workers=workers)) for a in cfg.a_values]


def _fmt(v: float) -> str:
    # repr of a Python float is the shortest decimal string that round-trips.
    return repr(float(v))


def format_csv(summary: McSummary) -> str:
    lines = [CSV_HEADER]
    for i in range(summary.k.shape[0]):
        lines.append(",".join([
            str(int(summary.k[i])),
            _fmt(summary.mean_f_avg[i]),
            _fmt(summary.stderr_f_avg[i]),
            _fmt(summary.mean_f_iter[i]),
            _fmt(summary.mean_f_min[i]),
            _fmt(summary.bound[i]),
        ]))
    return "\n".join(lines) + "\n"


def parse_csv(text: str) -> McSummary:
    lines = text.strip().splitlines()
    if lines[0] != CSV_HEADER:
        raise ValueError(f"unexpected CSV header: {lines[0]!r}")
    cols = [line.split(",") for line in lines[1:]]
    arr = np.array([[float(v) for v in row] for row in cols])
    return McSummary(k=arr[:, 0].astype(int), mean_f_avg=arr[:, 1],
                     stderr_f_avg=arr[:, 2], mean_f_iter=arr[:, 3],
                     mean_f_min=arr[:, 4], bound=arr[:, 5])


def emit_csv(summary: McSummary, path) -> None:
    """Write the summary CSV and a sibling <path>.meta with config/constants."""
    path = str(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_csv(summary))
    meta_lines = []
    for key, val in summary.metadata.items():
        if key == "config":
            continue
        meta_lines.append(f"{key} = {val}")
    config_echo = summary.metadata.get("config", "")
    body = "\n".join(meta_lines) + "\n# config\n" + config_echo
    with open(path + ".meta", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(body)


@dataclass
class CheckResult:
    name: str
    passed: bool
    first_violation: Optional[int] = None


def _result(name: str, violations: np.ndarray) -> CheckResult:
    ok = violations.size == 0
    return CheckResult(name, ok, None if ok else int(violations[0]))


def verify_suite(k_max: int, extra_schedules: Optional[dict] = None) -> list[CheckResult]:
    """Machine-check the stepsize conditions and cumulative-weight bounds."""
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    named = {"tseng": TsengStepsize(), "nesterov": NesterovStepsize()}
    results = []
    for name, sched in named.items():
        results.append(_result(f"step_condition[{name}]",
                               step_condition_violations(sched, k_max)))
    for name, sched in named.items():
        results.append(_result(f"alpha_sq_sum[{name}]",
                               alpha_sq_sum_violations(sched, k_max)))
    for a in (0.1, 1.0, 10.0):
        results.append(_result(f"sqrt_sum_growth[a={a:g}]",
                               sqrt_sum_growth_violations(a, k_max)))
    for name, sched in named.items():
        results.append(_result(f"alpha_cap[{name}]",
                               alpha_cap_violations(sched, k_max)))
    for name, sched in (extra_schedules or {}).items():
        results.append(_result(f"step_condition[{name}]",
                               step_condition_violations(sched, k_max)))
    return results


__all__ = [
    "COMPACT", "STRONGLY_CONVEX", "CheckResult", "ConfigError", "ExperimentConfig",
    "McSummary", "bound_curve", "build_instance", "config_hash", "config_text",
    "emit_csv", "format_csv", "instance_constants", "parse_config", "parse_csv",
    "run_experiment", "sweep_a", "verify_suite",
]
