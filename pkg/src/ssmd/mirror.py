"""Distance-generating functions, Bregman distances, and the prox step.

Two maps are shipped: the Euclidean half-squared-norm (the workhorse, for
which the prox step is an exact Euclidean projection) and negative entropy
on the probability simplex (multiplicative-weights prox).  The underlying
norm is l2 throughout, so the dual norm coincides with it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EUCLIDEAN = "euclidean"
NEG_ENTROPY = "negative_entropy"

# Feasibility tolerance (l-inf on constraint violations) for prox preconditions.
FEAS_TOL = 1e-9


@dataclass(frozen=True)
class MirrorMap:
    """A strongly convex distance generator.

    ``mu_w`` is the strong-convexity modulus with respect to the l2 norm on
    the map's paired domain.  ``satisfies_quadratic_upper_bound`` records
    whether D_w(x, z) <= 0.5*||x - z||^2 holds everywhere on that domain;
    the strongly convex solver requires it.
    """

    kind: str
    mu_w: float
    satisfies_quadratic_upper_bound: bool

    def __post_init__(self):
        if self.kind not in (EUCLIDEAN, NEG_ENTROPY):
            raise ValueError(f"unknown mirror map kind: {self.kind!r}")
        if self.mu_w <= 0.0:
            raise ValueError("mu_w must be positive")
        if self.kind == EUCLIDEAN and (
            self.mu_w != 1.0 or not self.satisfies_quadratic_upper_bound
        ):
            raise ValueError("euclidean map has mu_w = 1 and the quadratic upper bound")
        if self.kind == NEG_ENTROPY and self.satisfies_quadratic_upper_bound:
            raise ValueError("negative entropy does not satisfy the quadratic upper bound")

    @staticmethod
    def euclidean() -> "MirrorMap":
        return MirrorMap(EUCLIDEAN, 1.0, True)

    @staticmethod
    def negative_entropy() -> "MirrorMap":
        # Strong convexity modulus 1 w.r.t. l2 holds on the simplex, where
        # the entropy Hessian diag(1/x_i) dominates the identity.
        return MirrorMap(NEG_ENTROPY, 1.0, False)


def _check_pair(x, z):
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    if x.shape != z.shape or x.ndim != 1:
        raise ValueError(f"dimension mismatch: {x.shape} vs {z.shape}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(z))):
        raise ValueError("non-finite components")
    return x, z


def grad_w(mirror_map: MirrorMap, x) -> np.ndarray:
    """Gradient of the distance generator w at x."""
    x = np.asarray(x, dtype=float)
    if mirror_map.kind == EUCLIDEAN:
        return x.copy()
    if np.any(x <= 0.0):
        raise ValueError("negative entropy requires strictly positive components")
    return 1.0 + np.log(x)


def bregman(mirror_map: MirrorMap, x, z) -> float:
    """Bregman distance D_w(x, z) = w(z) - w(x) - <grad w(x), z - x>."""
    x, z = _check_pair(x, z)
    if mirror_map.kind == EUCLIDEAN:
        d = z - x
        return 0.5 * float(d @ d)
    if np.any(x <= 0.0) or np.any(z <= 0.0):
        raise ValueError("negative entropy requires strictly positive components")
    # Generalized KL; the linear correction vanishes on the simplex.
    return float(np.sum(z * np.log(z / x)) + np.sum(x) - np.sum(z))


def prox_step(mirror_map: MirrorMap, feasible_set, x, g, alpha: float) -> np.ndarray:
    """One mirror-descent step: argmin_{z in X} alpha*<g, z - x> + D_w(x, z).

    For the Euclidean map this is the projection of x - alpha*g onto X; for
    negative entropy on the simplex it is the multiplicative-weights update.
    """
    x, g = _check_pair(x, g)
    if alpha <= 0.0:
        raise ValueError("alpha must be positive")
    if not feasible_set.contains(x, FEAS_TOL):
        raise ValueError("prox step requires a feasible base point")
    if mirror_map.kind == EUCLIDEAN:
        return feasible_set.project(x - alpha * g)
    if getattr(feasible_set, "is_simplex", False):
        logits = np.log(x) - alpha * g
        y = np.exp(logits - logits.max())
        return y / y.sum()
    raise ValueError("negative entropy is only paired with a simplex set")


def check_quadratic_upper_bound(mirror_map: MirrorMap, samples, tol: float = 1e-12) -> bool:
    """True iff D_w(x, z) <= 0.5*||x - z||^2 + tol for every sample pair."""
    for x, z in samples:
        x = np.asarray(x, dtype=float)
        z = np.asarray(z, dtype=float)
        d = z - x
        if bregman(mirror_map, x, z) > 0.5 * float(d @ d) + tol:
            return False
    return True
