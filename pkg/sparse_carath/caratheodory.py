"""Constructive approximate Carathéodory: sampling sparsifiers, Khintchine check, enumeration."""

import math
from dataclasses import dataclass
from itertools import combinations_with_replacement
from typing import Callable, Iterator, Optional, Sequence, Tuple

import numpy as np

from .core import (
    INF,
    InputError,
    NormSpec,
    PointSet,
    UniformCombination,
    as_vector,
    combination_vector,
    make_rng,
    p_norm,
)

DEFAULT_MAX_RETRIES = 32
DEFAULT_DELTA_FAIL = 0.1
HOEFFDING_CONSTANT = 2.0
WEIGHT_TOL = 1e-9


@dataclass
class SparsifyRequest:
    """A target in conv(X) together with the convex weights that generate it."""

    X: PointSet
    mu: np.ndarray
    weights: Optional[np.ndarray]
    eps: float
    norm: NormSpec
    max_retries: int = DEFAULT_MAX_RETRIES

    def __post_init__(self) -> None:
        self.mu = as_vector(self.mu, "target")
        if self.mu.size != self.X.dim:
            raise InputError("target", f"dimension {self.mu.size} does not match points ({self.X.dim})")
        if not self.eps > 0:
            raise InputError("eps", "must be positive")
        if self.max_retries < 1:
            raise InputError("max_retries", "must be at least 1")
        if self.weights is not None:
            self.weights = as_vector(self.weights, "weights")
            if self.weights.size != self.X.n:
                raise InputError("weights", f"expected {self.X.n} weights, got {self.weights.size}")
            if self.weights.min() < 0 or abs(self.weights.sum() - 1.0) > WEIGHT_TOL:
                raise InputError("weights", "must be non-negative and sum to 1")
            generated = self.weights @ self.X.points
            if np.max(np.abs(generated - self.mu)) > WEIGHT_TOL:
                raise InputError("weights", "do not generate the target")


@dataclass
class SparsifyResult:
    combination: UniformCombination
    achieved_distance: float
    sample_count_m: int
    retries_used: int
    best_effort: bool = False

    def to_dict(self) -> dict:
        return {
            "multiset": list(self.combination.multiset),
            "achieved_distance": self.achieved_distance,
            "sample_count_m": self.sample_count_m,
            "retries_used": self.retries_used,
            "best_effort": self.best_effort,
        }


def sample_count(p: float, gamma: float, eps: float) -> int:
    """Number of samples ceil(4 p gamma^2 / eps^2) that makes the expected p-distance <= eps."""
    if not (p >= 2 and math.isfinite(p)):
        raise InputError("p", "must be a finite exponent >= 2")
    if not gamma > 0:
        raise InputError("gamma", "must be positive")
    if not eps > 0:
        raise InputError("eps", "must be positive")
    return max(1, math.ceil(4.0 * p * gamma * gamma / (eps * eps) - 1e-9))


def infinity_sample_count(n: int, eps: float, delta_fail: float = DEFAULT_DELTA_FAIL) -> int:
    """Hoeffding count ceil(2 ln(2n/delta) / eps^2) for entries in [-1, 1]."""
    if not eps > 0:
        raise InputError("eps", "must be positive")
    if not 0 < delta_fail < 1:
        raise InputError("delta_fail", "must lie in (0, 1)")
    return max(1, math.ceil(HOEFFDING_CONSTANT * math.log(2.0 * n / delta_fail) / (eps * eps)))


def draw_indices(weights: np.ndarray, m: int, rng: np.random.Generator) -> np.ndarray:
    """Inverse-CDF sampling of ``m`` i.i.d. indices from ``weights``."""
    cdf = np.cumsum(weights)
    draws = rng.random(m) * cdf[-1]
    indices = np.searchsorted(cdf, draws, side="right")
    return np.minimum(indices, weights.size - 1)


def sample_until(
    points: np.ndarray,
    weights: np.ndarray,
    m: int,
    distance: Callable[[np.ndarray], float],
    threshold: float,
    max_retries: int,
    seed: int,
) -> Tuple[UniformCombination, float, int, bool]:
    """
    Draw m-sample means until ``distance`` is within ``threshold``.

    Retry ``r`` uses the sub-stream ``(seed, r)``. The best draw is kept.

    Returns:
        (combination, distance, retries used, best_effort flag)
    """
    best: Optional[Tuple[UniformCombination, float]] = None
    retries_used = 0
    for retry in range(max_retries):
        retries_used = retry + 1
        indices = draw_indices(weights, m, make_rng(seed, retry))
        combination = UniformCombination.of(indices)
        value = distance(combination.weights(points.shape[0]) @ points)
        if best is None or value < best[1]:
            best = (combination, value)
        if value <= threshold:
            break
    assert best is not None
    return best[0], best[1], retries_used, best[1] > threshold


def _require_weights(req: SparsifyRequest) -> np.ndarray:
    if req.weights is None:
        raise InputError("weights", "weights required: supply the convex weights generating the target")
    return req.weights


def sparsify(req: SparsifyRequest, seed: int) -> SparsifyResult:
    """
    Sparsify ``req.mu`` to a uniform combination of m = sample_count(p, gamma, eps) points.

    Each attempt succeeds (distance <= 2 eps) with probability at least 1/2.
    """
    weights = _require_weights(req)
    if req.norm.is_inf:
        raise InputError("norm", "use sparsify_infinity for the max-norm")

    gamma = req.X.gamma(req.norm)
    m = sample_count(req.norm.p, gamma, req.eps) if gamma > 0 else 1
    combination, _, retries, best_effort = sample_until(
        req.X.points,
        weights,
        m,
        lambda point: p_norm(req.mu - point, req.norm),
        2.0 * req.eps,
        req.max_retries,
        seed,
    )
    return SparsifyResult(combination, _recompute(req, combination), m, retries, best_effort)


def sparsify_infinity(
    req: SparsifyRequest, seed: int, delta_fail: float = DEFAULT_DELTA_FAIL
) -> SparsifyResult:
    """Max-norm sparsification for points in the unit max-norm ball (Hoeffding sample count)."""
    weights = _require_weights(req)
    if req.X.gamma(INF) > 1.0 + WEIGHT_TOL:
        raise InputError("points", "max-norm of every point must be at most 1")

    m = infinity_sample_count(max(req.X.n, req.X.dim), req.eps, delta_fail)
    combination, _, retries, best_effort = sample_until(
        req.X.points,
        weights,
        m,
        lambda point: p_norm(req.mu - point, INF),
        req.eps,
        req.max_retries,
        seed,
    )
    distance = p_norm(req.mu - combination_vector(combination, req.X), INF)
    return SparsifyResult(combination, distance, m, retries, best_effort)


def _recompute(req: SparsifyRequest, combination: UniformCombination) -> float:
    return p_norm(req.mu - combination_vector(combination, req.X), req.norm)


def khintchine_check(
    U: Sequence[np.ndarray], norm: NormSpec, trials: int, seed: int
) -> Tuple[float, float]:
    """
    Empirical mean of ||sum r_i u_i||_p over Rademacher signs, and the bound
    sqrt(p) * (sum ||u_i||_p^2)^(1/2).
    """
    if norm.is_inf:
        raise InputError("p", "Khintchine check needs a finite exponent")
    if trials < 100:
        raise InputError("trials", "need at least 100 trials")
    vectors = np.vstack([as_vector(u, "vectors") for u in U])

    signs = make_rng(seed).choice(np.array([-1.0, 1.0]), size=(trials, vectors.shape[0]))
    sums = signs @ vectors
    lhs = float(np.mean([p_norm(row, norm) for row in sums]))
    rhs = math.sqrt(norm.p) * math.sqrt(sum(p_norm(u, norm) ** 2 for u in vectors))
    return lhs, rhs


def multisets_of_size(n: int, size: int) -> Iterator[UniformCombination]:
    """All multisets of exactly ``size`` indices from range(n), lexicographic."""
    for indices in combinations_with_replacement(range(n), size):
        yield UniformCombination(indices)


def enumerate_uniform(X: PointSet, k: int) -> Iterator[UniformCombination]:
    """Every multiset of size 1..k over the points of X, sizes ascending, lexicographic within size."""
    if k < 1:
        raise InputError("k", "must be at least 1")
    for size in range(1, k + 1):
        yield from multisets_of_size(X.n, size)


def count_uniform(n: int, k: int) -> int:
    """Number of items produced by ``enumerate_uniform`` for n points."""
    return math.comb(n + k, k) - 1

