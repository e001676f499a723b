"""
Constructive geometry built on sparse convex combinations: Birkhoff-von Neumann
decompositions (exact and sampled), rainbow search over color classes,
concurrent closeness of hulls, and Tverberg partitions.
"""

import math
from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from .caratheodory import sample_count, sample_until
from .core import (
    INF,
    InputError,
    NormSpec,
    PointSet,
    as_matrix,
    as_vector,
    make_rng,
    p_norm,
)
from .subproblems import (
    SOLVE_TOL,
    LPStatus,
    Polytope,
    min_norm_over_hull,
    norm_gradient,
    solve_lp,
)
from .utils import console, first_accepted

STOCHASTIC_TOL = 1e-9
MATCH_TOL = 1e-10
SEARCH_LIMIT = 10**6
DEFAULT_STARTS = 10
DEFAULT_ITERATIONS = 2000
MAX_SETS = 6
MAX_SET_POINTS = 12
MAX_DIM = 4


@dataclass
class DoublyStochastic:
    D: np.ndarray

    def __post_init__(self) -> None:
        self.D = as_matrix(self.D, "D")
        d = self.D.shape[0]
        if self.D.shape != (d, d):
            raise InputError("D", f"must be square, got shape {self.D.shape}")
        if self.D.min() < -STOCHASTIC_TOL:
            raise InputError("D", "entries must be non-negative")
        if np.max(np.abs(self.D.sum(axis=1) - 1.0)) > STOCHASTIC_TOL:
            raise InputError("D", "row sums must equal 1")
        if np.max(np.abs(self.D.sum(axis=0) - 1.0)) > STOCHASTIC_TOL:
            raise InputError("D", "column sums must equal 1")
        self.D = np.clip(self.D, 0.0, None)

    @property
    def d(self) -> int:
        return int(self.D.shape[0])


def permutation_matrix(perm: Sequence[int]) -> np.ndarray:
    """P with P[i, perm[i]] = 1."""
    P = np.zeros((len(perm), len(perm)))
    P[np.arange(len(perm)), list(perm)] = 1.0
    return P


@dataclass
class PermutationDecomposition:
    perms: List[Tuple[int, ...]]
    weights: List[float]
    error: Optional[float] = None
    best_effort: bool = False

    def matrix(self) -> np.ndarray:
        """sum_i w_i P_i."""
        d = len(self.perms[0])
        total = np.zeros((d, d))
        for perm, weight in zip(self.perms, self.weights):
            total[np.arange(d), list(perm)] += weight
        return total

    def to_dict(self) -> Dict[str, Any]:
        payload: Dict[str, Any] = {
            "status": "OK",
            "perms": [list(perm) for perm in self.perms],
            "weights": list(self.weights),
        }
        if self.error is not None:
            payload["error"] = self.error
            payload["best_effort"] = self.best_effort
        return payload


def birkhoff_decompose(D: DoublyStochastic, match_tol: float = MATCH_TOL) -> PermutationDecomposition:
    """
    Exact Birkhoff-von Neumann decomposition.

    Each round finds a perfect matching on the entries above ``match_tol``
    (maximum-weight assignment) and subtracts its smallest matched entry.
    Mass left below tolerance is folded into the last weight.

    Raises:
        InputError: If no perfect matching exists while mass remains
    """
    d = D.d
    residual = D.D.copy()
    perms: List[Tuple[int, ...]] = []
    weights: List[float] = []
    rows = np.arange(d)
    big = float(d * d + 1)

    while residual.max() > match_tol:
        support = residual > match_tol
        cost = np.where(support, -residual, big)
        _, cols = linear_sum_assignment(cost)
        if not np.all(support[rows, cols]):
            remaining = float(residual.sum())
            if remaining < d * d * match_tol * 10:
                break
            raise InputError("D", f"no perfect matching on the remaining support (mass {remaining:.3g})")
        weight = float(residual[rows, cols].min())
        residual[rows, cols] -= weight
        residual[residual <= match_tol] = 0.0
        perms.append(tuple(int(c) for c in cols))
        weights.append(weight)

    if not perms:
        raise InputError("D", "matrix has no mass above the matching tolerance")
    weights[-1] += 1.0 - sum(weights)
    return PermutationDecomposition(perms, weights)


def bvn_exponent(d: int) -> float:
    return math.log2(max(d, 4))


def approx_bvn(
    D: DoublyStochastic, eps: float, seed: int, max_retries: int = 32
) -> PermutationDecomposition:
    """
    Sparse approximate decomposition: k permutations with weight 1/k each and
    max_ij |D - D'| <= eps.

    Permutation matrices are sampled from the exact decomposition with
    k = sample_count(p, d^(1/p), eps), p = log2(max(d, 4)).
    """
    if not eps > 0:
        raise InputError("eps", "must be positive")
    exact = birkhoff_decompose(D)
    d = D.d
    points = PointSet(np.array([permutation_matrix(perm).ravel() for perm in exact.perms]))
    norm = NormSpec(bvn_exponent(d))
    k = sample_count(norm.p, points.gamma(norm), eps)
    target = D.D.ravel()

    combination, error, _, best_effort = sample_until(
        points.points,
        np.asarray(exact.weights),
        k,
        lambda sample: p_norm(target - sample, INF),
        eps,
        max_retries,
        seed,
    )
    if best_effort:
        console.print(f"[yellow]Warning:[/yellow] no draw within {eps:g} after {max_retries} retries")
    perms = [exact.perms[index] for index in combination.multiset]
    return PermutationDecomposition(perms, [1.0 / k] * k, error, best_effort)


@dataclass
class ColorClasses:
    classes: List[PointSet]
    mu: np.ndarray

    def __post_init__(self) -> None:
        self.mu = as_vector(self.mu, "mu")
        d = self.mu.size
        if len(self.classes) != d + 1:
            raise InputError("classes", f"expected {d + 1} color classes in dimension {d}")
        for index, points in enumerate(self.classes):
            if points.dim != d:
                raise InputError("classes", f"class {index} has dimension {points.dim}, expected {d}")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ColorClasses":
        if not isinstance(data, dict) or "classes" not in data or "mu" not in data:
            raise InputError("classes", "expected a JSON object with 'classes' and 'mu'")
        if not isinstance(data["classes"], list):
            raise InputError("classes", "must be a list of point lists")
        return cls([PointSet(points, "classes") for points in data["classes"]], data["mu"])


@dataclass(frozen=True)
class Rainbow:
    indices: Tuple[int, ...]


@dataclass
class RainbowResult:
    found: bool
    rainbow: Optional[Rainbow] = None
    weights: Optional[np.ndarray] = None
    point: Optional[np.ndarray] = None
    distance: Optional[float] = None
    examined: int = 0

    def to_dict(self) -> Dict[str, Any]:
        if not self.found:
            return {"status": "NOT_FOUND", "examined": self.examined}
        assert self.rainbow is not None and self.weights is not None and self.point is not None
        return {
            "status": "OK",
            "rainbow": list(self.rainbow.indices),
            "weights": self.weights.tolist(),
            "point": self.point.tolist(),
            "distance": self.distance,
            "examined": self.examined,
        }


def find_rainbow(
    cc: ColorClasses, eps: float, norm: NormSpec, workers: Optional[int] = None
) -> RainbowResult:
    """
    First rainbow, in lexicographic order of class indices, whose hull is
    within ``eps`` of ``mu``; the witness distance is recomputed before returning.
    """
    sizes = [points.n for points in cc.classes]
    if math.prod(sizes) > SEARCH_LIMIT:
        raise InputError("classes", f"{math.prod(sizes)} rainbows exceed the search limit {SEARCH_LIMIT}")

    def evaluate(choice: Tuple[int, ...]) -> Optional[Tuple[np.ndarray, np.ndarray, float]]:
        rainbow = PointSet(np.array([cc.classes[c].points[i] for c, i in enumerate(choice)]))
        distance, weights = min_norm_over_hull(rainbow, cc.mu, norm)
        if distance > eps:
            return None
        point = weights @ rainbow.points
        recomputed = p_norm(cc.mu - point, norm)
        if recomputed > eps + SOLVE_TOL:
            return None
        return weights, point, recomputed

    accepted = first_accepted(product(*(range(size) for size in sizes)), evaluate, workers)
    if accepted is None:
        return RainbowResult(False, examined=math.prod(sizes))
    index, choice, (weights, point, distance) = accepted
    return RainbowResult(True, Rainbow(tuple(choice)), weights, point, distance, index + 1)


@dataclass
class ClosenessResult:
    close: bool
    mu: Optional[np.ndarray]
    value: float
    lower_bound: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "close": self.close,
            "mu": None if self.mu is None else self.mu.tolist(),
            "value": self.value,
            "lower_bound": self.lower_bound,
        }


def _max_norm_center(sets: Sequence[PointSet]) -> Tuple[float, np.ndarray]:
    """min over mu of max_i dist_inf(mu, conv V_i), solved as one LP."""
    d = sets[0].dim
    counts = [s.n for s in sets]
    size = d + sum(counts) + 1
    it = size - 1
    rows: List[np.ndarray] = []
    rhs: List[float] = []
    a_eq = np.zeros((len(sets), size))
    offset = d
    for index, points in enumerate(sets):
        block = slice(offset, offset + points.n)
        a_eq[index, block] = 1.0
        for coord in range(d):
            for sign in (1.0, -1.0):
                row = np.zeros(size)
                row[coord] = sign
                row[block] = -sign * points.points[:, coord]
                row[it] = -1.0
                rows.append(row)
                rhs.append(0.0)
        offset += points.n
    lower = np.zeros(size)
    lower[:d] = -np.inf
    objective = np.zeros(size)
    objective[it] = 1.0
    polytope = Polytope(size, np.array(rows), np.array(rhs), a_eq, np.ones(len(sets)), lower)
    solution = solve_lp(objective, polytope)
    if solution.status is not LPStatus.OPTIMAL:
        raise InputError("sets", "could not bound the common center")
    return max(0.0, solution.objective), solution.point[:d].copy()


def _worst_distance(
    sets: Sequence[PointSet], mu: np.ndarray, norm: NormSpec, starts: Optional[List[np.ndarray]] = None
) -> Tuple[float, int, np.ndarray, List[np.ndarray]]:
    distances = []
    weights_all = []
    for index, points in enumerate(sets):
        start = None if starts is None else starts[index]
        distance, weights = min_norm_over_hull(points, mu, norm, start=start)
        distances.append(distance)
        weights_all.append(weights)
    worst = int(np.argmax(distances))
    nearest = weights_all[worst] @ sets[worst].points
    return distances[worst], worst, nearest, weights_all


def concurrently_close(
    sets: Sequence[PointSet],
    eps: float,
    norm: NormSpec,
    starts: int = DEFAULT_STARTS,
    iterations: int = DEFAULT_ITERATIONS,
    seed: int = 0,
    solve_tol: float = SOLVE_TOL,
) -> ClosenessResult:
    """
    Decide whether some mu lies within ``eps`` of every hull conv(V_i).

    f(mu) = max_i dist_p(mu, conv V_i) is bracketed first by the max-norm
    min-max LP (a lower bound; exact for the max-norm) and by f at the LP
    center. Undecided cases run multi-start subgradient descent with step
    c / sqrt(t), starting from the grand centroid.
    """
    if not sets:
        raise InputError("sets", "need at least one point set")
    if len(sets) > MAX_SETS:
        raise InputError("sets", f"at most {MAX_SETS} sets supported")
    d = sets[0].dim
    for points in sets:
        if points.dim != d:
            raise InputError("sets", "all point sets must share one dimension")
        if points.n > MAX_SET_POINTS:
            raise InputError("sets", f"each set may hold at most {MAX_SET_POINTS} points")
    if d > MAX_DIM:
        raise InputError("sets", f"dimension at most {MAX_DIM} supported")

    lower, center = _max_norm_center(sets)
    if norm.is_inf or lower > eps + solve_tol:
        value = _worst_distance(sets, center, norm)[0] if not norm.is_inf else lower
        return ClosenessResult(value <= eps + solve_tol, center, value, lower)

    best_value, _, _, _ = _worst_distance(sets, center, norm)
    best_mu = center
    if best_value <= eps + solve_tol:
        return ClosenessResult(True, best_mu, best_value, lower)

    everything = np.vstack([points.points for points in sets])
    scale = max(float(np.ptp(everything, axis=0).max()), 1e-12)
    rng = make_rng(seed)
    initial = [everything.mean(axis=0), center]
    while len(initial) < starts:
        initial.append(rng.dirichlet(np.ones(everything.shape[0])) @ everything)

    for mu in initial[:starts]:
        warm: Optional[List[np.ndarray]] = None
        for t in range(1, iterations + 1):
            value, _, nearest, warm = _worst_distance(sets, mu, norm, warm)
            if value < best_value:
                best_value, best_mu = value, mu.copy()
            if best_value <= eps + solve_tol or value <= lower + solve_tol:
                break
            gradient = norm_gradient(mu - nearest, norm)
            size = float(np.linalg.norm(gradient))
            if size == 0.0:
                break
            mu = mu - (0.5 * scale / math.sqrt(t)) * gradient / size
        if best_value <= eps + solve_tol:
            break
    return ClosenessResult(best_value <= eps + solve_tol, best_mu, best_value, lower)


@dataclass
class TverbergInstance:
    X: PointSet
    r: int
    eps: float
    norm: NormSpec

    def __post_init__(self) -> None:
        if self.r < 2:
            raise InputError("r", "need at least 2 parts")
        if not self.eps > 0:
            raise InputError("eps", "must be positive")
        expected = (self.r - 1) * (self.X.dim + 1) + 1
        if self.X.n != expected:
            raise InputError("points", f"expected (r-1)(d+1)+1 = {expected} points, got {self.X.n}")

    def part_cap(self) -> int:
        """Largest size of a core part: the sample count for the instance, capped by what fits."""
        room = self.X.n - (self.r - 1)
        if self.norm.is_inf:
            return room
        gamma = self.X.gamma(self.norm)
        if gamma == 0.0:
            return 1
        return min(room, sample_count(self.norm.p, gamma, self.eps))


@dataclass
class TverbergResult:
    found: bool
    parts: List[List[int]] = field(default_factory=list)
    core: List[List[int]] = field(default_factory=list)
    mu: Optional[np.ndarray] = None
    distance: Optional[float] = None
    examined: int = 0

    def to_dict(self) -> Dict[str, Any]:
        if not self.found:
            return {"status": "NOT_FOUND", "examined": self.examined}
        assert self.mu is not None
        return {
            "status": "OK",
            "parts": self.parts,
            "core": self.core,
            "mu": self.mu.tolist(),
            "distance": self.distance,
            "examined": self.examined,
        }


def set_partitions(items: Sequence[int], parts: int, max_block: int) -> Iterator[List[List[int]]]:
    """
    Partitions of ``items`` into exactly ``parts`` non-empty blocks of size at
    most ``max_block``, as restricted growth strings in lexicographic order.
    """
    n = len(items)
    labels = [0] * n

    def extend(position: int, used: int, sizes: List[int]) -> Iterator[List[List[int]]]:
        if n - position < parts - used:
            return
        if position == n:
            if used == parts:
                blocks: List[List[int]] = [[] for _ in range(parts)]
                for item, label in zip(items, labels):
                    blocks[label].append(item)
                yield blocks
            return
        for label in range(min(used + 1, parts)):
            if label < used and sizes[label] >= max_block:
                continue
            labels[position] = label
            if label == used:
                yield from extend(position + 1, used + 1, sizes + [1])
            else:
                sizes[label] += 1
                yield from extend(position + 1, used, sizes)
                sizes[label] -= 1

    yield from extend(0, 0, [])


def _core_candidates(n: int, r: int, t: int) -> Iterator[List[List[int]]]:
    for total in range(r, min(n, r * t) + 1):
        for chosen in combinations(range(n), total):
            yield from set_partitions(chosen, r, t)


def find_tverberg_partition(
    inst: TverbergInstance,
    starts: int = DEFAULT_STARTS,
    iterations: int = DEFAULT_ITERATIONS,
    seed: int = 0,
    workers: Optional[int] = None,
) -> TverbergResult:
    """
    Search for r disjoint core parts of size at most t whose hulls are
    concurrently eps-close, smallest total size first; the remaining points
    are then dealt round-robin to the parts.
    """
    if inst.r > 3 or inst.X.dim > 3:
        raise InputError("r", "exhaustive Tverberg search supports r <= 3 and d <= 3")
    t = inst.part_cap()
    console.print(f"[blue]Tverberg[/blue] r={inst.r}: core parts of size <= {t}")

    def evaluate(blocks: List[List[int]]) -> Optional[ClosenessResult]:
        sets = [PointSet(inst.X.points[block]) for block in blocks]
        result = concurrently_close(sets, inst.eps, inst.norm, starts, iterations, seed)
        return result if result.close else None

    accepted = first_accepted(_core_candidates(inst.X.n, inst.r, t), evaluate, workers)
    if accepted is None:
        return TverbergResult(False)
    index, core, closeness = accepted
    parts = [list(block) for block in core]
    used = {i for block in core for i in block}
    for position, point in enumerate(i for i in range(inst.X.n) if i not in used):
        parts[position % inst.r].append(point)
    return TverbergResult(
        True,
        [sorted(part) for part in parts],
        [list(block) for block in core],
        closeness.mu,
        closeness.value,
        index + 1,
    )
