"""
Dense subgraph search through the quadratic program max x^T (A/2 + I) x over
the simplex capped at 1/k, with 0-or-1/k rounding, plus the bipartite variant.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from .caratheodory import enumerate_uniform
from .core import InfeasiblePointError, InputError, PointSet, combination_vector
from .nash import SolveConfig
from .subproblems import FEAS_TOL, LPStatus, Polytope, solve_lp
from .utils import console

BRUTE_FORCE_LIMIT = 10**6
BRUTE_FORCE_BATCH = 20000
DEFAULT_ASCENT_STEPS = 3
RATIONAL_DENOMINATOR = 10**12


@dataclass
class Graph:
    """Simple undirected graph on vertices 0..n-1."""

    n: int
    edges: FrozenSet[Tuple[int, int]]

    def __post_init__(self) -> None:
        if self.n < 1:
            raise InputError("n", "graph needs at least one vertex")
        normalized = set()
        for edge in self.edges:
            try:
                a, b = (int(v) for v in edge)
            except (TypeError, ValueError):
                raise InputError("edges", f"edge {edge!r} is not a pair of vertex ids")
            if a == b:
                raise InputError("edges", f"self-loop at vertex {a}")
            if not (0 <= a < self.n and 0 <= b < self.n):
                raise InputError("edges", f"edge ({a}, {b}) out of range for n={self.n}")
            pair = (min(a, b), max(a, b))
            if pair in normalized:
                raise InputError("edges", f"duplicate edge {pair}")
            normalized.add(pair)
        self.edges = frozenset(normalized)
        self._adjacency: Optional[np.ndarray] = None

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Graph":
        if not isinstance(data, dict) or "n" not in data:
            raise InputError("graph", "must be a JSON object with keys 'n' and 'edges'")
        n, edges = data["n"], data.get("edges", [])
        if isinstance(n, bool) or not isinstance(n, int):
            raise InputError("n", f"must be an integer, got {n!r}")
        if not isinstance(edges, list) or not all(isinstance(edge, list) and len(edge) == 2 for edge in edges):
            raise InputError("edges", "must be a list of [u, v] vertex pairs")
        return cls(n, frozenset(tuple(edge) for edge in edges))

    @classmethod
    def from_networkx(cls, G: nx.Graph) -> "Graph":
        """Relabel nodes to 0..n-1 in sorted order."""
        H = nx.convert_node_labels_to_integers(G, ordering="sorted")
        return cls(H.number_of_nodes(), frozenset(H.edges()))

    def to_networkx(self) -> nx.Graph:
        G = nx.Graph()
        G.add_nodes_from(range(self.n))
        G.add_edges_from(self.edges)
        return G

    def to_dict(self) -> Dict[str, Any]:
        return {"n": self.n, "edges": [list(edge) for edge in sorted(self.edges)]}

    @property
    def adjacency(self) -> np.ndarray:
        if self._adjacency is None:
            A = np.zeros((self.n, self.n))
            for a, b in self.edges:
                A[a, b] = A[b, a] = 1.0
            A.setflags(write=False)
            self._adjacency = A
        return self._adjacency

    @property
    def max_degree(self) -> int:
        return int(self.adjacency.sum(axis=1).max())


def subgraph_density(graph: Graph, vertices: Sequence[int]) -> float:
    """|E_S| / |S|^2."""
    index = list(vertices)
    return float(graph.adjacency[np.ix_(index, index)].sum() / 2.0) / (len(index) ** 2)


def bipartite_density(graph: Graph, S: Sequence[int], T: Sequence[int]) -> float:
    """1_S^T A 1_T / (|S| |T|): adjacent ordered pairs with one end in S and the other in T."""
    return float(graph.adjacency[np.ix_(list(S), list(T))].sum()) / (len(S) * len(T))


@dataclass
class NDkSInstance:
    graph: Graph
    k: int

    def __post_init__(self) -> None:
        if not 2 <= self.k <= self.graph.n:
            raise InputError("k", f"must satisfy 2 <= k <= n={self.graph.n}")
        self.Cq = 0.5 * self.graph.adjacency + np.eye(self.graph.n)

    @property
    def cap(self) -> float:
        return 1.0 / self.k

    def feasible_region(self) -> Polytope:
        return Polytope.simplex(self.graph.n, self.cap)


@dataclass
class SubgraphSolution:
    vertices: Tuple[int, ...]
    density: float

    def to_dict(self) -> Dict[str, Any]:
        return {"status": "OK", "vertices": list(self.vertices), "density": self.density}


@dataclass
class BipartiteSolution:
    S: Tuple[int, ...]
    T: Tuple[int, ...]
    density: float

    def to_dict(self) -> Dict[str, Any]:
        return {"status": "OK", "S": list(self.S), "T": list(self.T), "density": self.density}


def _check_capped_simplex(x: np.ndarray, cap: float, feas_tol: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise InputError("x", "must be a vector")
    if x.min() < -feas_tol:
        raise InfeasiblePointError(f"x_{int(np.argmin(x))} >= 0", float(-x.min()))
    if x.max() > cap + feas_tol:
        raise InfeasiblePointError(f"x_{int(np.argmax(x))} <= 1/k", float(x.max() - cap))
    if abs(x.sum() - 1.0) > feas_tol:
        raise InfeasiblePointError("sum x = 1", float(abs(x.sum() - 1.0)))
    return x


def qp_value(inst: NDkSInstance, x: np.ndarray, feas_tol: float = FEAS_TOL) -> float:
    """x^T (A/2 + I) x for x in the simplex capped at 1/k."""
    x = _check_capped_simplex(x, inst.cap, feas_tol)
    if x.size != inst.graph.n:
        raise InputError("x", f"expected {inst.graph.n} entries")
    return float(x @ inst.Cq @ x)


def _to_rational(inst: NDkSInstance, y: np.ndarray) -> List[Fraction]:
    """Rational copy of y, clipped to [0, 1/k] and repaired to sum exactly to 1."""
    cap = Fraction(1, inst.k)
    z = [min(max(Fraction(float(v)).limit_denominator(RATIONAL_DENOMINATOR), Fraction(0)), cap) for v in y]
    missing = 1 - sum(z, Fraction(0))
    for i in range(len(z)):
        if missing == 0:
            break
        if missing > 0:
            step = min(missing, cap - z[i])
        else:
            step = -min(-missing, z[i])
        z[i] += step
        missing -= step
    return z


def round_to_uniform_exact(inst: NDkSInstance, y: np.ndarray) -> Tuple[List[Fraction], int]:
    """
    Mass-transfer rounding in rational arithmetic.

    While two coordinates i < j lie strictly between 0 and 1/k, mass moves
    from j to i when (C z)_i >= (C z)_j (and the other way otherwise) until
    one of them reaches 0 or 1/k.

    With gamma_i = (1/2) sum of z over the neighbours of i, (C z)_i is
    gamma_i + z_i, so for a non-adjacent pair this is the gamma_i + z_i
    ordering. For an adjacent pair the shared terms z_i/2 and z_j/2 sit on
    both sides of the comparison. Either way the first-order change of
    z^T C z along e_i - e_j is 2((C z)_i - (C z)_j) and the second-order
    coefficient C_ii + C_jj - 2 C_ij is 2 (non-adjacent) or 1 (adjacent),
    so the value never drops. Every transfer fixes a coordinate at 0 or 1/k,
    so there are at most n transfers.

    Returns:
        (z with every entry 0 or 1/k, number of transfers)
    """
    _check_capped_simplex(y, inst.cap, 1e-7)
    cap = Fraction(1, inst.k)
    z = _to_rational(inst, y)
    half_adjacency = [[Fraction(int(v), 2) for v in row] for row in inst.graph.adjacency]
    iterations = 0

    while True:
        fractional = [i for i, value in enumerate(z) if 0 < value < cap]
        if len(fractional) < 2:
            break
        i, j = fractional[0], fractional[1]
        # (C z)_i with C = A/2 + I
        cz_i = z[i] + sum((half_adjacency[i][t] * z[t] for t in range(len(z))), Fraction(0))
        cz_j = z[j] + sum((half_adjacency[j][t] * z[t] for t in range(len(z))), Fraction(0))
        if cz_i >= cz_j:
            delta = min(z[j], cap - z[i])
            z[i] += delta
            z[j] -= delta
        else:
            delta = min(z[i], cap - z[j])
            z[j] += delta
            z[i] -= delta
        iterations += 1
    return z, iterations


def round_to_uniform(inst: NDkSInstance, y: np.ndarray) -> np.ndarray:
    """Round a feasible y to a 0-or-1/k point whose quadratic value is at least y's."""
    z, _ = round_to_uniform_exact(inst, y)
    return np.array([float(value) for value in z])


def _maximize_linear(inst: NDkSInstance, g: np.ndarray) -> Optional[np.ndarray]:
    solution = solve_lp(g, inst.feasible_region(), maximize=True)
    if solution.status is not LPStatus.OPTIMAL:
        return None
    x = np.clip(solution.point, 0.0, inst.cap)
    return x / x.sum()


def linearization_ascent(
    inst: NDkSInstance, z: np.ndarray, steps: int = DEFAULT_ASCENT_STEPS
) -> Tuple[np.ndarray, float]:
    """
    Improve a rounded point: maximize x.(C z) by LP, round, and repeat while the
    quadratic value strictly increases.
    """
    value = qp_value(inst, z, 1e-7)
    for _ in range(steps):
        candidate = _maximize_linear(inst, inst.Cq @ z)
        if candidate is None:
            break
        candidate = round_to_uniform(inst, candidate)
        candidate_value = qp_value(inst, candidate, 1e-7)
        if candidate_value <= value + 1e-12:
            break
        z, value = candidate, candidate_value
    return z, value


def _support(z: np.ndarray, k: int) -> Tuple[int, ...]:
    """The k largest coordinates (lowest ids first on ties); pads with low ids if needed."""
    order = sorted(range(z.size), key=lambda i: (-z[i], i))
    chosen = [i for i in order if z[i] > 0][:k]
    for i in range(z.size):
        if len(chosen) == k:
            break
        if i not in chosen:
            chosen.append(i)
    return tuple(sorted(chosen))


def _edge_bound(graph: Graph, k: int) -> float:
    """Largest density any k-set could have: min(k(k-1)/2, k d / 2) / k^2."""
    return min(k * (k - 1) / 2.0, k * graph.max_degree / 2.0) / (k * k)


def ndks_exponent(graph: Graph) -> float:
    return max(2.0, math.log2(graph.max_degree + 1))


def solve_ndks(
    inst: NDkSInstance, cfg: SolveConfig, ascent_steps: int = DEFAULT_ASCENT_STEPS
) -> SubgraphSolution:
    """
    Additive-eps normalized densest k-subgraph.

    For every uniform combination u of up to ceil(kappa p / eps^2) columns of
    A/2 + I (p = log2(d + 1), at least 2), maximize x.u over the capped simplex,
    round to a 0-or-1/k point and improve it by linearization ascent. The best
    rounded point wins; equal values keep the earlier candidate.
    """
    p = ndks_exponent(inst.graph)
    cap = cfg.multiset_cap(p)
    columns = PointSet.from_columns(inst.Cq)
    ceiling = _edge_bound(inst.graph, inst.k) + 1.0 / inst.k
    console.print(f"[blue]NDkS[/blue] k={inst.k}: multisets up to size {cap} (p={p:.4g})")

    best: Optional[Tuple[float, np.ndarray]] = None
    for combination in enumerate_uniform(columns, cap):
        x = _maximize_linear(inst, combination_vector(combination, columns))
        if x is None:
            continue
        z, value = linearization_ascent(inst, round_to_uniform(inst, x), ascent_steps)
        if best is None or value > best[0] + 1e-12:
            best = (value, z)
        if best[0] >= ceiling - 1e-12:
            break
    assert best is not None
    vertices = _support(best[1], inst.k)
    return SubgraphSolution(vertices, subgraph_density(inst.graph, vertices))


def _indicator_batches(n: int, k: int) -> Iterable[Tuple[List[Tuple[int, ...]], np.ndarray]]:
    subsets = combinations(range(n), k)
    while True:
        batch = [s for _, s in zip(range(BRUTE_FORCE_BATCH), subsets)]
        if not batch:
            return
        indicators = np.zeros((len(batch), n))
        for row, subset in enumerate(batch):
            indicators[row, list(subset)] = 1.0
        yield batch, indicators


def ndks_bruteforce(inst: NDkSInstance) -> SubgraphSolution:
    """Exact optimum over all k-subsets (first in lexicographic order on ties)."""
    n, k = inst.graph.n, inst.k
    if math.comb(n, k) > BRUTE_FORCE_LIMIT:
        raise InputError("k", f"C({n}, {k}) subsets exceed the brute-force limit {BRUTE_FORCE_LIMIT}")
    A = inst.graph.adjacency
    best: Optional[Tuple[float, Tuple[int, ...]]] = None
    for batch, indicators in _indicator_batches(n, k):
        edges = np.einsum("ij,jk,ik->i", indicators, A, indicators) / 2.0
        top = int(np.argmax(edges))
        if best is None or edges[top] > best[0]:
            best = (float(edges[top]), batch[top])
    assert best is not None
    return SubgraphSolution(best[1], best[0] / (k * k))


def _top_k(scores: np.ndarray, k: int) -> Tuple[int, ...]:
    order = sorted(range(scores.size), key=lambda i: (-scores[i], i))
    return tuple(sorted(order[:k]))


def dkbs_exponent(graph: Graph) -> float:
    return math.log2(max(graph.max_degree, 4))


def solve_dkbs(graph: Graph, k: int, cfg: SolveConfig) -> BipartiteSolution:
    """
    Additive-eps densest k x k bipartite subgraph (S and T may overlap).

    For each uniform combination u of columns of A: x maximizes x.u over the
    capped simplex and y maximizes (A^T x).y. Both are rounded to 0-or-1/k
    points by top-k selection (lowest ids first on ties), giving S and T.
    With T fixed, top-k(A 1_T) is an optimal basic solution of the x-side LP,
    so that S is tried as well and the denser pair is kept.
    """
    if not 1 <= k <= graph.n:
        raise InputError("k", f"must satisfy 1 <= k <= n={graph.n}")
    p = dkbs_exponent(graph)
    cap = cfg.multiset_cap(p)
    A = graph.adjacency
    columns = PointSet.from_columns(A)
    region = Polytope.simplex(graph.n, 1.0 / k)
    console.print(f"[blue]DkBS[/blue] k={k}: multisets up to size {cap} (p={p:.4g})")

    best: Optional[BipartiteSolution] = None
    for combination in enumerate_uniform(columns, cap):
        u = combination_vector(combination, columns)
        x = solve_lp(u, region, maximize=True)
        if x.status is not LPStatus.OPTIMAL:
            continue
        y = solve_lp(A.T @ x.point, region, maximize=True)
        if y.status is not LPStatus.OPTIMAL:
            continue
        T = _top_k(y.point, k)
        indicator = np.zeros(graph.n)
        indicator[list(T)] = 1.0
        for S in (_top_k(x.point, k), _top_k(A @ indicator, k)):
            density = bipartite_density(graph, S, T)
            if best is None or density > best.density + 1e-12:
                best = BipartiteSolution(S, T, density)
        if best.density >= 1.0:
            break
    assert best is not None
    return best


def dkbs_bruteforce(graph: Graph, k: int) -> BipartiteSolution:
    """Exact optimum over all ordered pairs (S, T) of k-subsets."""
    n = graph.n
    if not 1 <= k <= n:
        raise InputError("k", f"must satisfy 1 <= k <= n={n}")
    count = math.comb(n, k)
    if count * count > BRUTE_FORCE_LIMIT:
        raise InputError("k", f"C({n}, {k})^2 pairs exceed the brute-force limit {BRUTE_FORCE_LIMIT}")
    subsets = list(combinations(range(n), k))
    indicators = np.zeros((count, n))
    for row, subset in enumerate(subsets):
        indicators[row, list(subset)] = 1.0
    across = indicators @ graph.adjacency @ indicators.T
    s_index, t_index = np.unravel_index(int(np.argmax(across)), across.shape)
    return BipartiteSolution(
        subsets[s_index], subsets[t_index], float(across[s_index, t_index]) / (k * k)
    )
