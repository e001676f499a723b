"""
Sparse bimatrix games: payoff validation, regrets, the bilinear objective, the
multiset-enumeration equilibrium solver and its variants, and an exact
support-enumeration oracle for small games.
"""

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from itertools import combinations
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .caratheodory import count_uniform, draw_indices, enumerate_uniform, multisets_of_size
from .core import (
    INF,
    ExhaustedError,
    InfeasiblePointError,
    InputError,
    NormSpec,
    PointSet,
    UniformCombination,
    ZERO_TOL,
    as_matrix,
    check_seed,
    check_simplex,
    combination_vector,
    l0_count,
    make_rng,
    p_norm,
    q_norm,
)
from .subproblems import (
    FEAS_TOL,
    SOLVE_TOL,
    CPInstance,
    CPSolution,
    LPStatus,
    Polytope,
    conditional_gradient,
    solve_cp,
    solve_lp,
)
from .utils import console, first_accepted

VERIFY_TOL = 1e-7
PAYOFF_TOL = 1e-12
ORACLE_MAX_N = 5
SPARSITY_FLOOR = 4


class NormMode(str, Enum):
    """Residual norm used inside CP(u)."""

    INF_LP = "inf"
    P_NORM = "p"

    @classmethod
    def parse(cls, text: Any) -> "NormMode":
        if isinstance(text, cls):
            return text
        lowered = str(text).strip().lower()
        aliases = {"inf": cls.INF_LP, "inf_lp": cls.INF_LP, "p": cls.P_NORM, "p_norm": cls.P_NORM}
        if lowered not in aliases:
            raise InputError("norm_mode", f"expected 'inf' or 'p', got {text!r}")
        return aliases[lowered]


@dataclass
class BimatrixGame:
    """Two-player game with payoffs normalized to [-1, 1]; ``C = A + B``."""

    A: np.ndarray
    B: np.ndarray

    def __post_init__(self) -> None:
        self.A = as_matrix(self.A, "A")
        self.B = as_matrix(self.B, "B")
        n = self.A.shape[0]
        if self.A.shape != (n, n):
            raise InputError("A", f"must be square, got shape {self.A.shape}")
        if self.B.shape != self.A.shape:
            raise InputError("B", f"shape {self.B.shape} does not match A {self.A.shape}")
        for name, matrix in (("A", self.A), ("B", self.B)):
            if np.max(np.abs(matrix)) > 1.0 + PAYOFF_TOL:
                raise InputError(name, "payoffs must lie in [-1, 1]")
        self.C = self.A + self.B

    @property
    def n(self) -> int:
        return int(self.A.shape[0])

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "BimatrixGame":
        if not isinstance(data, dict):
            raise InputError("game", "must be a JSON object with keys 'A' and 'B'")
        for key in ("A", "B"):
            if key not in data:
                raise InputError(key, "missing payoff matrix")
        return cls(data["A"], data["B"])

    def to_dict(self) -> Dict[str, Any]:
        return {"A": self.A.tolist(), "B": self.B.tolist()}


@dataclass(frozen=True)
class SparsityInfo:
    s: int
    p: float


@dataclass
class MixedProfile:
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self) -> None:
        self.x = _renormalize(check_simplex(self.x, "x"))
        self.y = _renormalize(check_simplex(self.y, "y"))
        if self.x.size != self.y.size:
            raise InputError("y", f"expected {self.x.size} entries, got {self.y.size}")

    @classmethod
    def normalized(cls, x: np.ndarray, y: np.ndarray) -> "MixedProfile":
        """Profile from solver output: tiny negative entries clipped, then rescaled."""
        return cls(_renormalize(np.asarray(x, dtype=float)), _renormalize(np.asarray(y, dtype=float)))

    def to_dict(self) -> Dict[str, Any]:
        return {"x": self.x.tolist(), "y": self.y.tolist()}


def _renormalize(v: np.ndarray) -> np.ndarray:
    clipped = np.clip(v, 0.0, None)
    total = clipped.sum()
    if total <= 0:
        raise InputError("profile", "strategy has no positive mass")
    return clipped / total


@dataclass
class EquilibriumCertificate:
    profile: MixedProfile
    row_regret: float
    col_regret: float
    pi1: float
    pi2: float
    u_used: Optional[UniformCombination] = None
    residual: Optional[float] = None
    extras: Dict[str, Any] = field(default_factory=dict)

    @property
    def max_regret(self) -> float:
        return max(self.row_regret, self.col_regret)

    def is_eps_nash(self, eps: float, tol: float = VERIFY_TOL) -> bool:
        return self.max_regret <= eps + tol

    def to_dict(self) -> Dict[str, Any]:
        payload: Dict[str, Any] = {
            "status": "OK",
            **self.profile.to_dict(),
            "row_regret": self.row_regret,
            "col_regret": self.col_regret,
            "pi1": self.pi1,
            "pi2": self.pi2,
            "u_used": None if self.u_used is None else list(self.u_used.multiset),
            "residual": self.residual,
        }
        payload.update(self.extras)
        return payload


@dataclass
class SolveConfig:
    """Knobs shared by the enumeration solvers."""

    eps: float = 0.1
    kappa: float = 256.0
    norm_mode: NormMode = NormMode.INF_LP
    max_multiset_size: Optional[int] = None
    welfare_floor: Optional[float] = None
    seed: int = 0
    randomized_mode: bool = False
    randomized_trials: int = 2000
    solve_tol: float = SOLVE_TOL
    workers: Optional[int] = None

    def __post_init__(self) -> None:
        if not 0 < self.eps <= 2:
            raise InputError("eps", "must lie in (0, 2]")
        if not self.kappa > 0:
            raise InputError("kappa", "must be positive")
        if self.max_multiset_size is not None and self.max_multiset_size < 1:
            raise InputError("max_multiset", "must be at least 1")
        if self.randomized_trials < 1:
            raise InputError("randomized_trials", "must be at least 1")
        self.norm_mode = NormMode.parse(self.norm_mode)
        self.seed = check_seed(self.seed)

    def multiset_cap(self, p: float, eps: Optional[float] = None) -> int:
        """ceil(kappa * p / eps^2), lowered to ``max_multiset_size`` when given."""
        eps = self.eps if eps is None else eps
        theory = math.ceil(self.kappa * p / (eps * eps) - 1e-9)
        if self.max_multiset_size is None:
            return theory
        return min(theory, self.max_multiset_size)


def column_sparsity(M: np.ndarray, zero_tol: float = ZERO_TOL) -> int:
    """Largest number of nonzeros in a column of M, floored at 4."""
    matrix = as_matrix(M, "matrix")
    densest = max(l0_count(matrix[:, j], zero_tol) for j in range(matrix.shape[1]))
    return max(densest, SPARSITY_FLOOR)


def sparsity(g: BimatrixGame) -> SparsityInfo:
    s = column_sparsity(g.C)
    return SparsityInfo(s, math.log2(s))


def small_prob_exponent(s: int, m: int) -> float:
    """Norm exponent max(2 log2(s/m), 2) used when an m-small equilibrium is promised."""
    return max(2.0 * math.log2(s / m), 2.0)


def verify_eps_nash(g: BimatrixGame, prof: MixedProfile) -> EquilibriumCertificate:
    """
    Recompute both regrets of a profile from scratch.

    ``pi1``/``pi2`` are set to the best-response payoffs max_i (A y)_i and
    max_j (B^T x)_j.
    """
    if prof.x.size != g.n:
        raise InputError("x", f"expected {g.n} entries, got {prof.x.size}")
    row_payoffs = g.A @ prof.y
    col_payoffs = g.B.T @ prof.x
    pi1 = float(row_payoffs.max())
    pi2 = float(col_payoffs.max())
    row_regret = max(0.0, pi1 - float(prof.x @ row_payoffs))
    col_regret = max(0.0, pi2 - float(col_payoffs @ prof.y))
    return EquilibriumCertificate(prof, row_regret, col_regret, pi1, pi2)


def bp_objective(
    g: BimatrixGame, prof: MixedProfile, pi1: float, pi2: float, feas_tol: float = FEAS_TOL
) -> float:
    """
    x^T C y - pi1 - pi2 at a point of the bilinear program.

    A value of at least -eps certifies an eps-Nash equilibrium.

    Raises:
        InfeasiblePointError: If A y <= pi1 or B^T x <= pi2 fails by more than ``feas_tol``
    """
    row_excess = g.A @ prof.y - pi1
    col_excess = g.B.T @ prof.x - pi2
    for label, excess in (("A y <= pi1", row_excess), ("B^T x <= pi2", col_excess)):
        worst = int(np.argmax(excess))
        if excess[worst] > feas_tol:
            raise InfeasiblePointError(f"{label} (row {worst})", float(excess[worst]))
    return float(prof.x @ g.C @ prof.y) - pi1 - pi2


def _certify(
    g: BimatrixGame,
    eps: float,
    x: np.ndarray,
    y: np.ndarray,
    pi1: float,
    pi2: float,
    residual: float,
    holder_gap: float,
    holder_bound: float,
    combination: Optional[UniformCombination],
) -> Optional[EquilibriumCertificate]:
    """Independent re-verification of an accepted candidate; ``None`` if it fails."""
    try:
        profile = MixedProfile.normalized(x, y)
    except InputError:
        return None
    checked = verify_eps_nash(g, profile)
    label = "none" if combination is None else list(combination.multiset)
    if holder_gap > holder_bound + VERIFY_TOL:
        console.print(
            f"[yellow]Warning:[/yellow] candidate {label} breaks the Hölder bound "
            f"({holder_gap:.3g} > {holder_bound:.3g}); skipped"
        )
        return None
    if not checked.is_eps_nash(eps):
        console.print(
            f"[yellow]Warning:[/yellow] candidate {label} passed the gate but has regret "
            f"{checked.max_regret:.3g} > {eps:g}; skipped"
        )
        return None
    return EquilibriumCertificate(
        profile, checked.row_regret, checked.col_regret, pi1, pi2, combination, residual
    )


def _cp_candidate(
    g: BimatrixGame,
    u: np.ndarray,
    combination: Optional[UniformCombination],
    eps: float,
    norm: NormSpec,
    threshold: float,
    cfg: SolveConfig,
    q_cap: Optional[float] = None,
) -> Optional[EquilibriumCertificate]:
    inst = CPInstance(g.C, u, g.A, g.B, eps, norm, cfg.welfare_floor, q_cap)
    solution = solve_cp(inst, stop_below=threshold, stop_above=threshold, solve_tol=cfg.solve_tol)
    if solution is None or not solution.residual < threshold:
        return None
    return _certify_cp(g, eps, inst, solution, combination)


def _certify_cp(
    g: BimatrixGame,
    eps: float,
    inst: CPInstance,
    solution: CPSolution,
    combination: Optional[UniformCombination],
) -> Optional[EquilibriumCertificate]:
    gap = abs(float(solution.x @ (inst.C @ solution.y - inst.u)))
    bound = q_norm(solution.x, inst.norm) * solution.residual
    return _certify(
        g, eps, solution.x, solution.y, solution.pi1, solution.pi2,
        solution.residual, gap, bound, combination,
    )


def _randomized_multisets(n: int, cap: int, trials: int, seed: int) -> Iterator[UniformCombination]:
    """Sampled multisets: Dirichlet weights, then ``size`` index draws, sizes cycling 1..cap."""
    for trial in range(trials):
        rng = make_rng(seed, trial)
        weights = rng.dirichlet(np.ones(n))
        size = 1 + trial % cap
        yield UniformCombination.of(draw_indices(weights, size, rng))


def _run_enumeration(
    g: BimatrixGame,
    cfg: SolveConfig,
    norm: NormSpec,
    p: float,
    eps: float,
    threshold: float,
    planted: Sequence[UniformCombination],
    q_cap: Optional[float] = None,
) -> EquilibriumCertificate:
    columns = PointSet.from_columns(g.C)
    cap = cfg.multiset_cap(p, eps)
    if cfg.randomized_mode:
        generated: Iterator[UniformCombination] = _randomized_multisets(
            g.n, cap, cfg.randomized_trials, cfg.seed
        )
        total = cfg.randomized_trials
    else:
        generated = enumerate_uniform(columns, cap)
        total = count_uniform(g.n, cap)
    console.print(
        f"[blue]Searching[/blue] multisets up to size {cap} over {g.n} columns "
        f"(norm {norm.label()}, p={p:.4g}, threshold {threshold:.4g})"
    )

    def candidates() -> Iterator[UniformCombination]:
        yield from planted
        yield from generated

    def evaluate(combination: UniformCombination) -> Optional[EquilibriumCertificate]:
        u = combination_vector(combination, columns)
        return _cp_candidate(g, u, combination, eps, norm, threshold, cfg, q_cap)

    accepted = first_accepted(candidates(), evaluate, cfg.workers)
    if accepted is None:
        raise ExhaustedError(
            f"no multiset up to size {cap} was accepted",
            cap,
            {"eps": eps, "candidates_tried": total + len(planted), "p": p},
        )
    index, combination, certificate = accepted
    certificate.extras.update(
        {"multiset_size": combination.size, "candidates_tried": index + 1, "p": p, "norm": norm.label()}
    )
    return certificate


def solve_sparse_nash(
    g: BimatrixGame, cfg: SolveConfig, planted: Sequence[UniformCombination] = ()
) -> EquilibriumCertificate:
    """
    Find an eps-Nash equilibrium by enumerating uniform combinations u of the
    columns of C and solving CP(u) for each.

    Multisets are tried by size ascending, lexicographically within a size,
    after any ``planted`` candidates. A candidate is accepted when the CP
    residual is below eps/2 - solve_tol and the profile re-verifies.

    Args:
        g: The game
        cfg: Solver configuration
        planted: Candidate multisets tried before the enumeration

    Returns:
        Certificate with both regrets at most eps

    Raises:
        ExhaustedError: If every candidate up to the size cap was rejected
    """
    p = sparsity(g).p
    norm = INF if cfg.norm_mode is NormMode.INF_LP else NormSpec(p)
    threshold = cfg.eps / 2.0 - cfg.solve_tol
    return _run_enumeration(g, cfg, norm, p, cfg.eps, threshold, planted)


def solve_small_prob(
    g: BimatrixGame, m: int, cfg: SolveConfig, planted: Sequence[UniformCombination] = ()
) -> EquilibriumCertificate:
    """
    Variant for games promised to have an equilibrium with every probability at most 1/m.

    Uses p = max(2 log2(s/m), 2), the cap ||x||_q <= m^(-1/p) inside CP(u) and the
    acceptance threshold eps * m^(1/p) / 2. The p-norm residual is always used.
    """
    if not 1 <= m <= g.n:
        raise InputError("m", f"must satisfy 1 <= m <= {g.n}")
    p = small_prob_exponent(sparsity(g).s, m)
    norm = NormSpec(p)
    q_cap = m ** (-1.0 / p)
    threshold = cfg.eps * m ** (1.0 / p) / 2.0 - cfg.solve_tol
    return _run_enumeration(g, cfg, norm, p, cfg.eps, threshold, planted, q_cap)


def normalize_scaled_game(
    A: np.ndarray,
    B: np.ndarray,
    alpha: float,
    beta: float,
    gamma_shift: float,
    rescale: bool = True,
) -> Tuple[BimatrixGame, float]:
    """
    Build the game (alpha A, beta B + gamma) and bring it back into [-1, 1].

    Returns:
        (transformed game, eps_scale) where an (eps_scale * eps)-Nash equilibrium
        of the transformed game is an eps-Nash equilibrium of (A, B)

    Raises:
        InputError: If ``rescale`` is off and an entry leaves [-1, 1]
    """
    if not (alpha > 0 and beta > 0):
        raise InputError("alpha", "alpha and beta must be positive")
    if not math.isfinite(gamma_shift):
        raise InputError("gamma", "must be finite")
    A = as_matrix(A, "A")
    B = as_matrix(B, "B")
    if A.shape != B.shape:
        raise InputError("B", f"shape {B.shape} does not match A {A.shape}")
    scaled_a = alpha * A
    scaled_b = beta * B + gamma_shift
    largest = float(max(np.max(np.abs(scaled_a)), np.max(np.abs(scaled_b))))
    if largest > 1.0 + PAYOFF_TOL and not rescale:
        raise InputError("gamma", f"transformed payoffs reach {largest:.6g}, outside [-1, 1]")
    factor = max(1.0, largest) if rescale else 1.0
    game = BimatrixGame(np.clip(scaled_a / factor, -1.0, 1.0), np.clip(scaled_b / factor, -1.0, 1.0))
    return game, min(alpha, beta) / factor


def solve_scaled_game(
    g: BimatrixGame, alpha: float, beta: float, gamma_shift: float, cfg: SolveConfig
) -> EquilibriumCertificate:
    """Solve the affinely transformed game (sparser C) and certify the profile on ``g``."""
    transformed, eps_scale = normalize_scaled_game(g.A, g.B, alpha, beta, gamma_shift)
    inner_eps = min(2.0, cfg.eps * eps_scale)
    inner_cfg = replace(cfg, eps=inner_eps)
    inner = solve_sparse_nash(transformed, inner_cfg)
    checked = verify_eps_nash(g, inner.profile)
    if not checked.is_eps_nash(cfg.eps):
        raise ExhaustedError(
            f"transformed solution has regret {checked.max_regret:.3g} on the original game",
            inner.extras.get("multiset_size", 0),
        )
    checked.u_used = inner.u_used
    checked.residual = inner.residual
    checked.extras = {**inner.extras, "eps_scale": eps_scale, "inner_eps": inner_eps}
    return checked


def _pair_candidates(n: int, cap: int) -> Iterator[Tuple[UniformCombination, UniformCombination]]:
    """Pairs of multisets by level max(|v|, |w|) ascending, lexicographic within a level."""
    by_size: Dict[int, List[UniformCombination]] = {}

    def of_size(size: int) -> List[UniformCombination]:
        if size not in by_size:
            by_size[size] = list(multisets_of_size(n, size))
        return by_size[size]

    for level in range(1, cap + 1):
        for size_v in range(1, level + 1):
            for v in of_size(size_v):
                for size_w in range(1, level + 1):
                    if max(size_v, size_w) != level:
                        continue
                    for w in of_size(size_w):
                        yield v, w


def _both_sparse_polytope(
    g: BimatrixGame, v: np.ndarray, w: np.ndarray, eps: float, slack: bool
) -> Tuple[Polytope, Dict[str, Any]]:
    """
    Constraints over (x, y, pi1, pi2[, t1, t2]):
    x.v + w.y >= pi1 + pi2 - eps/2, A y <= pi1, B^T x <= pi2, simplices,
    and with ``slack`` the epigraph rows |A y - v| <= t1, |B^T x - w| <= t2.
    """
    n = g.n
    size = 2 * n + 2 + (2 if slack else 0)
    ix, iy, ip1, ip2 = slice(0, n), slice(n, 2 * n), 2 * n, 2 * n + 1
    rows: List[np.ndarray] = []
    rhs: List[float] = []

    row = np.zeros(size)
    row[ix], row[iy] = -v, -w
    row[ip1] = row[ip2] = 1.0
    rows.append(row)
    rhs.append(eps / 2.0)
    for i in range(n):
        row = np.zeros(size)
        row[iy], row[ip1] = g.A[i], -1.0
        rows.append(row)
        rhs.append(0.0)
    for j in range(n):
        row = np.zeros(size)
        row[ix], row[ip2] = g.B[:, j], -1.0
        rows.append(row)
        rhs.append(0.0)
    if slack:
        it1, it2 = 2 * n + 2, 2 * n + 3
        for i in range(n):
            for sign in (1.0, -1.0):
                row = np.zeros(size)
                row[iy], row[it1] = sign * g.A[i], -1.0
                rows.append(row)
                rhs.append(sign * v[i])
                row = np.zeros(size)
                row[ix], row[it2] = sign * g.B[:, i], -1.0
                rows.append(row)
                rhs.append(sign * w[i])

    a_eq = np.zeros((2, size))
    a_eq[0, ix] = 1.0
    a_eq[1, iy] = 1.0
    lower = np.zeros(size)
    upper = np.full(size, np.inf)
    lower[ip1] = lower[ip2] = -1.0
    upper[ip1] = upper[ip2] = 1.0
    polytope = Polytope(size, np.array(rows), np.array(rhs), a_eq, np.ones(2), lower, upper)
    return polytope, {"x": ix, "y": iy, "pi1": ip1, "pi2": ip2}


def _both_sparse_candidate(
    g: BimatrixGame,
    v: np.ndarray,
    w: np.ndarray,
    norm: NormSpec,
    threshold: float,
    cfg: SolveConfig,
) -> Optional[Tuple[np.ndarray, np.ndarray, float, float, float]]:
    n = g.n
    if norm.is_inf:
        polytope, index = _both_sparse_polytope(g, v, w, cfg.eps, slack=True)
        objective = np.zeros(polytope.n)
        objective[-2:] = 1.0
        solution = solve_lp(objective, polytope)
        if solution.status is not LPStatus.OPTIMAL:
            return None
        z = solution.point
    else:
        polytope, index = _both_sparse_polytope(g, v, w, cfg.eps, slack=False)
        start = solve_lp(np.zeros(polytope.n), polytope)
        if start.status is not LPStatus.OPTIMAL:
            return None
        pick_y = np.zeros((n, polytope.n))
        pick_y[:, index["y"]] = g.A
        pick_x = np.zeros((n, polytope.n))
        pick_x[:, index["x"]] = g.B.T
        z, _ = conditional_gradient(
            [(pick_y, v), (pick_x, w)],
            lambda grad: solve_lp(grad, polytope).point,
            start.point,
            norm,
            cfg.solve_tol,
            stop_below=threshold,
            stop_above=threshold,
        )
    x, y = z[index["x"]], z[index["y"]]
    residual = p_norm(g.A @ y - v, norm) + p_norm(g.B.T @ x - w, norm)
    if not residual < threshold:
        return None
    return x, y, float(z[index["pi1"]]), float(z[index["pi2"]]), residual


def solve_both_sparse(
    g: BimatrixGame, cfg: SolveConfig, s: Optional[int] = None
) -> EquilibriumCertificate:
    """
    Variant for games where the columns of A and the rows of B are sparse
    (C itself may be dense).

    Enumerates pairs (v, w) of uniform combinations over the columns of A and
    the rows of B and minimizes ||A y - v|| + ||B^T x - w|| subject to
    x.v + w.y >= pi1 + pi2 - eps/2. Acceptance needs the combined residual
    below eps/2 - solve_tol.

    Raises:
        InputError: If ``s`` is given and a column of A or a row of B has more
            than ``s`` non-zero entries
    """
    actual = max(column_sparsity(g.A), column_sparsity(g.B.T))
    if s is not None:
        if s < 1:
            raise InputError("s", "must be at least 1")
        if actual > max(s, SPARSITY_FLOOR):
            raise InputError("s", f"columns of A and rows of B must have sparsity <= {s}, found {actual}")
    p = math.log2(actual)
    norm = INF if cfg.norm_mode is NormMode.INF_LP else NormSpec(p)
    threshold = cfg.eps / 2.0 - cfg.solve_tol
    cap = cfg.multiset_cap(p)
    a_columns = PointSet.from_columns(g.A)
    b_rows = PointSet(g.B)
    console.print(
        f"[blue]Searching[/blue] multiset pairs up to size {cap} (norm {norm.label()}, p={p:.4g})"
    )

    def evaluate(
        pair: Tuple[UniformCombination, UniformCombination]
    ) -> Optional[EquilibriumCertificate]:
        v = combination_vector(pair[0], a_columns)
        w = combination_vector(pair[1], b_rows)
        found = _both_sparse_candidate(g, v, w, norm, threshold, cfg)
        if found is None:
            return None
        x, y, pi1, pi2, residual = found
        gap = abs(float(x @ (g.A @ y - v))) + abs(float((g.B.T @ x - w) @ y))
        bound = (q_norm(x, norm) + q_norm(y, norm)) * residual
        certificate = _certify(g, cfg.eps, x, y, pi1, pi2, residual, gap, bound, pair[0])
        if certificate is not None:
            certificate.extras["w_used"] = list(pair[1].multiset)
        return certificate

    accepted = first_accepted(_pair_candidates(g.n, cap), evaluate, cfg.workers)
    if accepted is None:
        raise ExhaustedError(
            f"no multiset pair up to size {cap} was accepted", cap, {"eps": cfg.eps, "p": p}
        )
    index, _, certificate = accepted
    certificate.extras.update({"candidates_tried": index + 1, "p": p, "norm": norm.label()})
    return certificate


def welfare_grid(eps: float) -> List[float]:
    """Welfare floors from -2 to 2 in steps of eps/4."""
    step = eps / 4.0
    return [-2.0 + k * step for k in range(int(math.floor(4.0 / step + 1e-9)) + 1)]


def solve_max_welfare(
    g: BimatrixGame, cfg: SolveConfig, planted: Sequence[UniformCombination] = ()
) -> EquilibriumCertificate:
    """
    Binary search for the largest welfare floor alpha (grid step eps/4) that
    still admits a certificate with pi1 + pi2 >= alpha.

    The returned profile has welfare x^T C y >= alpha - eps.
    """
    grid = welfare_grid(cfg.eps)

    def attempt(index: int) -> Optional[EquilibriumCertificate]:
        floor_cfg = replace(cfg, welfare_floor=grid[index])
        try:
            return solve_sparse_nash(g, floor_cfg, planted)
        except ExhaustedError:
            return None

    best = attempt(0)
    if best is None:
        raise ExhaustedError("no certificate even without a welfare floor", cfg.multiset_cap(sparsity(g).p))
    best_index = 0
    lo, hi = 0, len(grid) - 1
    while lo < hi:
        mid = (lo + hi + 1) // 2
        found = attempt(mid)
        if found is None:
            hi = mid - 1
        else:
            lo, best, best_index = mid, found, mid
    best.extras.update(
        {
            "welfare_floor": grid[best_index],
            "welfare": float(best.profile.x @ g.C @ best.profile.y),
        }
    )
    return best


def _solve_exact(rows: List[List[Fraction]], rhs: List[Fraction]) -> Optional[List[Fraction]]:
    """A particular solution of rows * z = rhs (free variables zero), or ``None`` if inconsistent."""
    width = len(rows[0])
    work = [row[:] + [value] for row, value in zip(rows, rhs)]
    pivots: List[int] = []
    r = 0
    for col in range(width):
        pivot = next((i for i in range(r, len(work)) if work[i][col] != 0), None)
        if pivot is None:
            continue
        work[r], work[pivot] = work[pivot], work[r]
        scale = work[r][col]
        work[r] = [value / scale for value in work[r]]
        for i in range(len(work)):
            if i != r and work[i][col] != 0:
                factor = work[i][col]
                work[i] = [a - factor * b for a, b in zip(work[i], work[r])]
        pivots.append(col)
        r += 1
        if r == len(work):
            break
    if any(all(value == 0 for value in row[:-1]) and row[-1] != 0 for row in work):
        return None
    solution = [Fraction(0)] * width
    for i, col in enumerate(pivots):
        solution[col] = work[i][-1]
    return solution


def _indifferent_mix(
    payoff: List[List[Fraction]], support: Tuple[int, ...], against: Tuple[int, ...]
) -> Optional[Tuple[List[Fraction], Fraction]]:
    """
    Mix over ``support`` making every strategy in ``against`` earn the same value
    under ``payoff`` (rows indexed by ``against``).
    """
    rows = [[payoff[i][j] for j in support] + [Fraction(-1)] for i in against]
    rows.append([Fraction(1)] * len(support) + [Fraction(0)])
    rhs = [Fraction(0)] * len(against) + [Fraction(1)]
    solution = _solve_exact(rows, rhs)
    if solution is None or any(value < 0 for value in solution[:-1]):
        return None
    return solution[:-1], solution[-1]


def exact_equilibria(g: BimatrixGame) -> List[Tuple[Tuple[Fraction, ...], Tuple[Fraction, ...]]]:
    """Equilibria found by rational support enumeration over all support pairs."""
    if g.n > ORACLE_MAX_N:
        raise InputError("game", f"exact oracle supports n <= {ORACLE_MAX_N}, got {g.n}")
    n = g.n
    A = [[Fraction(float(value)) for value in row] for row in g.A]
    Bt = [[Fraction(float(g.B[i, j])) for i in range(n)] for j in range(n)]
    supports = [s for size in range(1, n + 1) for s in combinations(range(n), size)]

    found: List[Tuple[Tuple[Fraction, ...], Tuple[Fraction, ...]]] = []
    for rows_support in supports:
        for cols_support in supports:
            y_mix = _indifferent_mix(A, cols_support, rows_support)
            if y_mix is None:
                continue
            x_mix = _indifferent_mix(Bt, rows_support, cols_support)
            if x_mix is None:
                continue
            y = [Fraction(0)] * n
            for j, value in zip(cols_support, y_mix[0]):
                y[j] = value
            x = [Fraction(0)] * n
            for i, value in zip(rows_support, x_mix[0]):
                x[i] = value
            row_payoffs = [sum((A[i][j] * y[j] for j in range(n)), Fraction(0)) for i in range(n)]
            col_payoffs = [sum((Bt[j][i] * x[i] for i in range(n)), Fraction(0)) for j in range(n)]
            if max(row_payoffs) > y_mix[1] or max(col_payoffs) > x_mix[1]:
                continue
            pair = (tuple(x), tuple(y))
            if pair not in found:
                found.append(pair)
    return found


def exact_nash_oracle(g: BimatrixGame) -> List[MixedProfile]:
    """
    All equilibria reachable by support enumeration (games with n <= 5).

    Every support pair is tried; each indifference system is solved in exact
    rational arithmetic and the best-response conditions are checked exactly.
    """
    return [
        MixedProfile(np.array([float(v) for v in x]), np.array([float(v) for v in y]))
        for x, y in exact_equilibria(g)
    ]
