"""
Polytope-constrained solvers: a dense revised simplex LP engine, the CP(u)
subproblem of the sparse-game algorithm, and norm minimization over hulls.
"""

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from .core import (
    INF,
    InputError,
    NormSpec,
    PointSet,
    SolverError,
    as_matrix,
    as_vector,
    p_norm,
    q_norm,
)

FEAS_TOL = 1e-9
OPT_TOL = 1e-9
SOLVE_TOL = 1e-7
PIVOT_TOL = 1e-9
REFACTOR_EVERY = 32
DEGENERATE_LIMIT = 25
FW_MAX_ITER = 1000
CUT_ROUNDS = 60
CAP_RTOL = 1e-12


class LPStatus(str, Enum):
    OPTIMAL = "OPTIMAL"
    INFEASIBLE = "INFEASIBLE"
    UNBOUNDED = "UNBOUNDED"


@dataclass
class Polytope:
    """
    {z : a_ub z <= b_ub, a_eq z = b_eq, lower <= z <= upper}.

    Missing rows default to empty blocks; bounds default to z >= 0.
    """

    n: int
    a_ub: Optional[np.ndarray] = None
    b_ub: Optional[np.ndarray] = None
    a_eq: Optional[np.ndarray] = None
    b_eq: Optional[np.ndarray] = None
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        if self.n < 1:
            raise InputError("polytope", "needs at least one variable")
        self.a_ub, self.b_ub = self._rows(self.a_ub, self.b_ub, "inequality")
        self.a_eq, self.b_eq = self._rows(self.a_eq, self.b_eq, "equality")
        self.lower = np.zeros(self.n) if self.lower is None else np.asarray(self.lower, dtype=float)
        self.upper = (
            np.full(self.n, np.inf) if self.upper is None else np.asarray(self.upper, dtype=float)
        )
        if self.lower.shape != (self.n,) or self.upper.shape != (self.n,):
            raise InputError("bounds", f"expected {self.n} lower and upper bounds")
        if np.any(self.lower > self.upper):
            raise InputError("bounds", "every lower bound must be <= its upper bound")

    def _rows(
        self, a: Optional[np.ndarray], b: Optional[np.ndarray], kind: str
    ) -> Tuple[np.ndarray, np.ndarray]:
        if a is None:
            return np.zeros((0, self.n)), np.zeros(0)
        a = np.atleast_2d(np.asarray(a, dtype=float))
        b = np.atleast_1d(np.asarray(b, dtype=float))
        if a.shape[1] != self.n or a.shape[0] != b.shape[0]:
            raise InputError("polytope", f"{kind} rows have inconsistent dimensions")
        return a, b

    @classmethod
    def simplex(cls, n: int, cap: Optional[float] = None) -> "Polytope":
        """The probability simplex, optionally with every coordinate capped at ``cap``."""
        upper = None if cap is None else np.full(n, cap)
        return cls(n, a_eq=np.ones((1, n)), b_eq=np.ones(1), upper=upper)

    def with_rows(self, a_ub: np.ndarray, b_ub: np.ndarray) -> "Polytope":
        """Copy of the polytope with extra inequality rows."""
        a_ub = np.atleast_2d(np.asarray(a_ub, dtype=float))
        b_ub = np.atleast_1d(np.asarray(b_ub, dtype=float))
        return Polytope(
            self.n,
            np.vstack([self.a_ub, a_ub]),
            np.concatenate([self.b_ub, b_ub]),
            self.a_eq,
            self.b_eq,
            self.lower,
            self.upper,
        )

    @property
    def row_count(self) -> int:
        """Constraint rows including finite upper bounds on shifted variables."""
        boxes = int(np.sum(np.isfinite(self.lower) & np.isfinite(self.upper)))
        return int(self.a_ub.shape[0] + self.a_eq.shape[0] + boxes)

    def violation(self, z: np.ndarray) -> Tuple[str, float]:
        """Largest constraint violation at ``z`` and the name of the row causing it."""
        worst = ("none", 0.0)
        checks = [
            ("inequality", self.a_ub @ z - self.b_ub),
            ("equality", np.abs(self.a_eq @ z - self.b_eq)),
            ("lower bound", self.lower - z),
            ("upper bound", z - self.upper),
        ]
        for name, excess in checks:
            if excess.size and float(np.max(excess)) > worst[1]:
                index = int(np.argmax(excess))
                worst = (f"{name} {index}", float(excess[index]))
        return worst

    def contains(self, z: np.ndarray, tol: float = FEAS_TOL) -> bool:
        return self.violation(np.asarray(z, dtype=float))[1] <= tol


@dataclass
class LPSolution:
    point: np.ndarray
    objective: float
    status: LPStatus
    basis: Tuple[int, ...] = ()
    iterations: int = 0
    exact_point: Optional[List[Fraction]] = None


def _exact(values: np.ndarray) -> np.ndarray:
    flat = [Fraction(float(v)) for v in np.asarray(values, dtype=float).ravel()]
    return np.array(flat, dtype=object).reshape(np.shape(values))


class _RevisedSimplex:
    """
    Two-phase revised simplex on min c.w, M w = r, w >= 0 with an explicit basis
    inverse updated by eta pivots. Runs on floats or, for referee solves, on
    Fractions (object arrays, zero tolerances).
    """

    def __init__(self, M: np.ndarray, r: np.ndarray, basis: List[int], artificial: int, exact: bool):
        self.M = M
        self.r = r
        self.m, self.N = M.shape
        self.basis = list(basis)
        self.first_artificial = self.N - artificial
        self.exact = exact
        self.tol: Any = Fraction(0) if exact else OPT_TOL
        self.pivot_tol: Any = Fraction(0) if exact else PIVOT_TOL
        self.iterations = 0
        self.max_iterations = 50 * (self.m + self.N) + 100
        self._refactor()

    def _refactor(self) -> None:
        B = self.M[:, self.basis]
        if self.exact:
            self.Binv = _exact_inverse(B)
            self.xB = self.Binv.dot(self.r)
            return
        self.Binv = np.linalg.inv(B)
        self.xB = self.Binv @ self.r
        self.xB = self.xB + self.Binv @ (self.r - B @ self.xB)

    def _pivot(self, row: int, col: int, u: np.ndarray) -> None:
        theta = self.xB[row] / u[row]
        self.xB = self.xB - theta * u
        self.xB[row] = theta
        pivot_row = self.Binv[row] / u[row]
        self.Binv = self.Binv - np.outer(u, pivot_row)
        self.Binv[row] = pivot_row
        self.basis[row] = col

    def run(self, cost: np.ndarray, allowed: np.ndarray) -> LPStatus:
        bland = False
        degenerate = 0
        while True:
            self.iterations += 1
            if self.iterations > self.max_iterations:
                raise SolverError(f"simplex iteration limit ({self.max_iterations}) reached")
            if not self.exact and self.iterations % REFACTOR_EVERY == 0:
                self._refactor()

            duals = cost[self.basis].dot(self.Binv)
            reduced = cost - duals.dot(self.M)
            in_basis = set(self.basis)
            candidates = [
                j for j in range(self.N) if allowed[j] and j not in in_basis and reduced[j] < -self.tol
            ]
            if not candidates:
                return LPStatus.OPTIMAL
            if bland:
                entering = candidates[0]
            else:
                entering = min(candidates, key=lambda j: (reduced[j], j))

            u = self.Binv.dot(self.M[:, entering])
            leaving: Optional[int] = None
            best_ratio: Any = None
            for i in range(self.m):
                if u[i] > self.pivot_tol:
                    ratio = self.xB[i] / u[i]
                    if (
                        leaving is None
                        or ratio < best_ratio
                        or (ratio == best_ratio and self.basis[i] < self.basis[leaving])
                    ):
                        leaving, best_ratio = i, ratio
            if leaving is None:
                return LPStatus.UNBOUNDED

            degenerate = degenerate + 1 if best_ratio <= self.tol else 0
            if degenerate > DEGENERATE_LIMIT:
                bland = True
            self._pivot(leaving, entering, u)

    def drive_out_artificials(self) -> None:
        for row in range(self.m):
            if self.basis[row] < self.first_artificial:
                continue
            tableau_row = self.Binv[row].dot(self.M)
            in_basis = set(self.basis)
            for j in range(self.first_artificial):
                if j not in in_basis and abs(tableau_row[j]) > self.pivot_tol * 100:
                    self._pivot(row, j, self.Binv.dot(self.M[:, j]))
                    break

    def values(self) -> np.ndarray:
        if not self.exact:
            self._refactor()
        w = np.zeros(self.N, dtype=object if self.exact else float)
        if self.exact:
            w[:] = Fraction(0)
        w[self.basis] = self.xB
        return w


def _exact_inverse(B: np.ndarray) -> np.ndarray:
    """Gauss-Jordan inverse over Fractions."""
    size = B.shape[0]
    work = np.concatenate([B.astype(object), np.eye(size, dtype=int).astype(object)], axis=1)
    work = np.vectorize(Fraction, otypes=[object])(work)
    for col in range(size):
        pivot = next((r for r in range(col, size) if work[r, col] != 0), None)
        if pivot is None:
            raise SolverError("singular basis in exact re-solve")
        if pivot != col:
            work[[col, pivot]] = work[[pivot, col]]
        work[col] = work[col] / work[col, col]
        for r in range(size):
            if r != col and work[r, col] != 0:
                work[r] = work[r] - work[r, col] * work[col]
    return work[:, size:]


def solve_lp(
    objective: Sequence[float], P: Polytope, maximize: bool = False, exact: bool = False
) -> LPSolution:
    """
    Solve min (or max) objective.z over the polytope.

    Args:
        objective: Cost vector of length P.n
        P: Feasible region
        maximize: Maximize instead of minimize
        exact: Re-solve in rational arithmetic (slow; used as a referee)

    Returns:
        LPSolution with status OPTIMAL, INFEASIBLE or UNBOUNDED
    """
    c = as_vector(objective, "objective")
    if c.size != P.n:
        raise InputError("objective", f"expected {P.n} coefficients, got {c.size}")
    if maximize:
        c = -c

    # Shift/flip every variable onto w >= 0; free variables split in two.
    columns: List[Tuple[int, float]] = []
    offset = np.zeros(P.n)
    box_rows: List[Tuple[int, float]] = []
    for j in range(P.n):
        lo, hi = P.lower[j], P.upper[j]
        if np.isfinite(lo):
            offset[j] = lo
            columns.append((j, 1.0))
            if np.isfinite(hi):
                box_rows.append((len(columns) - 1, hi - lo))
        elif np.isfinite(hi):
            offset[j] = hi
            columns.append((j, -1.0))
        else:
            columns.extend([(j, 1.0), (j, -1.0)])
    T = np.zeros((P.n, len(columns)))
    for col, (j, sign) in enumerate(columns):
        T[j, col] = sign
    nw = len(columns)

    a_box = np.zeros((len(box_rows), nw))
    for row, (col, _) in enumerate(box_rows):
        a_box[row, col] = 1.0
    a_ub = np.vstack([P.a_ub @ T, a_box])
    b_ub = np.concatenate([P.b_ub - P.a_ub @ offset, [width for _, width in box_rows]])
    a_eq = P.a_eq @ T
    b_eq = P.b_eq - P.a_eq @ offset
    m_ub, m_eq = a_ub.shape[0], a_eq.shape[0]
    m = m_ub + m_eq

    if m == 0:
        # Only sign constraints: optimum at w = 0 unless some cost is negative.
        cost = c @ T
        if np.any(cost < -OPT_TOL):
            return LPSolution(np.full(P.n, np.nan), -np.inf, LPStatus.UNBOUNDED)
        z = offset.copy()
        value = float(c @ z)
        return LPSolution(z, -value if maximize else value, LPStatus.OPTIMAL)

    M = np.zeros((m, nw + m_ub))
    M[:m_ub, :nw] = a_ub
    M[:m_ub, nw:] = np.eye(m_ub)
    M[m_ub:, :nw] = a_eq
    r = np.concatenate([b_ub, b_eq])
    flipped = r < 0
    M[flipped] *= -1
    r[flipped] *= -1

    basis: List[int] = []
    needs_artificial: List[int] = []
    for i in range(m):
        if i < m_ub and not flipped[i]:
            basis.append(nw + i)
        else:
            basis.append(-1)
            needs_artificial.append(i)
    artificial = np.zeros((m, len(needs_artificial)))
    for k, i in enumerate(needs_artificial):
        artificial[i, k] = 1.0
        basis[i] = nw + m_ub + k
    M = np.hstack([M, artificial])
    N = M.shape[1]
    cost_phase2 = np.concatenate([c @ T, np.zeros(N - nw)])
    cost_phase1 = np.zeros(N)
    cost_phase1[nw + m_ub :] = 1.0

    if exact:
        M, r = _exact(M), _exact(r)
        cost_phase1, cost_phase2 = _exact(cost_phase1), _exact(cost_phase2)

    engine = _RevisedSimplex(M, r, basis, len(needs_artificial), exact)
    if needs_artificial:
        engine.run(cost_phase1, np.ones(N, dtype=bool))
        infeasibility = cost_phase1[engine.basis].dot(engine.xB)
        scale = max(1.0, float(np.max(np.abs(r.astype(float)))))
        if (infeasibility > 0) if exact else (infeasibility > FEAS_TOL * scale):
            return LPSolution(
                np.full(P.n, np.nan), np.nan, LPStatus.INFEASIBLE, iterations=engine.iterations
            )
        engine.drive_out_artificials()

    allowed = np.zeros(N, dtype=bool)
    allowed[: nw + m_ub] = True
    status = engine.run(cost_phase2, allowed)
    if status is LPStatus.UNBOUNDED:
        return LPSolution(
            np.full(P.n, np.nan), -np.inf, LPStatus.UNBOUNDED, iterations=engine.iterations
        )

    w = engine.values()[:nw]
    exact_point = None
    if exact:
        exact_point = [
            Fraction(offset[j]) + sum((Fraction(T[j, col]) * w[col] for col in range(nw)), Fraction(0))
            for j in range(P.n)
        ]
        z = np.array([float(v) for v in exact_point])
    else:
        z = T @ w.astype(float) + offset
    value = float(as_vector(objective, "objective") @ z)
    return LPSolution(z, value, LPStatus.OPTIMAL, tuple(engine.basis), engine.iterations, exact_point)


def norm_gradient(r: np.ndarray, norm: NormSpec) -> np.ndarray:
    """Gradient of ||r||_p (finite p); zero at r = 0."""
    size = p_norm(r, norm)
    if size == 0.0:
        return np.zeros_like(r)
    return np.sign(r) * (np.abs(r) / size) ** (norm.p - 1.0)


def conditional_gradient(
    terms: Sequence[Tuple[np.ndarray, np.ndarray]],
    lmo: Callable[[np.ndarray], np.ndarray],
    z0: np.ndarray,
    norm: NormSpec,
    solve_tol: float = SOLVE_TOL,
    stop_below: Optional[float] = None,
    stop_above: Optional[float] = None,
    max_iter: int = FW_MAX_ITER,
) -> Tuple[np.ndarray, float]:
    """
    Away-step conditional gradient for f(z) = sum_k ||M_k z - u_k||_p over a polytope.

    Args:
        terms: Pairs (M_k, u_k)
        lmo: Linear minimization oracle returning a vertex minimizing g.z
        z0: Starting vertex
        norm: Finite p-norm
        solve_tol: Stop once the duality gap is at most this
        stop_below: Stop early as soon as f(z) drops below this value
        stop_above: Stop early once the lower bound f(z) - gap reaches this value

    Returns:
        (z, f(z))
    """

    def value(z: np.ndarray) -> float:
        return sum(p_norm(Mk @ z - uk, norm) for Mk, uk in terms)

    def gradient(z: np.ndarray) -> np.ndarray:
        return sum(Mk.T @ norm_gradient(Mk @ z - uk, norm) for Mk, uk in terms)

    z = np.asarray(z0, dtype=float).copy()
    active: Dict[bytes, Tuple[np.ndarray, float]] = {z.round(12).tobytes(): (z.copy(), 1.0)}
    current = value(z)

    for _ in range(max_iter):
        if current == 0.0 or (stop_below is not None and current < stop_below):
            break
        g = gradient(z)
        s = lmo(g)
        d_fw = s - z
        gap = float(-g @ d_fw)
        if gap <= solve_tol or (stop_above is not None and current - gap >= stop_above):
            break

        away_key, (away_vertex, away_weight) = max(active.items(), key=lambda item: g @ item[1][0])
        d_away = z - away_vertex
        if gap >= float(-g @ d_away) or len(active) == 1:
            direction, step_max, toward = d_fw, 1.0, True
        else:
            direction, step_max, toward = d_away, away_weight / (1.0 - away_weight), False

        search = minimize_scalar(
            lambda t: value(z + t * direction),
            bounds=(0.0, step_max),
            method="bounded",
            options={"xatol": 1e-12},
        )
        step = float(search.x)
        if value(z + step_max * direction) <= search.fun:
            step = step_max
        if step <= 0.0:
            break
        z = z + step * direction

        if toward:
            key = s.round(12).tobytes()
            active = {k: (v, w * (1.0 - step)) for k, (v, w) in active.items()}
            vertex, weight = active.get(key, (s.copy(), 0.0))
            active[key] = (vertex, weight + step)
            if step >= 1.0:
                active = {key: (s.copy(), 1.0)}
        else:
            active = {k: (v, w * (1.0 + step)) for k, (v, w) in active.items()}
            vertex, weight = active[away_key]
            remaining = weight - step
            if remaining <= 1e-15:
                del active[away_key]
            else:
                active[away_key] = (vertex, remaining)
        current = value(z)

    return z, current


@dataclass
class CPInstance:
    """
    CP(u): min ||C y - u|| subject to x.u >= pi1 + pi2 - eps/2, A y <= pi1,
    B^T x <= pi2, x, y in the simplex and pi1, pi2 in [-1, 1].
    """

    C: np.ndarray
    u: np.ndarray
    A: np.ndarray
    B: np.ndarray
    eps: float
    norm: NormSpec = INF
    welfare_floor: Optional[float] = None
    q_cap: Optional[float] = None

    def __post_init__(self) -> None:
        self.C = as_matrix(self.C, "C")
        self.A = as_matrix(self.A, "A")
        self.B = as_matrix(self.B, "B")
        self.u = as_vector(self.u, "u")
        n = self.C.shape[0]
        for name, matrix in (("C", self.C), ("A", self.A), ("B", self.B)):
            if matrix.shape != (n, n):
                raise InputError(name, f"expected a {n}x{n} matrix")
        if self.u.size != n:
            raise InputError("u", f"expected {n} entries")
        if not self.eps > 0:
            raise InputError("eps", "must be positive")
        if self.q_cap is not None and self.norm.is_inf:
            raise InputError("q_cap", "the q-norm cap needs a finite-p residual norm")

    @property
    def n(self) -> int:
        return int(self.C.shape[0])


@dataclass
class CPSolution:
    x: np.ndarray
    y: np.ndarray
    pi1: float
    pi2: float
    residual: float
    extras: Dict[str, Any] = field(default_factory=dict)


def _cp_infinity(inst: CPInstance) -> Optional[CPSolution]:
    n = inst.n
    size = 2 * n + 3
    ix, iy, ip1, ip2, it = slice(0, n), slice(n, 2 * n), 2 * n, 2 * n + 1, 2 * n + 2

    rows: List[np.ndarray] = []
    rhs: List[float] = []

    row = np.zeros(size)
    row[ix] = -inst.u
    row[ip1] = row[ip2] = 1.0
    rows.append(row)
    rhs.append(inst.eps / 2.0)
    for i in range(n):
        row = np.zeros(size)
        row[iy] = inst.A[i]
        row[ip1] = -1.0
        rows.append(row)
        rhs.append(0.0)
    for j in range(n):
        row = np.zeros(size)
        row[ix] = inst.B[:, j]
        row[ip2] = -1.0
        rows.append(row)
        rhs.append(0.0)
    for i in range(n):
        for sign in (1.0, -1.0):
            row = np.zeros(size)
            row[iy] = sign * inst.C[i]
            row[it] = -1.0
            rows.append(row)
            rhs.append(sign * inst.u[i])
    if inst.welfare_floor is not None:
        row = np.zeros(size)
        row[ip1] = row[ip2] = -1.0
        rows.append(row)
        rhs.append(-inst.welfare_floor)

    a_eq = np.zeros((2, size))
    a_eq[0, ix] = 1.0
    a_eq[1, iy] = 1.0
    lower = np.zeros(size)
    upper = np.full(size, np.inf)
    lower[ip1] = lower[ip2] = -1.0
    upper[ip1] = upper[ip2] = 1.0
    polytope = Polytope(size, np.array(rows), np.array(rhs), a_eq, np.ones(2), lower, upper)

    objective = np.zeros(size)
    objective[it] = 1.0
    solution = solve_lp(objective, polytope)
    if solution.status is not LPStatus.OPTIMAL:
        return None
    z = solution.point
    y = z[iy]
    return CPSolution(
        z[ix], y, float(z[ip1]), float(z[ip2]), p_norm(inst.C @ y - inst.u, INF),
        {"lp_iterations": solution.iterations},
    )


def _best_row_strategy(inst: CPInstance) -> Optional[Tuple[np.ndarray, float]]:
    """
    Row-player half of CP(u): maximize x.u - max_j (B^T x)_j over admissible x.

    The q-norm cap is handled by supporting-hyperplane cuts; the last iterate
    is pulled toward the uniform strategy until the cap holds.
    """
    n = inst.n
    size = n + 1
    rows = [np.concatenate([inst.B[:, j], [-1.0]]) for j in range(n)]
    rhs = [0.0] * n
    if inst.welfare_floor is not None:
        rows.append(np.concatenate([-inst.u, [0.0]]))
        rhs.append(inst.eps / 2.0 - inst.welfare_floor)
    lower = np.zeros(size)
    upper = np.full(size, np.inf)
    lower[n], upper[n] = -1.0, 1.0
    a_eq = np.concatenate([np.ones(n), [0.0]])[None, :]
    polytope = Polytope(size, np.array(rows), np.array(rhs), a_eq, np.ones(1), lower, upper)
    objective = np.concatenate([inst.u, [-1.0]])

    cap = None if inst.q_cap is None else inst.q_cap * (1.0 + CAP_RTOL)
    x: Optional[np.ndarray] = None
    for _ in range(CUT_ROUNDS):
        solution = solve_lp(objective, polytope, maximize=True)
        if solution.status is not LPStatus.OPTIMAL:
            if x is None:
                return None
            break
        x = np.clip(solution.point[:n], 0.0, None)
        x = x / x.sum()
        if cap is None or q_norm(x, inst.norm) <= cap:
            break
        cut = _q_gradient(x, inst.norm)
        polytope = polytope.with_rows(np.concatenate([cut, [0.0]]), [cap])
    assert x is not None

    if cap is not None and q_norm(x, inst.norm) > cap:
        # the uniform strategy has the smallest q-norm on the simplex
        uniform = np.full(n, 1.0 / n)
        if q_norm(uniform, inst.norm) > cap:
            return None
        lo, hi = 0.0, 1.0
        for _ in range(60):
            mid = (lo + hi) / 2.0
            if q_norm(mid * x + (1.0 - mid) * uniform, inst.norm) <= cap:
                lo = mid
            else:
                hi = mid
        x = lo * x + (1.0 - lo) * uniform
    if inst.welfare_floor is not None and x @ inst.u < inst.welfare_floor - inst.eps / 2.0 - FEAS_TOL:
        return None
    pi2 = float(np.clip(np.max(inst.B.T @ x), -1.0, 1.0))
    return x, pi2


def _q_gradient(x: np.ndarray, norm: NormSpec) -> np.ndarray:
    """Gradient of ||x||_q at a non-negative x (q the conjugate of ``norm``)."""
    size = q_norm(x, norm)
    return (x / size) ** (norm.q - 1.0)


def _cp_finite(
    inst: CPInstance, stop_below: Optional[float], stop_above: Optional[float], solve_tol: float
) -> Optional[CPSolution]:
    # The objective only involves y and the x-side constraints only see y
    # through pi1, so the row player's half is solved first.
    row_side = _best_row_strategy(inst)
    if row_side is None:
        return None
    x, pi2 = row_side
    pi1_cap = min(1.0, float(x @ inst.u) - pi2 + inst.eps / 2.0)
    if pi1_cap < -1.0:
        return None

    n = inst.n
    column_polytope = Polytope(
        n, inst.A, np.full(n, pi1_cap), np.ones((1, n)), np.ones(1)
    )
    start = solve_lp(np.zeros(n), column_polytope)
    if start.status is not LPStatus.OPTIMAL:
        return None

    def lmo(g: np.ndarray) -> np.ndarray:
        return solve_lp(g, column_polytope).point

    y, residual = conditional_gradient(
        [(inst.C, inst.u)], lmo, start.point, inst.norm, solve_tol, stop_below, stop_above
    )
    y = np.clip(y, 0.0, None)
    y = y / y.sum()

    pi1 = float(np.clip(np.max(inst.A @ y), -1.0, 1.0))
    if inst.welfare_floor is not None and pi1 + pi2 < inst.welfare_floor:
        pi1 = min(1.0, inst.welfare_floor - pi2)
        pi2 = min(1.0, inst.welfare_floor - pi1)
    return CPSolution(x, y, pi1, pi2, p_norm(inst.C @ y - inst.u, inst.norm))


def solve_cp(
    inst: CPInstance,
    stop_below: Optional[float] = None,
    stop_above: Optional[float] = None,
    solve_tol: float = SOLVE_TOL,
) -> Optional[CPSolution]:
    """
    Solve CP(u).

    The max-norm residual is an exact epigraph LP. Finite p runs away-step
    conditional gradient to within ``solve_tol``; ``stop_below``/``stop_above``
    let enumeration callers stop as soon as acceptance is decided.

    Returns:
        CPSolution with the residual recomputed at the returned point, or
        ``None`` when the constraint polytope is empty
    """
    if inst.norm.is_inf:
        return _cp_infinity(inst)
    return _cp_finite(inst, stop_below, stop_above, solve_tol)


def hull_membership(X: PointSet, target: np.ndarray) -> Optional[np.ndarray]:
    """Barycentric weights expressing ``target`` in conv(X), or ``None`` if it lies outside."""
    target = as_vector(target, "target")
    a_eq = np.vstack([X.points.T, np.ones((1, X.n))])
    b_eq = np.concatenate([target, [1.0]])
    solution = solve_lp(np.zeros(X.n), Polytope(X.n, a_eq=a_eq, b_eq=b_eq))
    if solution.status is not LPStatus.OPTIMAL:
        return None
    weights = np.clip(solution.point, 0.0, None)
    return weights / weights.sum()


def _simplex_vertex(g: np.ndarray) -> np.ndarray:
    vertex = np.zeros(g.size)
    vertex[int(np.argmin(g))] = 1.0
    return vertex


def min_norm_over_hull(
    X: PointSet,
    target: np.ndarray,
    norm: NormSpec,
    solve_tol: float = SOLVE_TOL,
    start: Optional[np.ndarray] = None,
) -> Tuple[float, np.ndarray]:
    """
    Distance from ``target`` to conv(X) and the weights of a nearest hull point.

    Args:
        start: Optional warm-start weights (finite p only)
    """
    target = as_vector(target, "target")
    if start is None:
        inside = hull_membership(X, target)
        if inside is not None:
            return p_norm(target - inside @ X.points, norm), inside

    if norm.is_inf:
        n, d = X.n, X.dim
        size = n + 1
        rows = np.zeros((2 * d, size))
        rows[:d, :n] = X.points.T
        rows[d:, :n] = -X.points.T
        rows[:, n] = -1.0
        rhs = np.concatenate([target, -target])
        a_eq = np.concatenate([np.ones(n), [0.0]])[None, :]
        objective = np.zeros(size)
        objective[n] = 1.0
        solution = solve_lp(objective, Polytope(size, rows, rhs, a_eq, np.ones(1)))
        if solution.status is not LPStatus.OPTIMAL:
            raise SolverError(f"max-norm distance LP ended {solution.status.value}")
        weights = np.clip(solution.point[:n], 0.0, None)
        weights = weights / weights.sum()
    else:
        if start is None:
            distances = [p_norm(point - target, norm) for point in X.points]
            start = np.zeros(X.n)
            start[int(np.argmin(distances))] = 1.0
        weights, _ = conditional_gradient(
            [(X.points.T, target)], _simplex_vertex, start, norm, solve_tol
        )
        weights = np.clip(weights, 0.0, None)
        weights = weights / weights.sum()
    return p_norm(target - weights @ X.points, norm), weights
