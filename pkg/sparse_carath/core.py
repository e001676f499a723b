"""Shared numeric vocabulary: vectors, norms, point sets, uniform combinations, seeds."""

import math
from dataclasses import dataclass
from typing import Any, Dict, Iterable, Optional, Sequence, Tuple, Union

import numpy as np

ZERO_TOL = 1e-12
SEED_LIMIT = 2**64


class CarathError(Exception):
    """Base class for errors raised by sparse-carath."""


class InputError(CarathError, ValueError):
    """Raised when an input fails validation; ``field`` names the offending input."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message


class InfeasiblePointError(CarathError, ValueError):
    """Raised when a point violates a constraint row it was promised to satisfy."""

    def __init__(self, row: str, violation: float):
        super().__init__(f"constraint '{row}' violated by {violation:.3g}")
        self.row = row
        self.violation = violation


class ExhaustedError(CarathError):
    """Raised when an enumeration finishes without any accepted candidate."""

    def __init__(self, message: str, largest_size: int, payload: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.largest_size = largest_size
        self.payload = dict(payload or {})
        self.payload.setdefault("status", "EXHAUSTED")
        self.payload.setdefault("largest_size", largest_size)


class SolverError(CarathError):
    """Raised when a numerical solver breaks down (e.g. iteration limit)."""


def as_vector(values: Any, field: str = "vector") -> np.ndarray:
    """Validate and convert ``values`` to a finite 1-D float array."""
    try:
        vector = np.asarray(values, dtype=float)
    except (TypeError, ValueError):
        raise InputError(field, "must be a list of numbers")
    if vector.ndim != 1 or vector.size == 0:
        raise InputError(field, "must be a non-empty list of numbers")
    if not np.all(np.isfinite(vector)):
        raise InputError(field, "entries must be finite")
    return vector


def as_matrix(values: Any, field: str = "matrix") -> np.ndarray:
    """Validate and convert ``values`` to a finite 2-D float array (row-major)."""
    try:
        matrix = np.asarray(values, dtype=float)
    except (TypeError, ValueError):
        raise InputError(field, "must be a rectangular list of number lists")
    if matrix.ndim != 2 or matrix.shape[0] == 0 or matrix.shape[1] == 0:
        raise InputError(field, "must be a non-empty rectangular matrix")
    if not np.all(np.isfinite(matrix)):
        raise InputError(field, "entries must be finite")
    return matrix


@dataclass(frozen=True)
class NormSpec:
    """A p-norm with 2 <= p <= inf together with its Hölder conjugate."""

    p: float

    def __post_init__(self) -> None:
        if math.isnan(self.p) or self.p < 2:
            raise InputError("p", f"norm exponent must satisfy p >= 2, got {self.p}")

    @classmethod
    def parse(cls, text: Union[str, float]) -> "NormSpec":
        if isinstance(text, str) and text.strip().lower() in ("inf", "infinity", "max"):
            return cls(math.inf)
        try:
            return cls(float(text))
        except (TypeError, ValueError):
            raise InputError("p", f"expected a number >= 2 or 'inf', got {text!r}")

    @property
    def is_inf(self) -> bool:
        return math.isinf(self.p)

    @property
    def q(self) -> float:
        if self.is_inf:
            return 1.0
        return self.p / (self.p - 1.0)

    def label(self) -> str:
        return "inf" if self.is_inf else f"{self.p:g}"


INF = NormSpec(math.inf)


def p_norm(v: np.ndarray, norm: NormSpec) -> float:
    """
    p-norm of a vector.

    Finite p uses the rescaled form max * (sum (|v_i|/max)^p)^(1/p), which
    cannot overflow for large p.
    """
    magnitudes = np.abs(np.asarray(v, dtype=float))
    if magnitudes.size == 0:
        return 0.0
    largest = float(magnitudes.max())
    if norm.is_inf or largest == 0.0:
        return largest
    scaled = magnitudes / largest
    return largest * float(np.sum(scaled**norm.p)) ** (1.0 / norm.p)


def q_norm(v: np.ndarray, norm: NormSpec) -> float:
    """Norm of ``v`` under the Hölder conjugate exponent of ``norm`` (q may be < 2)."""
    magnitudes = np.abs(np.asarray(v, dtype=float))
    largest = float(magnitudes.max()) if magnitudes.size else 0.0
    if largest == 0.0:
        return 0.0
    q = norm.q
    return largest * float(np.sum((magnitudes / largest) ** q)) ** (1.0 / q)


def l0_count(v: np.ndarray, zero_tol: float = ZERO_TOL) -> int:
    """Number of entries with magnitude above ``zero_tol``."""
    return int(np.count_nonzero(np.abs(np.asarray(v, dtype=float)) > zero_tol))


@dataclass(frozen=True)
class UniformCombination:
    """A multiset of point indices; each occurrence carries weight 1/size."""

    multiset: Tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.multiset:
            raise InputError("multiset", "must be non-empty")
        if any(index < 0 for index in self.multiset):
            raise InputError("multiset", "indices must be non-negative")
        if list(self.multiset) != sorted(self.multiset):
            object.__setattr__(self, "multiset", tuple(sorted(self.multiset)))

    @classmethod
    def of(cls, indices: Iterable[int]) -> "UniformCombination":
        return cls(tuple(sorted(int(index) for index in indices)))

    @property
    def size(self) -> int:
        return len(self.multiset)

    def counts(self, n: int) -> np.ndarray:
        """Multiplicity of each of ``n`` indices."""
        return np.bincount(np.asarray(self.multiset, dtype=np.int64), minlength=n)

    def weights(self, n: int) -> np.ndarray:
        """The implied convex weights over ``n`` points."""
        return self.counts(n) / float(self.size)


class PointSet:
    """A finite set of equal-dimension points, stored as the rows of a matrix."""

    def __init__(self, points: Any, field: str = "points"):
        self.points = as_matrix(points, field)
        self.points.setflags(write=False)
        self._gamma: Dict[float, float] = {}

    @classmethod
    def from_columns(cls, matrix: np.ndarray) -> "PointSet":
        return cls(np.asarray(matrix, dtype=float).T)

    @property
    def n(self) -> int:
        return int(self.points.shape[0])

    @property
    def dim(self) -> int:
        return int(self.points.shape[1])

    def gamma(self, norm: NormSpec) -> float:
        """Largest norm over the points."""
        if norm.p not in self._gamma:
            self._gamma[norm.p] = max(p_norm(point, norm) for point in self.points)
        return self._gamma[norm.p]

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"PointSet(n={self.n}, dim={self.dim})"


def combination_vector(c: UniformCombination, X: PointSet) -> np.ndarray:
    """Uniform average of the points selected by the multiset."""
    if c.multiset[-1] >= X.n:
        raise InputError("multiset", f"index {c.multiset[-1]} out of range for {X.n} points")
    return c.weights(X.n) @ X.points


def check_seed(seed: int) -> int:
    if not 0 <= int(seed) < SEED_LIMIT:
        raise InputError("seed", "must be an unsigned 64-bit integer")
    return int(seed)


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Generator for ``(seed, *stream)``; sub-streams are independent and reproducible."""
    return np.random.default_rng(np.random.SeedSequence([check_seed(seed), *stream]))


def check_simplex(x: np.ndarray, field: str, tol: float = 1e-9) -> np.ndarray:
    """Validate a probability vector (non-negative, sums to one within ``tol``)."""
    vector = as_vector(x, field)
    if vector.min() < -tol:
        raise InputError(field, "entries must be non-negative")
    if abs(vector.sum() - 1.0) > tol:
        raise InputError(field, f"entries must sum to 1 (got {vector.sum():.12g})")
    return vector


def format_vector(v: Sequence[float], digits: int = 4) -> str:
    """Short display form used in console tables."""
    return "(" + ", ".join(f"{value:.{digits}g}" for value in v) + ")"
