"""Closed-form check that few standard basis vectors cannot approximate the barycenter."""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List

from .core import InputError

PRECONDITION_TOL = 1e-9


@dataclass(frozen=True)
class LowerBoundCase:
    d: int
    p: float
    eps: float

    def __post_init__(self) -> None:
        if self.d < 1:
            raise InputError("d", "must be a positive integer")
        if not (math.isfinite(self.p) and self.p >= 2):
            raise InputError("p", "must be a finite exponent >= 2")
        if not 0 < self.eps < 1:
            raise InputError("eps", "must lie in (0, 1)")
        # Admits 1/eps^q == d, e.g. d=100, p=2, eps=0.1.
        if self.eps ** (-self.q) > self.d * (1.0 + PRECONDITION_TOL):
            raise InputError(
                "eps", f"need 1/eps^(p/(p-1)) <= d; got {self.eps ** (-self.q):.6g} > {self.d}"
            )

    @property
    def q(self) -> float:
        return self.p / (self.p - 1.0)

    @property
    def k_threshold(self) -> float:
        """1 / (4 eps^(p/(p-1)))."""
        return 1.0 / (4.0 * self.eps**self.q)


def best_k_uniform_distance(d: int, k: int, p: float) -> float:
    """
    Smallest p-distance from (1/d, ..., 1/d) to a convex combination of k
    standard basis vectors: equal weights 1/k on the chosen coordinates give
    (k (1/k - 1/d)^p + (d - k) (1/d)^p)^(1/p).
    """
    if not 1 <= k <= d:
        raise InputError("k", f"must satisfy 1 <= k <= d={d}")
    if k == d:
        return 0.0
    return (k * (1.0 / k - 1.0 / d) ** p + (d - k) * (1.0 / d) ** p) ** (1.0 / p)


def support_only_distance(d: int, k: int, p: float) -> float:
    """(k (1/k - 1/d)^p)^(1/p): the bound that ignores the d - k untouched coordinates."""
    if not 1 <= k <= d:
        raise InputError("k", f"must satisfy 1 <= k <= d={d}")
    return (k * (1.0 / k - 1.0 / d) ** p) ** (1.0 / p)


@dataclass
class LowerBoundRow:
    k: int
    distance: float
    margin: float


@dataclass
class LowerBoundReport:
    case: LowerBoundCase
    rows: List[LowerBoundRow] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(row.margin > 0 for row in self.rows)

    @property
    def min_distance(self) -> float:
        return min((row.distance for row in self.rows), default=math.inf)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "status": "PASS" if self.passed else "FAIL",
            "d": self.case.d,
            "p": self.case.p,
            "eps": self.case.eps,
            "k_threshold": self.case.k_threshold,
            "rows": [{"k": row.k, "distance": row.distance, "margin": row.margin} for row in self.rows],
        }


def verify_lower_bound(case: LowerBoundCase) -> LowerBoundReport:
    """Check every k < k_threshold (and k <= d): the best k-combination stays more than eps away."""
    report = LowerBoundReport(case)
    k = 1
    while k < case.k_threshold and k <= case.d:
        distance = best_k_uniform_distance(case.d, k, case.p)
        report.rows.append(LowerBoundRow(k, distance, distance - case.eps))
        k += 1
    return report
