"""Multi-index sets defining multivariate polynomial approximation spaces.

A multi-index alpha = (alpha_1, ..., alpha_d) is represented as a plain tuple
of non-negative integers.  An :class:`IndexSet` is an ordered, duplicate-free
collection of such tuples; the order is canonical (graded by total order,
ties broken lexicographically) so that design-matrix columns are reproducible
across runs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

MultiIndex = tuple[int, ...]

#: Constructors refuse sets larger than this (configurable per call).
DEFAULT_MAX_CARDINALITY = 10**7


def total_order(alpha: MultiIndex) -> int:
    """Sum of the entries of a multi-index."""
    return sum(alpha)


def canonical_sort(indices) -> tuple[MultiIndex, ...]:
    """Sort multi-indices graded by total order, lexicographic within a grade."""
    return tuple(sorted(indices, key=lambda a: (sum(a), a)))


@dataclass(frozen=True)
class IndexSet:
    """Ordered set of d-dimensional multi-indices.

    Immutable after construction; safe to share across threads.
    """

    dimension: int
    indices: tuple[MultiIndex, ...]
    kind: str = "custom"
    degree: int | None = None
    _lookup: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError(f"dimension must be >= 1, got {self.dimension}")
        indices = canonical_sort(tuple(tuple(int(a) for a in alpha) for alpha in self.indices))
        for alpha in indices:
            if len(alpha) != self.dimension:
                raise ValueError(f"index {alpha} has length {len(alpha)}, expected {self.dimension}")
            if any(a < 0 for a in alpha):
                raise ValueError(f"index {alpha} has negative entries")
        lookup = frozenset(indices)
        if len(lookup) != len(indices):
            raise ValueError("duplicate multi-indices")
        object.__setattr__(self, "indices", indices)
        object.__setattr__(self, "_lookup", lookup)

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __contains__(self, alpha) -> bool:
        return tuple(alpha) in self._lookup

    @property
    def max_degree(self) -> int:
        """Largest total order present in the set."""
        return max(sum(alpha) for alpha in self.indices)

    def as_array(self) -> np.ndarray:
        """N x d integer array in canonical order."""
        return np.array(self.indices, dtype=np.int64).reshape(len(self.indices), self.dimension)

    def to_json(self) -> str:
        return json.dumps(
            {
                "dimension": self.dimension,
                "kind": self.kind,
                "degree": self.degree,
                "indices": [list(alpha) for alpha in self.indices],
            }
        )

    @staticmethod
    def from_json(text: str) -> "IndexSet":
        obj = json.loads(text)
        return IndexSet(
            dimension=obj["dimension"],
            indices=tuple(tuple(a) for a in obj["indices"]),
            kind=obj.get("kind", "custom"),
            degree=obj.get("degree"),
        )


def tensor_cardinality(d: int, k: int) -> int:
    return (k + 1) ** d

def total_degree_cardinality(d: int, k: int) -> int:
    return math.comb(d + k, k)

def hyperbolic_cross_bound(d: int, k: int) -> int:
    """Stated upper bound on the hyperbolic-cross cardinality (natural log)."""
    return math.floor((k + 1) * (1.0 + math.log(k + 1)) ** (d - 1))


def _check_args(d: int, k: int) -> None:
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    if k < 0:
        raise ValueError(f"degree must be >= 0, got {k}")


def tensor_set(d: int, k: int, max_cardinality: int = DEFAULT_MAX_CARDINALITY) -> IndexSet:
    """All alpha with max_j alpha_j <= k; cardinality (k+1)^d."""
    _check_args(d, k)
    n = tensor_cardinality(d, k)
    if n > max_cardinality:
        raise ValueError(f"tensor set of size {n} exceeds cap {max_cardinality}")
    indices = [()]
    for _ in range(d):
        indices = [alpha + (a,) for alpha in indices for a in range(k + 1)]
    return IndexSet(d, tuple(indices), kind="tensor", degree=k)


def total_degree_set(d: int, k: int, max_cardinality: int = DEFAULT_MAX_CARDINALITY) -> IndexSet:
    """All alpha with |alpha| <= k; cardinality C(d+k, k)."""
    _check_args(d, k)
    n = total_degree_cardinality(d, k)
    if n > max_cardinality:
        raise ValueError(f"total-degree set of size {n} exceeds cap {max_cardinality}")

    indices: list[MultiIndex] = []

    def extend(prefix: MultiIndex, budget: int, remaining: int) -> None:
        if remaining == 0:
            indices.append(prefix)
            return
        for a in range(budget + 1):
            extend(prefix + (a,), budget - a, remaining - 1)

    extend((), k, d)
    return IndexSet(d, tuple(indices), kind="total_degree", degree=k)


def hyperbolic_cross_set(d: int, k: int, max_cardinality: int = DEFAULT_MAX_CARDINALITY) -> IndexSet:
    """All alpha with prod_j (alpha_j + 1) <= k + 1.

    The closed-form bound badly overestimates the true count in high
    dimension, so the cap is enforced during enumeration instead of eagerly.
    """
    _check_args(d, k)
    indices: list[MultiIndex] = []

    def extend(prefix: MultiIndex, budget: int, remaining: int) -> None:
        if remaining == 0:
            indices.append(prefix)
            if len(indices) > max_cardinality:
                raise ValueError(f"hyperbolic-cross set exceeds cap {max_cardinality}")
            return
        a = 0
        while (a + 1) <= budget:
            extend(prefix + (a,), budget // (a + 1), remaining - 1)
            a += 1

    extend((), k + 1, d)
    return IndexSet(d, tuple(indices), kind="hyperbolic_cross", degree=k)


def is_lower_set(index_set: IndexSet) -> bool:
    """True iff the set is closed under componentwise decrease.

    Checking single-coordinate decrements suffices: iterating them reaches
    every componentwise predecessor.
    """
    members = index_set._lookup
    for alpha in index_set:
        for j, a in enumerate(alpha):
            if a > 0 and alpha[:j] + (a - 1,) + alpha[j + 1:] not in members:
                return False
    return True
