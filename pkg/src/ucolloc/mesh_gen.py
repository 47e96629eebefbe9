"""Unstructured collocation meshes: iid Monte Carlo draws, deterministic
prime-seeded cosine lattices (Weil points), random subsets of tensor Gauss
grids, log-mapped uniform samples for the real line, and greedy discrete
Leja subsets.

Every sampler is a pure function of its parameters and seed, so meshes are
bit-reproducible.  Points are stored row-wise (M x d) and never mutated.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .poly_basis import TensorBasis, gauss_rule, CHEBYSHEV


@dataclass(frozen=True)
class NodalArray:
    """M points in d dimensions plus the parameters that produced them."""

    dimension: int
    points: np.ndarray
    provenance: dict

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        pts = pts.reshape(pts.shape[0], -1)
        if pts.shape[1] != self.dimension:
            raise ValueError(f"points are {pts.shape[1]}-dimensional, expected {self.dimension}")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def count(self) -> int:
        return self.points.shape[0]

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("# ucolloc mesh\n")
            fh.write(f"# provenance: {json.dumps(self.provenance, sort_keys=True)}\n")
            fh.write(f"# dimension: {self.dimension}\n")
            fh.write(",".join(f"z{j}" for j in range(self.dimension)) + "\n")
            for row in self.points:
                fh.write(",".join(repr(float(v)) for v in row) + "\n")

    @staticmethod
    def from_csv(path) -> "NodalArray":
        provenance, rows, dimension = {}, [], None
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                if line.startswith("#"):
                    body = line.lstrip("#").strip()
                    if body.startswith("provenance:"):
                        provenance = json.loads(body.split(":", 1)[1])
                    elif body.startswith("dimension:"):
                        dimension = int(body.split(":", 1)[1])
                    continue
                if line[0].isalpha() or line.startswith("z"):
                    continue  # header row
                rows.append([float(v) for v in line.split(",")])
        if not rows:
            raise ValueError(f"no mesh rows found in {path}")
        pts = np.array(rows)
        return NodalArray(dimension or pts.shape[1], pts, provenance)

    def to_json(self) -> str:
        return json.dumps(
            {
                "dimension": self.dimension,
                "provenance": self.provenance,
                "points": [[float(v) for v in row] for row in self.points],
            }
        )

    @staticmethod
    def from_json(text: str) -> "NodalArray":
        obj = json.loads(text)
        return NodalArray(obj["dimension"], np.array(obj["points"]), obj.get("provenance", {}))


def derive_seed(seed: int, trial: int) -> int:
    """Per-trial seed: master seed XOR trial index (order-independent)."""
    return int(seed) ^ int(trial)


def sample_iid(density: str, M: int, d: int, seed: int) -> NodalArray:
    """M iid draws from the named density, one column per dimension.

    Chebyshev draws are realized as cos(pi * U) with U uniform on (0, 1),
    which lands strictly inside (-1, 1].  U = 0 is resampled so points stay
    off the boundary.
    """
    if M < 1:
        raise ValueError("need M >= 1 samples")
    rng = np.random.default_rng(seed)
    if density == "uniform":
        pts = rng.uniform(-1.0, 1.0, size=(M, d))
    elif density == "chebyshev":
        u = rng.random(size=(M, d))
        while np.any(u == 0.0):
            u[u == 0.0] = rng.random(np.count_nonzero(u == 0.0))
        pts = np.cos(np.pi * u)
    elif density == "gaussian":
        pts = rng.standard_normal(size=(M, d))
    else:
        raise ValueError(f"unknown sampling density {density!r}")
    return NodalArray(d, pts, {"sampler": "iid", "density": density, "count": M,
                               "dimension": d, "seed": int(seed)})


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def smallest_weil_prime(M: int) -> int:
    """Smallest prime whose Weil point count floor(p/2) is >= M."""
    p = 2 * M + 1
    while not is_prime(p):
        p += 1
    return p


def weil_points(modulus: int, d: int) -> NodalArray:
    """Deterministic cosine lattice seeded by a prime modulus.

    Point j (j = 0, ..., floor(modulus/2) - 1) has components
    cos(2 pi (j^q mod modulus) / modulus) for q = 1..d.  The second half of
    the full residue sequence mirrors the first (cosine is even), hence the
    halved count.
    """
    if not is_prime(modulus):
        raise ValueError(f"Weil modulus must be prime, got {modulus}")
    if modulus < 3:
        raise ValueError("Weil modulus must be >= 3")
    M = modulus // 2
    j = np.arange(M, dtype=np.int64)
    pts = np.empty((M, d))
    residue = np.ones(M, dtype=np.int64)
    for q in range(d):
        residue = (residue * j) % modulus
        pts[:, q] = np.cos(2.0 * np.pi * residue / modulus)
    return NodalArray(d, pts, {"sampler": "weil", "modulus": int(modulus), "dimension": d})


def subsampled_gauss_grid(k: int, d: int, M: int, seed: int) -> NodalArray:
    """M distinct points drawn uniformly from the (k+1)^d tensor grid of
    one-dimensional Chebyshev-Gauss nodes.

    Grids too large to enumerate are sampled by drawing digit tuples and
    rejecting duplicates (collisions are vanishingly rare at M << (k+1)^d).
    """
    total = (k + 1) ** d
    if M > total:
        raise ValueError(f"requested {M} points from a grid of {total}")
    nodes, _ = gauss_rule(CHEBYSHEV, k + 1)
    rng = np.random.default_rng(seed)
    if total <= 10**6:
        flat = rng.choice(total, size=M, replace=False)
        digits = np.empty((M, d), dtype=np.int64)
        rem = flat
        for j in range(d - 1, -1, -1):
            digits[:, j] = rem % (k + 1)
            rem = rem // (k + 1)
    else:
        seen: set[tuple[int, ...]] = set()
        chosen: list[tuple[int, ...]] = []
        while len(chosen) < M:
            draw = rng.integers(0, k + 1, size=(M - len(chosen), d))
            for row in draw:
                key = tuple(int(v) for v in row)
                if key not in seen:
                    seen.add(key)
                    chosen.append(key)
        digits = np.array(chosen, dtype=np.int64)
    pts = nodes[digits]
    return NodalArray(d, pts, {"sampler": "gauss_subsample", "grid_degree": int(k),
                               "count": int(M), "dimension": d, "seed": int(seed)})


def mapped_uniform(M: int, L: float, seed: int) -> NodalArray:
    """Uniform draws on (-1, 1) pushed to the real line by the log map
    z = (L/2) log((1 - xi)/(1 + xi)).  One-dimensional; L ~ sqrt(N) is the
    recommended scale for an N-term expansion."""
    if L <= 0:
        raise ValueError("map parameter L must be positive")
    rng = np.random.default_rng(seed)
    xi = rng.uniform(-1.0, 1.0, size=M)
    while np.any(np.abs(xi) == 1.0):  # probability zero, but keep the map finite
        bad = np.abs(xi) == 1.0
        xi[bad] = rng.uniform(-1.0, 1.0, size=np.count_nonzero(bad))
    z = 0.5 * L * np.log((1.0 - xi) / (1.0 + xi))
    return NodalArray(1, z.reshape(-1, 1), {"sampler": "mapped_uniform", "count": int(M),
                                            "map_scale": float(L), "seed": int(seed)})


def discrete_leja(candidates: NodalArray, basis: TensorBasis, N: int) -> NodalArray:
    """Greedy size-N subset of the candidates via row-pivoted elimination.

    Gaussian elimination with partial row pivoting runs over the first N
    basis columns (canonical graded order); the pivot rows, in selection
    order, are the Leja points.  Column j only sees columns <= j, so the
    selection is nested in N.  Ties break toward the lowest row index.
    """
    if N < 1:
        raise ValueError("need N >= 1 points")
    if len(basis.index_set) < N:
        raise ValueError(f"basis has {len(basis.index_set)} columns, need {N}")
    work = basis.design_values(candidates.points)[:, :N].copy()
    if N > candidates.count:
        raise ValueError(f"only {candidates.count} candidates for {N} points")
    tol = 1e-12 * max(1.0, float(np.abs(work).max()))
    available = np.ones(candidates.count, dtype=bool)
    chosen: list[int] = []
    for j in range(N):
        col = np.where(available, np.abs(work[:, j]), -1.0)
        piv = int(np.argmax(col))
        if col[piv] <= tol:
            raise ValueError(f"candidate matrix rank deficient: achieved rank {j} of {N}")
        available[piv] = False
        chosen.append(piv)
        factors = work[:, j] / work[piv, j]
        update = available  # already-chosen rows stay as they were
        work[update, j:] -= np.outer(factors[update], work[piv, j:])
    pts = candidates.points[chosen]
    return NodalArray(candidates.dimension, pts,
                      {"sampler": "discrete_leja", "count": int(N),
                       "candidates": candidates.provenance})


def arcsine_cdf(z) -> np.ndarray:
    """CDF of the arcsine (Chebyshev) measure on [-1, 1]."""
    return 0.5 + np.arcsin(np.clip(z, -1.0, 1.0)) / np.pi


def empirical_marginal_distance(mesh: NodalArray, coordinate: int, target: str = "arcsine") -> float:
    """Kolmogorov-Smirnov distance of one coordinate's empirical CDF to the
    target law (only the arcsine law is supported)."""
    if target != "arcsine":
        raise ValueError(f"unsupported target distribution {target!r}")
    if not 0 <= coordinate < mesh.dimension:
        raise ValueError(f"coordinate {coordinate} out of range for dimension {mesh.dimension}")
    x = np.sort(mesh.points[:, coordinate])
    cdf = arcsine_cdf(x)
    n = x.size
    grid = np.arange(1, n + 1) / n
    return float(max((grid - cdf).max(), (cdf - (grid - 1.0 / n)).max()))
