"""Least orthogonal interpolation (M = N) on arbitrary distinct-point meshes,
cardinal function extraction, and weighted Lebesgue-constant estimation.

The factorization P A = L U H works on the design matrix A over a growing
total-degree candidate basis, processed in graded degree blocks.  Within the
active block, rows are reduced by a row-pivoted orthogonal elimination
(pivot on the largest remaining in-block row norm, ties to the lowest row
index); a block is exhausted when its residual row norms fall below
1e-12 of the block's leading scale, and elimination then advances to the
next degree.  Each processed row contributes its leading degree block --
normalized, these blocks are the orthonormal rows of H_tilde and span the
identified interpolation space.  H = U^{-1} R has H H_tilde^T = I, which is
exactly what makes c = H_tilde^T U^{-1} L^{-1} P u interpolate the data.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .index_sets import total_degree_set
from .least_squares import Surrogate
from .mesh_gen import NodalArray
from .poly_basis import TensorBasis, density_eval, eval_univariate_table, FAMILY_FOR_DENSITY

#: Residual row norms below this fraction of the block's leading scale count
#: as exhausted.
BLOCK_TOL = 1e-12

#: Candidate total degree is grown adaptively but never past this default.
DEFAULT_MAX_DEGREE = 40

_FAMILY_TAGS = dict(FAMILY_FOR_DENSITY, gaussian=FAMILY_FOR_DENSITY["hermite"])


@dataclass(frozen=True)
class LOIFactorization:
    """P A = L U H over the total-degree candidate basis of degree `degree`."""

    mesh: NodalArray
    density: str
    permutation: np.ndarray  # row m of the factorization is mesh point permutation[m]
    L: np.ndarray
    U: np.ndarray
    H: np.ndarray
    H_tilde: np.ndarray
    basis: TensorBasis  # candidate total-degree basis (K columns)
    row_degrees: np.ndarray  # least degree contributed by each factorization row

    @property
    def count(self) -> int:
        return self.mesh.count

    @property
    def degree(self) -> int:
        return int(self.row_degrees.max())

    def block_dimensions(self) -> dict[int, int]:
        """Number of interpolation-space directions found per degree."""
        degrees, counts = np.unique(self.row_degrees, return_counts=True)
        return {int(q): int(c) for q, c in zip(degrees, counts)}

    def space_coefficients(self) -> np.ndarray:
        """Orthonormal coefficient vectors (rows) spanning the identified space."""
        return self.H_tilde

    def summary_json(self) -> str:
        return json.dumps(
            {
                "points": self.count,
                "density": self.density,
                "degree": self.degree,
                "block_dimensions": {str(k): v for k, v in sorted(self.block_dimensions().items())},
                "candidate_columns": self.H.shape[1],
            }
        )


def _block_columns(d: int, degree: int) -> int:
    """Number of multi-indices of total order exactly `degree`."""
    return math.comb(d + degree - 1, degree) if degree > 0 else 1


def loi_factorize(mesh: NodalArray, density: str = "chebyshev",
                  max_degree: int = DEFAULT_MAX_DEGREE) -> LOIFactorization:
    """Identify the least interpolation space of the mesh under `density`."""
    try:
        family = _FAMILY_TAGS[density]
    except KeyError:
        raise ValueError(f"no orthonormal family for density {density!r}") from None
    pts = mesh.points
    M, d = pts.shape
    if np.unique(pts, axis=0).shape[0] != M:
        raise ValueError("mesh contains duplicate points")

    perm = np.arange(M)
    L = np.eye(M)
    R = np.empty((M, 0))
    univariate = [eval_univariate_table(family, max_degree, pts[:, j]) for j in range(d)]
    row_degrees = np.empty(M, dtype=int)
    chunk_slices: list[slice] = []
    chunk_norms: list[float] = []
    pos = 0
    degree = -1
    while pos < M:
        degree += 1
        if degree > max_degree:
            raise ValueError(
                f"achieved rank {pos} of {M} at maximum candidate degree {max_degree}"
            )
        block = [alpha for alpha in total_degree_set(d, degree) if sum(alpha) == degree]
        cols = np.ones((M, len(block)))
        for n, alpha in enumerate(block):
            for j, a in enumerate(alpha):
                if a:
                    cols[:, n] *= univariate[j][:, a]
        cols = cols[perm]
        # replay the eliminations done so far on the fresh columns
        cols = solve_triangular(L, cols, lower=True, unit_diagonal=True)
        sl = slice(R.shape[1], R.shape[1] + len(block))
        R = np.hstack([R, cols])
        block_scale = 0.0
        while pos < M:
            norms = np.linalg.norm(R[pos:, sl], axis=1)
            piv = pos + int(np.argmax(norms))
            lead = float(norms[piv - pos])
            block_scale = max(block_scale, lead)
            if lead <= BLOCK_TOL * max(block_scale, 1e-300):
                break  # block exhausted; grow the degree
            if piv != pos:
                R[[pos, piv]] = R[[piv, pos]]
                perm[[pos, piv]] = perm[[piv, pos]]
                L[[pos, piv], :pos] = L[[piv, pos], :pos]
            chunk = R[pos, sl]
            factors = (R[pos + 1:, sl] @ chunk) / (lead * lead)
            R[pos + 1:, :] -= np.outer(factors, R[pos, :])
            L[pos + 1:, pos] = factors
            row_degrees[pos] = degree
            chunk_slices.append(sl)
            chunk_norms.append(lead)
            pos += 1

    H_tilde = np.zeros_like(R)
    for i, (sl, norm) in enumerate(zip(chunk_slices, chunk_norms)):
        H_tilde[i, sl] = R[i, sl] / norm
    U = np.triu(R @ H_tilde.T)
    H = solve_triangular(U, R, lower=False)
    basis = TensorBasis((family,) * d, total_degree_set(d, degree))
    return LOIFactorization(mesh, density, perm, L, U, H, H_tilde, basis, row_degrees)


def loi_interpolate(fact: LOIFactorization, u) -> Surrogate:
    """Unique interpolant of the data from the identified space:
    c = H_tilde^T U^{-1} L^{-1} P u."""
    u = np.asarray(u, dtype=float).reshape(-1)
    if u.size != fact.count:
        raise ValueError(f"data length {u.size} != {fact.count} mesh points")
    y = solve_triangular(fact.L, u[fact.permutation], lower=True, unit_diagonal=True)
    w = solve_triangular(fact.U, y, lower=False)
    return Surrogate(fact.basis, fact.H_tilde.T @ w)


def cardinal_functions(fact: LOIFactorization) -> list[Surrogate]:
    """Lagrange functions l_m with l_m(z_n) = delta_{mn}."""
    coeffs = _cardinal_coefficients(fact)
    return [Surrogate(fact.basis, coeffs[:, m]) for m in range(fact.count)]


def _cardinal_coefficients(fact: LOIFactorization) -> np.ndarray:
    """K x M matrix whose column m holds the coefficients of l_m."""
    perm_matrix = np.eye(fact.count)[fact.permutation]  # column m is P e_m
    y = solve_triangular(fact.L, perm_matrix, lower=True, unit_diagonal=True)
    w = solve_triangular(fact.U, y, lower=False)
    return fact.H_tilde.T @ w


@dataclass(frozen=True)
class LebesgueEstimate:
    """Dense-candidate lower bound on the (weighted) Lebesgue constant."""

    value: float
    argmax: np.ndarray
    candidates_used: int


def lebesgue_constant(fact: LOIFactorization, density: str,
                      candidates: NodalArray) -> LebesgueEstimate:
    """Maximum of rho(z) sum_m |l_m(z)| / rho(z_m) over candidates + mesh.

    `density` may be "unit" for the classical unweighted constant.  The
    returned value is a lower bound on the true supremum.
    """
    if candidates.count < 1:
        raise ValueError("need a nonempty candidate set")
    if candidates.dimension != fact.mesh.dimension:
        raise ValueError("candidate dimension does not match the mesh")
    pts = np.vstack([candidates.points, fact.mesh.points])
    coeffs = _cardinal_coefficients(fact)
    cardinal_values = fact.basis.design_values(pts) @ coeffs  # rows: points, cols: l_m
    node_density = np.asarray(density_eval(density, fact.mesh.points), dtype=float).reshape(-1)
    point_density = np.asarray(density_eval(density, pts), dtype=float).reshape(-1)
    lebesgue = point_density * (np.abs(cardinal_values) / node_density).sum(axis=1)
    best = int(np.argmax(lebesgue))
    return LebesgueEstimate(float(lebesgue[best]), pts[best].copy(), candidates.count)


def scale_mesh(mesh: NodalArray, factor: float) -> NodalArray:
    """Contracted copy of a mesh (e.g. by k^(-1/r) for exponential weights
    exp(-||z||^r) when comparing against compactly supported equilibrium
    behavior)."""
    if factor <= 0:
        raise ValueError("scale factor must be positive")
    provenance = dict(mesh.provenance)
    provenance["scaled_by"] = float(factor)
    return NodalArray(mesh.dimension, factor * mesh.points, provenance)
