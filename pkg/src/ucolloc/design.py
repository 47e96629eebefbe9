"""Design matrices, row weights, and sampling-stability diagnostics.

The single normalization convention everywhere: with probability-orthonormal
bases, the Gram matrix is G = (1/M) A^T A, so G -> I under good sampling and
every diagnostic compares against the identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .mesh_gen import NodalArray
from .poly_basis import TensorBasis, density_eval

#: Above this column count spectral quantities switch from dense eigensolves
#: to power iteration.
DENSE_EIG_LIMIT = 2000


@dataclass(frozen=True)
class WeightVector:
    """Positive per-row weights for weighted least squares or l1 preconditioning."""

    kind: str
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1:
            raise ValueError("weights must be a flat vector")
        if not np.all(np.isfinite(vals)) or np.any(vals <= 0.0):
            raise ValueError("weights must be finite and strictly positive")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return self.values.size


@dataclass(frozen=True)
class DesignMatrix:
    """M x N matrix of basis evaluations phi_n(z_m), optionally row-weighted."""

    values: np.ndarray
    mesh: NodalArray
    basis: TensorBasis
    row_weights: WeightVector | None = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.mesh.count, len(self.basis)):
            raise ValueError(
                f"matrix shape {vals.shape} inconsistent with mesh ({self.mesh.count}) "
                f"and basis ({len(self.basis)})"
            )
        if self.row_weights is not None and len(self.row_weights) != self.mesh.count:
            raise ValueError("row weights length does not match mesh count")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def weighted_values(self) -> np.ndarray:
        """Rows scaled by sqrt(w); the matrix actually entering solves."""
        if self.row_weights is None:
            return self.values
        return np.sqrt(self.row_weights.values)[:, None] * self.values

    def with_weights(self, weights: WeightVector) -> "DesignMatrix":
        return DesignMatrix(self.values, self.mesh, self.basis, weights)


def assemble(mesh: NodalArray, basis: TensorBasis) -> DesignMatrix:
    """Evaluate the basis on the mesh; columns follow the index-set order."""
    if mesh.dimension != basis.dimension:
        raise ValueError(f"mesh dimension {mesh.dimension} != basis dimension {basis.dimension}")
    for j, family in enumerate(basis.families):
        if family.support is None:
            continue
        lo, hi = family.support
        bad = np.nonzero((mesh.points[:, j] < lo) | (mesh.points[:, j] > hi))[0]
        if bad.size:
            raise ValueError(
                f"mesh row {int(bad[0])} outside support {family.support} "
                f"of the {family.name} family (coordinate {j})"
            )
    return DesignMatrix(basis.design_values(mesh.points), mesh, basis)


def _require_interior(mesh: NodalArray) -> None:
    if np.any(np.abs(mesh.points) >= 1.0):
        row = int(np.nonzero(np.any(np.abs(mesh.points) >= 1.0, axis=1))[0][0])
        raise ValueError(f"mesh row {row} on or outside the boundary of (-1, 1)^d")


def ls_weights(mesh: NodalArray, density: str) -> WeightVector:
    """Christoffel-style weights w_m = rho(z_m) / rho_c(z_m) for weighted
    least squares on Chebyshev-distributed meshes."""
    _require_interior(mesh)
    rho = density_eval(density, mesh.points)
    rho_c = density_eval("chebyshev", mesh.points)
    return WeightVector("christoffel_ls", np.asarray(rho / rho_c, dtype=float))


def cs_preconditioner(mesh: NodalArray, d: int | None = None) -> WeightVector:
    """Diagonal row preconditioner (pi/2)^(-d/2) prod_j (1 - z_j^2)^(1/4)
    for l1 recovery of Legendre expansions from Chebyshev-type samples."""
    if d is not None and d != mesh.dimension:
        raise ValueError(f"stated dimension {d} != mesh dimension {mesh.dimension}")
    _require_interior(mesh)
    d = mesh.dimension
    w = (np.pi / 2.0) ** (-d / 2.0) * np.prod((1.0 - mesh.points**2) ** 0.25, axis=1)
    return WeightVector("cs_preconditioner", w)


def unit_weights(M: int) -> WeightVector:
    return WeightVector("unit", np.ones(M))


def gram(A: DesignMatrix) -> np.ndarray:
    """Normalized Gram matrix (1/M) A^T A (weighted rows if weights are set)."""
    B = A.weighted_values()
    return (B.T @ B) / B.shape[0]


def _sym_extreme_eigs(S: np.ndarray) -> tuple[float, float]:
    """(largest, smallest) eigenvalue of a symmetric matrix."""
    if S.shape[0] <= DENSE_EIG_LIMIT:
        eigs = np.linalg.eigvalsh(S)
        return float(eigs[-1]), float(eigs[0])
    # Power iteration finds the eigenvalue of largest magnitude; shifting by
    # that magnitude makes each extreme dominant in turn.
    dom = abs(_power_iteration(S))
    eye = np.eye(S.shape[0])
    lam_max = _power_iteration(dom * eye + S) - dom
    lam_min = dom - _power_iteration(dom * eye - S)
    return lam_max, lam_min


def _power_iteration(S: np.ndarray, tol: float = 1e-10, max_iter: int = 10000) -> float:
    rng = np.random.default_rng(0)
    v = rng.standard_normal(S.shape[0])
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        w = S @ v
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        v_new = w / norm
        lam_new = float(v_new @ (S @ v_new))
        if abs(lam_new - lam) <= tol * max(1.0, abs(lam_new)):
            return lam_new
        lam, v = lam_new, v_new
    return lam


def stability_norm(A: DesignMatrix) -> float:
    """Spectral norm of gram(A) - I; zero means perfect discrete orthonormality."""
    G = gram(A)
    S = G - np.eye(G.shape[0])
    hi, lo = _sym_extreme_eigs(S)
    return float(max(abs(lo), abs(hi)))


def condition_number(A: DesignMatrix) -> float:
    """cond of the normalized Gram matrix; +inf for rank deficiency."""
    lam_max, lam_min = _sym_extreme_eigs(gram(A))
    if lam_min <= 0.0 or lam_min <= 1e-300 * lam_max:
        return math.inf
    return lam_max / lam_min


def matrix_to_csv(values: np.ndarray, path) -> None:
    """Dump a dense matrix to CSV for external inspection."""
    np.savetxt(path, np.asarray(values), delimiter=",")
