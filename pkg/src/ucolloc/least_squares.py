"""Overdetermined (weighted) least-squares collocation and surrogate evaluation."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lstsq

from .design import DesignMatrix, WeightVector
from .index_sets import IndexSet
from .mesh_gen import NodalArray
from .poly_basis import TensorBasis, get_family

#: sigma_min / sigma_max below this declares numerical rank deficiency.
RANK_TOL = 1e-12


@dataclass(frozen=True)
class Surrogate:
    """Polynomial surrogate: coefficients over a tensor basis."""

    basis: TensorBasis
    coefficients: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coefficients, dtype=float).reshape(-1)
        if coeffs.size != len(self.basis):
            raise ValueError(f"{coeffs.size} coefficients for {len(self.basis)} basis functions")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coefficients", coeffs)

    def to_json(self) -> str:
        return json.dumps(
            {
                "index_set": json.loads(self.basis.index_set.to_json()),
                "families": [f.name for f in self.basis.families],
                "coefficients": [float(c) for c in self.coefficients],
            }
        )

    @staticmethod
    def from_json(text: str) -> "Surrogate":
        obj = json.loads(text)
        index_set = IndexSet.from_json(json.dumps(obj["index_set"]))
        families = tuple(get_family(name) for name in obj["families"])
        return Surrogate(TensorBasis(families, index_set), np.array(obj["coefficients"]))


def solve_ls(A: DesignMatrix, u) -> tuple[Surrogate, float]:
    """Least-squares coefficients argmin ||Av - u||_2 via orthogonal factorization.

    Honors row weights already attached to A (rows of A and u scaled by
    sqrt(w)).  Returns the surrogate and the (weighted) residual norm.
    """
    u = np.asarray(u, dtype=float).reshape(-1)
    M, N = A.shape
    if u.size != M:
        raise ValueError(f"data length {u.size} != {M} mesh points")
    if M < N:
        raise ValueError(f"underdetermined system (M={M} < N={N}); use sparse_recovery")
    B = A.weighted_values()
    rhs = u if A.row_weights is None else np.sqrt(A.row_weights.values) * u
    coeffs, _, rank, _ = lstsq(B, rhs, cond=RANK_TOL, lapack_driver="gelsd")
    if rank < N:
        raise ValueError(f"design matrix rank deficient: numerical rank {rank} < {N} columns")
    residual = float(np.linalg.norm(B @ coeffs - rhs))
    return Surrogate(A.basis, coeffs), residual


def solve_weighted_ls(A: DesignMatrix, u, weights: WeightVector) -> tuple[Surrogate, float]:
    """Minimize sum_m w_m (u_m - p(z_m))^2 by scaling rows with sqrt(w_m)."""
    if A.row_weights is not None:
        raise ValueError("design matrix already carries row weights")
    return solve_ls(A.with_weights(weights), u)


def eval_surrogate(surrogate: Surrogate, points) -> np.ndarray:
    """Evaluate sum_alpha c_alpha phi_alpha at each point (rows of `points`)."""
    pts = points.points if isinstance(points, NodalArray) else np.atleast_2d(np.asarray(points, dtype=float))
    return surrogate.basis.design_values(pts) @ surrogate.coefficients


def sup_error(surrogate: Surrogate, truth, test_points: NodalArray) -> float:
    """max |surrogate - truth| over the test points; `truth` maps an (M, d)
    array of points to M values."""
    approx = eval_surrogate(surrogate, test_points)
    exact = np.asarray(truth(test_points.points), dtype=float).reshape(-1)
    return float(np.abs(approx - exact).max())
