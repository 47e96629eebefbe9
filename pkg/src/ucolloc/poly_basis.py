"""Orthonormal polynomial families, tensor products, and probability densities.

All families are orthonormal with respect to a *probability* density (the
density integrates to 1 and phi_0 = 1), so the discrete Gram (1/M) A^T A of
any well-sampled design matrix tends to the identity.  Supported families:

* ``chebyshev``  -- density 1/(pi sqrt(1-z^2)) on (-1, 1)
* ``legendre``   -- density 1/2 on [-1, 1]
* ``hermite``    -- density exp(-z^2)/sqrt(pi) on the real line

Evaluation uses the forward three-term recurrence in orthonormal form

    sqrt(b_{n+1}) p_{n+1}(z) = (z - a_n) p_n(z) - sqrt(b_n) p_{n-1}(z),

with b_0 the total mass of the weight (1 for probability densities).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .index_sets import IndexSet

_SQRT_PI = math.sqrt(math.pi)
_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class BasisFamily:
    """Univariate orthonormal family described by its recurrence and density."""

    name: str
    support: tuple[float, float] | None  # None = whole real line
    recurrence: Callable[[int], tuple[np.ndarray, np.ndarray]]
    density: Callable[[np.ndarray], np.ndarray]

    def __repr__(self):
        return f"BasisFamily({self.name!r})"


def _chebyshev_recurrence(n: int):
    a = np.zeros(n + 1)
    b = np.full(n + 1, 0.25)
    b[0] = 1.0
    if n >= 1:
        b[1] = 0.5
    return a, b


def _legendre_recurrence(n: int):
    a = np.zeros(n + 1)
    m = np.arange(n + 1, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        b = m * m / (4.0 * m * m - 1.0)
    b[0] = 1.0
    return a, b


def _hermite_recurrence(n: int):
    a = np.zeros(n + 1)
    b = np.arange(n + 1, dtype=float) / 2.0
    b[0] = 1.0
    return a, b


def _chebyshev_density(z):
    z = np.asarray(z, dtype=float)
    if np.any(np.abs(z) >= 1.0):
        raise ValueError("chebyshev density undefined for |z| >= 1")
    return 1.0 / (np.pi * np.sqrt(1.0 - z * z))


def _legendre_density(z):
    z = np.asarray(z, dtype=float)
    if np.any(np.abs(z) > 1.0):
        raise ValueError("uniform density evaluated outside [-1, 1]")
    return np.full_like(z, 0.5)


def _hermite_density(z):
    z = np.asarray(z, dtype=float)
    return np.exp(-z * z) / _SQRT_PI


CHEBYSHEV = BasisFamily("chebyshev", (-1.0, 1.0), _chebyshev_recurrence, _chebyshev_density)
LEGENDRE = BasisFamily("legendre", (-1.0, 1.0), _legendre_recurrence, _legendre_density)
HERMITE = BasisFamily("hermite", None, _hermite_recurrence, _hermite_density)

_FAMILIES = {f.name: f for f in (CHEBYSHEV, LEGENDRE, HERMITE)}

#: Density tag for sampling / weighting -> the family orthonormal under it.
FAMILY_FOR_DENSITY = {"chebyshev": CHEBYSHEV, "uniform": LEGENDRE, "hermite": HERMITE}


def get_family(name: str) -> BasisFamily:
    try:
        return _FAMILIES[name]
    except KeyError:
        raise ValueError(f"unknown basis family {name!r}; choose from {sorted(_FAMILIES)}") from None


def _check_support(family: BasisFamily, z: np.ndarray) -> None:
    if family.support is not None:
        lo, hi = family.support
        if np.any(z < lo) or np.any(z > hi):
            raise ValueError(f"point outside support {family.support} of {family.name} family")


def eval_univariate(family: BasisFamily, n: int, z):
    """Degree-n orthonormal polynomial of `family` at z (scalar or array)."""
    if n < 0:
        raise ValueError("polynomial degree must be >= 0")
    scalar = np.isscalar(z)
    z = np.atleast_1d(np.asarray(z, dtype=float))
    _check_support(family, z)
    out = eval_univariate_table(family, n, z)[:, n]
    return float(out[0]) if scalar else out


def eval_univariate_table(family: BasisFamily, nmax: int, z: np.ndarray) -> np.ndarray:
    """Evaluate degrees 0..nmax at the points z; returns (len(z), nmax+1)."""
    z = np.asarray(z, dtype=float)
    _check_support(family, z)
    a, b = family.recurrence(nmax)
    sqrt_b = np.sqrt(b)
    table = np.empty((z.size, nmax + 1))
    table[:, 0] = 1.0
    if nmax >= 1:
        table[:, 1] = (z - a[0]) / sqrt_b[1]
    for m in range(1, nmax):
        table[:, m + 1] = ((z - a[m]) * table[:, m] - sqrt_b[m] * table[:, m - 1]) / sqrt_b[m + 1]
    return table


@dataclass(frozen=True)
class TensorBasis:
    """Tensor product of univariate families over an index set."""

    families: tuple[BasisFamily, ...]
    index_set: IndexSet

    def __post_init__(self):
        if len(self.families) != self.index_set.dimension:
            raise ValueError(
                f"{len(self.families)} families for dimension {self.index_set.dimension}"
            )
        object.__setattr__(self, "families", tuple(self.families))

    @property
    def dimension(self) -> int:
        return self.index_set.dimension

    def __len__(self) -> int:
        return len(self.index_set)

    def design_values(self, points: np.ndarray) -> np.ndarray:
        """Matrix of basis evaluations: entry (m, n) = phi_n(points[m])."""
        points = np.asarray(points, dtype=float)
        if points.ndim != 2 or points.shape[1] != self.dimension:
            raise ValueError(f"points must be (M, {self.dimension}), got {points.shape}")
        alphas = self.index_set.as_array()
        out = np.ones((points.shape[0], len(self.index_set)))
        for j, family in enumerate(self.families):
            table = eval_univariate_table(family, int(alphas[:, j].max(initial=0)), points[:, j])
            out *= table[:, alphas[:, j]]
        return out


def tensor_basis(family_name: str, index_set: IndexSet) -> TensorBasis:
    """Isotropic tensor basis: the same family in every dimension."""
    fam = get_family(family_name)
    return TensorBasis((fam,) * index_set.dimension, index_set)


def eval_tensor(basis: TensorBasis, alpha, z) -> float:
    """phi_alpha(z) = prod_j phi_{alpha_j}(z_j)."""
    alpha = tuple(int(a) for a in alpha)
    if alpha not in basis.index_set:
        raise ValueError(f"{alpha} not in the basis index set")
    z = np.asarray(z, dtype=float).reshape(-1)
    if z.size != basis.dimension:
        raise ValueError(f"point has {z.size} components, expected {basis.dimension}")
    value = 1.0
    for j, (family, a) in enumerate(zip(basis.families, alpha)):
        value *= eval_univariate(family, a, z[j])
    return value


def hermite_function(n: int, z):
    """Gaussian-damped Hermite polynomial exp(-z^2/2) phi_n(z)."""
    z_arr = np.asarray(z, dtype=float)
    return np.exp(-z_arr * z_arr / 2.0) * eval_univariate(HERMITE, n, z)


def density_eval(family_or_tag, z):
    """Evaluate a probability density at points z in R^d (product over dims).

    Accepts a BasisFamily (its own orthogonality weight) or one of the tags
    ``uniform``, ``chebyshev``, ``gaussian``, ``hermite``, ``unit``.  The
    ``gaussian`` tag is the standard normal; the Hermite *family* weight is
    exp(-z^2)/sqrt(pi).
    """
    z = np.asarray(z, dtype=float)
    squeeze = z.ndim <= 1
    pts = np.atleast_2d(z)
    if isinstance(family_or_tag, BasisFamily):
        univariate = family_or_tag.density
    elif family_or_tag == "uniform":
        univariate = _legendre_density
    elif family_or_tag == "chebyshev":
        univariate = _chebyshev_density
    elif family_or_tag == "gaussian":
        univariate = lambda t: np.exp(-t * t / 2.0) / _SQRT_2PI
    elif family_or_tag == "hermite":
        univariate = _hermite_density
    elif family_or_tag == "unit":
        univariate = lambda t: np.ones_like(t)
    else:
        raise ValueError(f"unknown density {family_or_tag!r}")
    values = np.ones(pts.shape[0])
    for j in range(pts.shape[1]):
        values *= univariate(pts[:, j])
    return float(values[0]) if squeeze and pts.shape[0] == 1 else values


def gauss_rule(family: BasisFamily, n: int) -> tuple[np.ndarray, np.ndarray]:
    """n-point Gauss rule of the family's weight via the Jacobi matrix.

    Nodes are Jacobi-matrix eigenvalues; weights come from the Christoffel
    function 1/sum_k phi_k(x_i)^2, which keeps relative accuracy where the
    squared first eigenvector component underflows (extreme Hermite nodes).
    Weights sum to 1 (probability normalization) and nodes of the symmetric
    families must come out symmetric about 0 to 1e-13.
    """
    if n < 1:
        raise ValueError("need at least one quadrature node")
    a, b = family.recurrence(n)
    nodes = eigh_tridiagonal(a[:n], np.sqrt(b[1:n]), eigvals_only=True)
    table = eval_univariate_table(family, n - 1, nodes)
    weights = 1.0 / np.sum(table * table, axis=1)
    scale = max(1.0, float(np.abs(nodes).max()))
    if np.abs(nodes + nodes[::-1]).max() > 1e-13 * scale:
        raise RuntimeError(f"asymmetric Gauss nodes for {family.name} rule of size {n}")
    return nodes, weights


def quadrature_to_csv(family: BasisFamily, n: int, path) -> None:
    """Dump an n-point Gauss rule to CSV for external inspection."""
    nodes, weights = gauss_rule(family, n)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["node", "weight"])
        for x, w in zip(nodes, weights):
            writer.writerow([repr(float(x)), repr(float(w))])
