"""Polynomial surrogates on unstructured collocation meshes.

Three solve regimes over one design-matrix abstraction: least-squares
regression (M > N), l1 sparse recovery (M < N), and least orthogonal
interpolation (M = N), plus the mesh generators and experiment harness
that exercise them.
"""

__version__ = "0.1.0"
