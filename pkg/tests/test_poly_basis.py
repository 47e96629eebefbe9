import math

import numpy as np
import pytest

from oracles import hermite_series, quadrature_gram
from ucolloc.index_sets import total_degree_set
from ucolloc.poly_basis import (CHEBYSHEV, HERMITE, LEGENDRE, TensorBasis, density_eval,
                                eval_tensor, eval_univariate, gauss_rule, get_family,
                                hermite_function, quadrature_to_csv, tensor_basis)


@pytest.mark.parametrize("family", [CHEBYSHEV, LEGENDRE, HERMITE])
def test_quadrature_orthonormality(family):
    gram = quadrature_gram(family, 30)
    assert np.abs(gram - np.eye(31)).max() < 1e-10


def test_phi_zero_is_one():
    for family in (CHEBYSHEV, LEGENDRE, HERMITE):
        assert eval_univariate(family, 0, 0.37) == 1.0


def test_chebyshev_endpoint_value():
    assert eval_univariate(CHEBYSHEV, 2, 1.0) == pytest.approx(math.sqrt(2.0), abs=1e-12)


def test_legendre_endpoint_values():
    # orthonormal Legendre satisfies phi_n(1) = sqrt(2n + 1)
    for n in range(8):
        assert eval_univariate(LEGENDRE, n, 1.0) == pytest.approx(math.sqrt(2 * n + 1), rel=1e-12)


def test_chebyshev_recurrence_matches_cosine_form():
    theta = np.linspace(1e-3, np.pi - 1e-3, 101)
    z = np.cos(theta)
    for n in range(1, 101):
        ref = math.sqrt(2.0) * np.cos(n * theta)
        assert np.abs(eval_univariate(CHEBYSHEV, n, z) - ref).max() < 1e-10


def test_support_violation_raises():
    with pytest.raises(ValueError, match="support"):
        eval_univariate(CHEBYSHEV, 3, 1.5)
    # Hermite has no compact support
    eval_univariate(HERMITE, 3, 25.0)


def test_tensor_evaluation_is_product():
    basis = tensor_basis("chebyshev", total_degree_set(3, 4))
    rng = np.random.default_rng(0)
    pts = rng.uniform(-1, 1, size=(20, 3))
    table = basis.design_values(pts)
    for n, alpha in enumerate(basis.index_set):
        direct = np.ones(20)
        for j, a in enumerate(alpha):
            direct *= eval_univariate(CHEBYSHEV, a, pts[:, j])
        assert np.allclose(table[:, n], direct, rtol=0, atol=1e-13)


def test_eval_tensor_values():
    basis = tensor_basis("chebyshev", total_degree_set(2, 2))
    assert eval_tensor(basis, (0, 0), (0.3, -0.8)) == 1.0
    assert eval_tensor(basis, (1, 1), (1.0, 1.0)) == pytest.approx(2.0, abs=1e-12)
    # zero degree in the second coordinate: value independent of it
    v1 = eval_tensor(basis, (2, 0), (0.4, -0.9))
    v2 = eval_tensor(basis, (2, 0), (0.4, 0.2))
    assert v1 == v2


def test_eval_tensor_validation():
    basis = tensor_basis("legendre", total_degree_set(2, 2))
    with pytest.raises(ValueError, match="index set"):
        eval_tensor(basis, (3, 3), (0.0, 0.0))
    with pytest.raises(ValueError, match="components"):
        eval_tensor(basis, (1, 0), (0.0, 0.0, 0.0))


def test_hermite_function_values():
    assert hermite_function(0, 0.0) == 1.0
    # Gaussian envelope dominates for large argument
    assert abs(hermite_function(1, 12.0)) < 1e-20
    for n in (2, 4, 7):
        for z in (-1.3, 0.25, 1.0, 3.0):
            ref = math.exp(-z * z / 2.0) * hermite_series(n, z)
            assert hermite_function(n, z) == pytest.approx(ref, abs=1e-12)


def test_hermite_function_bounded_and_decaying():
    grid = np.linspace(-12, 12, 4001)
    for n in (3, 8):
        values = np.abs(hermite_function(n, grid))
        assert np.isfinite(values).all()
        peak = values.max()
        assert values[0] < 1e-8 * peak and values[-1] < 1e-8 * peak


def test_density_values():
    assert density_eval("uniform", [0.3, -0.5]) == pytest.approx(0.25)
    assert density_eval("chebyshev", [0.0]) == pytest.approx(1.0 / math.pi)
    assert density_eval("gaussian", [0.0]) == pytest.approx((2 * math.pi) ** -0.5)
    assert density_eval("hermite", [0.0]) == pytest.approx(math.pi ** -0.5)
    assert density_eval("unit", [0.4, 0.4, 0.4]) == 1.0
    assert density_eval(CHEBYSHEV, [0.0]) == pytest.approx(1.0 / math.pi)


def test_density_normalization_by_quadrature():
    for family in (CHEBYSHEV, LEGENDRE, HERMITE):
        nodes, weights = gauss_rule(family, 40)
        assert weights.sum() == pytest.approx(1.0, abs=1e-12)


def test_density_errors():
    with pytest.raises(ValueError, match="undefined"):
        density_eval("chebyshev", [1.0])
    with pytest.raises(ValueError, match="outside"):
        density_eval("uniform", [1.5])
    with pytest.raises(ValueError, match="unknown"):
        density_eval("cauchy", [0.0])


def test_gauss_rule_chebyshev_closed_form():
    for n in (1, 5, 10):
        nodes, weights = gauss_rule(CHEBYSHEV, n)
        ref = np.sort(np.cos((2 * np.arange(n) + 1) * np.pi / (2 * n)))
        assert np.abs(nodes - ref).max() < 1e-13
        assert np.abs(weights - 1.0 / n).max() < 1e-13


def test_family_registry():
    assert get_family("legendre") is LEGENDRE
    with pytest.raises(ValueError, match="unknown"):
        get_family("jacobi")


def test_tensor_basis_validation():
    with pytest.raises(ValueError, match="families"):
        TensorBasis((CHEBYSHEV,), total_degree_set(2, 1))


def test_quadrature_csv_export(tmp_path):
    path = tmp_path / "rule.csv"
    quadrature_to_csv(LEGENDRE, 7, path)
    rows = path.read_text().strip().splitlines()
    assert rows[0] == "node,weight"
    assert len(rows) == 8
    nodes = np.array([float(r.split(",")[0]) for r in rows[1:]])
    ref, _ = gauss_rule(LEGENDRE, 7)
    assert np.allclose(nodes, ref, atol=0, rtol=0)
