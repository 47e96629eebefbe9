import numpy as np
import pytest

from oracles import naive_surrogate_eval, normal_equation_solve
from ucolloc.design import assemble, ls_weights, unit_weights, WeightVector
from ucolloc.index_sets import total_degree_set
from ucolloc.least_squares import (Surrogate, eval_surrogate, solve_ls, solve_weighted_ls,
                                   sup_error)
from ucolloc.mesh_gen import NodalArray, sample_iid
from ucolloc.poly_basis import tensor_basis


def planted_problem(M=80, degree=4, seed=0, density="chebyshev"):
    mesh = sample_iid(density, M, 2, seed)
    basis = tensor_basis("chebyshev" if density == "chebyshev" else "legendre",
                         total_degree_set(2, degree))
    A = assemble(mesh, basis)
    rng = np.random.default_rng(seed + 1)
    coeffs = rng.standard_normal(len(basis))
    return A, coeffs, A.values @ coeffs


class TestSolveLs:
    def test_recovers_planted_polynomial(self):
        A, coeffs, u = planted_problem()
        surrogate, residual = solve_ls(A, u)
        assert np.abs(surrogate.coefficients - coeffs).max() < 1e-10
        assert residual < 1e-10

    def test_square_system_interpolates(self):
        mesh = sample_iid("chebyshev", 15, 2, 3)
        basis = tensor_basis("chebyshev", total_degree_set(2, 4))
        A = assemble(mesh, basis)
        rng = np.random.default_rng(4)
        u = rng.standard_normal(15)
        # square solve on the leading 15 columns is interpolation
        sub_basis = tensor_basis("chebyshev", basis.index_set)
        assert A.shape[0] == 15
        surrogate, residual = solve_ls(A, u)
        assert residual < 1e-8 * np.abs(u).max()

    def test_matches_normal_equations_oracle(self):
        A, _, _ = planted_problem(M=120, seed=9)
        rng = np.random.default_rng(10)
        u = np.sin(A.mesh.points[:, 0] * 2) + 0.1 * rng.standard_normal(120)
        surrogate, _ = solve_ls(A, u)
        oracle = normal_equation_solve(A.values, u)
        assert np.abs(surrogate.coefficients - oracle).max() < 1e-8

    def test_underdetermined_redirects(self):
        A, _, u = planted_problem(M=10)
        with pytest.raises(ValueError, match="sparse_recovery"):
            solve_ls(A, u)

    def test_rank_deficiency_reports_rank(self):
        mesh = NodalArray(1, np.zeros((6, 1)), {})
        basis = tensor_basis("chebyshev", total_degree_set(1, 2))
        from ucolloc.design import DesignMatrix

        A = DesignMatrix(basis.design_values(mesh.points), mesh, basis)
        with pytest.raises(ValueError, match="rank 1"):
            solve_ls(A, np.ones(6))

    def test_residual_optimality_under_perturbation(self):
        A, _, _ = planted_problem(M=90, seed=12)
        rng = np.random.default_rng(13)
        u = rng.standard_normal(90)
        surrogate, residual = solve_ls(A, u)
        c = surrogate.coefficients
        for _ in range(100):
            delta = rng.standard_normal(c.size)
            delta *= 1e-3 / np.linalg.norm(delta)
            perturbed = np.linalg.norm(A.values @ (c + delta) - u)
            assert perturbed >= residual - 1e-12

    def test_residual_orthogonality(self):
        A, _, _ = planted_problem(M=100, seed=14)
        rng = np.random.default_rng(15)
        u = rng.standard_normal(100)
        surrogate, _ = solve_ls(A, u)
        grad = A.values.T @ (A.values @ surrogate.coefficients - u)
        assert np.abs(grad).max() < 1e-8 * np.abs(u).max()


class TestWeightedLs:
    def test_constant_weights_match_plain(self):
        A, _, u = planted_problem(M=70, seed=20)
        plain, _ = solve_ls(A, u)
        weighted, _ = solve_weighted_ls(A, u, WeightVector("unit", np.full(70, 3.7)))
        assert np.abs(plain.coefficients - weighted.coefficients).max() < 1e-12

    def test_christoffel_weights_recover_legendre_polynomial(self):
        mesh = sample_iid("chebyshev", 120, 2, 21)
        basis = tensor_basis("legendre", total_degree_set(2, 4))
        A = assemble(mesh, basis)
        rng = np.random.default_rng(22)
        coeffs = rng.standard_normal(len(basis))
        u = A.values @ coeffs
        surrogate, residual = solve_weighted_ls(A, u, ls_weights(mesh, "uniform"))
        assert np.abs(surrogate.coefficients - coeffs).max() < 1e-9
        assert residual < 1e-9

    def test_downweighting_removes_corruption(self):
        A, coeffs, u = planted_problem(M=60, seed=23)
        corrupted = u.copy()
        corrupted[17] += 50.0
        weights = np.ones(60)
        weights[17] = 1e-14
        got, _ = solve_weighted_ls(A, corrupted, WeightVector("unit", weights))
        # oracle: drop the corrupted row entirely
        keep = np.ones(60, dtype=bool)
        keep[17] = False
        oracle, *_ = np.linalg.lstsq(A.values[keep], corrupted[keep], rcond=None)
        assert np.abs(got.coefficients - oracle).max() < 1e-8
        assert np.abs(got.coefficients - coeffs).max() < 1e-8

    def test_double_weighting_rejected(self):
        A, _, u = planted_problem(M=70, seed=24)
        W = unit_weights(70)
        with pytest.raises(ValueError, match="already"):
            solve_weighted_ls(A.with_weights(W), u, W)


class TestSurrogateEvaluation:
    def setup_method(self):
        self.basis = tensor_basis("chebyshev", total_degree_set(2, 3))

    def test_zero_and_constant(self):
        zero = Surrogate(self.basis, np.zeros(len(self.basis)))
        pts = np.array([[0.1, 0.2], [-0.5, 0.8]])
        assert np.array_equal(eval_surrogate(zero, pts), [0.0, 0.0])
        c = np.zeros(len(self.basis))
        c[0] = 4.2
        assert np.allclose(eval_surrogate(Surrogate(self.basis, c), pts), 4.2)

    def test_matches_naive_summation_oracle(self):
        rng = np.random.default_rng(30)
        coeffs = rng.standard_normal(len(self.basis))
        surrogate = Surrogate(self.basis, coeffs)
        pts = rng.uniform(-1, 1, size=(100, 2))
        ref = naive_surrogate_eval(self.basis, coeffs, pts)
        assert np.abs(eval_surrogate(surrogate, pts) - ref).max() < 1e-12

    def test_support_violation(self):
        surrogate = Surrogate(self.basis, np.ones(len(self.basis)))
        with pytest.raises(ValueError, match="support"):
            eval_surrogate(surrogate, np.array([[1.2, 0.0]]))

    def test_sup_error_trivials(self):
        rng = np.random.default_rng(31)
        coeffs = rng.standard_normal(len(self.basis))
        surrogate = Surrogate(self.basis, coeffs)
        test_mesh = sample_iid("uniform", 500, 2, 32)
        self_truth = lambda pts: eval_surrogate(surrogate, pts)
        assert sup_error(surrogate, self_truth, test_mesh) == 0.0
        shifted = lambda pts: eval_surrogate(surrogate, pts) + 2.5
        assert sup_error(surrogate, shifted, test_mesh) == pytest.approx(2.5, abs=1e-12)

    def test_json_round_trip(self):
        rng = np.random.default_rng(33)
        surrogate = Surrogate(self.basis, rng.standard_normal(len(self.basis)))
        back = Surrogate.from_json(surrogate.to_json())
        assert back.basis.index_set == surrogate.basis.index_set
        assert [f.name for f in back.basis.families] == ["chebyshev", "chebyshev"]
        assert np.allclose(back.coefficients, surrogate.coefficients, atol=0)

    def test_coefficient_length_checked(self):
        with pytest.raises(ValueError, match="coefficients"):
            Surrogate(self.basis, np.ones(3))
