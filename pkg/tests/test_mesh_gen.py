import math

import numpy as np
import pytest

from ucolloc.index_sets import total_degree_set
from ucolloc.mesh_gen import (NodalArray, arcsine_cdf, derive_seed, discrete_leja,
                              empirical_marginal_distance, is_prime, mapped_uniform,
                              sample_iid, smallest_weil_prime, subsampled_gauss_grid,
                              weil_points)
from ucolloc.poly_basis import gauss_rule, CHEBYSHEV, tensor_basis


def full_weil_lattice(prime: int, d: int) -> np.ndarray:
    j = np.arange(prime, dtype=np.int64)
    pts = np.empty((prime, d))
    residue = np.ones(prime, dtype=np.int64)
    for q in range(d):
        residue = (residue * j) % prime
        pts[:, q] = np.cos(2.0 * np.pi * residue / prime)
    return pts


class TestWeilPoints:
    def test_figure_counts(self):
        assert weil_points(359, 2).count == 179
        assert weil_points(751, 2).count == 375

    def test_first_point_is_corner(self):
        assert np.array_equal(weil_points(7, 2).points[0], [1.0, 1.0])

    def test_explicit_cosine_values(self):
        pts = weil_points(7, 2).points
        assert pts[2, 0] == pytest.approx(math.cos(4 * math.pi / 7), abs=1e-15)
        assert pts[2, 1] == pytest.approx(math.cos(8 * math.pi / 7), abs=1e-15)

    def test_rejects_composite_and_tiny(self):
        with pytest.raises(ValueError, match="prime"):
            weil_points(9, 2)
        with pytest.raises(ValueError):
            weil_points(2, 2)

    def test_half_lattice_mirror_symmetry(self):
        # z_j = z_{p-j} componentwise; the discarded half duplicates the kept one
        for prime in [p for p in range(3, 200) if is_prime(p)]:
            for d in range(1, 5):
                lattice = full_weil_lattice(prime, d)
                assert np.allclose(lattice[1:], lattice[1:][::-1], atol=1e-12)
                kept = weil_points(prime, d).points
                assert np.allclose(lattice[: prime // 2], kept, atol=0)

    def test_marginal_distance_decreases_along_primes(self):
        for coordinate in (0, 1):
            distances = [
                empirical_marginal_distance(weil_points(p, 2), coordinate)
                for p in (101, 359, 751, 1511)
            ]
            for before, after in zip(distances, distances[1:]):
                assert after <= 1.2 * before

    def test_marginal_distance_at_751(self):
        assert empirical_marginal_distance(weil_points(751, 2), 0) < 0.05

    def test_smallest_prime_selection(self):
        assert smallest_weil_prime(179) == 359
        assert smallest_weil_prime(375) == 751
        assert smallest_weil_prime(74) == 149
        for M in (5, 37, 100):
            p = smallest_weil_prime(M)
            assert is_prime(p) and p // 2 >= M


class TestIidSampling:
    def test_same_seed_reproduces(self):
        a = sample_iid("uniform", 100, 3, 11)
        b = sample_iid("uniform", 100, 3, 11)
        assert np.array_equal(a.points, b.points)
        assert a.provenance == b.provenance

    def test_uniform_mean_clt_bound(self):
        mesh = sample_iid("uniform", 10**4, 1, 5)
        # 3 sigma / sqrt(M) with sigma^2 = 1/3
        assert abs(mesh.points.mean()) < 3 * math.sqrt(1.0 / 3.0) / 100.0

    def test_chebyshev_marginal_matches_arcsine(self):
        mesh = sample_iid("chebyshev", 10**5, 1, 2)
        assert empirical_marginal_distance(mesh, 0) < 0.01
        assert np.all(np.abs(mesh.points) <= 1.0)

    def test_gaussian_draws(self):
        mesh = sample_iid("gaussian", 10**4, 2, 3)
        assert abs(mesh.points.std() - 1.0) < 0.05

    def test_unknown_density(self):
        with pytest.raises(ValueError, match="unknown"):
            sample_iid("lognormal", 10, 1, 0)

    def test_derive_seed_is_xor(self):
        assert derive_seed(12, 5) == 12 ^ 5


class TestGaussSubsample:
    def test_degree_zero_single_node(self):
        mesh = subsampled_gauss_grid(0, 2, 1, 0)
        assert np.array_equal(mesh.points, [[0.0, 0.0]])

    def test_full_grid_is_whole_candidate_set(self):
        mesh = subsampled_gauss_grid(4, 4, 625, 9)
        assert mesh.count == 625
        assert len({tuple(p) for p in mesh.points}) == 625

    def test_points_lie_on_candidate_lattice(self):
        nodes, _ = gauss_rule(CHEBYSHEV, 10)
        mesh = subsampled_gauss_grid(9, 2, 30, 4)
        lattice = set(np.round(nodes, 12))
        for p in mesh.points:
            assert round(p[0], 12) in lattice and round(p[1], 12) in lattice

    def test_oversampling_rejected(self):
        with pytest.raises(ValueError, match="grid"):
            subsampled_gauss_grid(1, 2, 5, 0)

    def test_huge_grid_branch_distinct(self):
        mesh = subsampled_gauss_grid(4, 15, 97, 1)  # 5^15 candidates
        assert mesh.count == 97
        assert len({tuple(p) for p in mesh.points}) == 97


class TestMappedUniform:
    def test_map_fixes_origin_and_signs(self):
        L = 4.0
        xi = np.array([0.0, 0.5, -0.5])
        z = 0.5 * L * np.log((1 - xi) / (1 + xi))
        assert z[0] == 0.0 and z[1] < 0.0 < z[2]

    def test_median_near_zero(self):
        mesh = mapped_uniform(10**5, 3.0, 8)
        assert abs(np.median(mesh.points)) < 0.05 * 3.0

    def test_invalid_scale(self):
        with pytest.raises(ValueError, match="positive"):
            mapped_uniform(10, 0.0, 0)


class TestDiscreteLeja:
    def setup_method(self):
        self.candidates = NodalArray(1, np.linspace(-1, 1, 1000).reshape(-1, 1), {})
        self.basis = tensor_basis("chebyshev", total_degree_set(1, 40))

    def test_nested_selection(self):
        big = discrete_leja(self.candidates, self.basis, 20)
        small = discrete_leja(self.candidates, self.basis, 19)
        assert np.array_equal(big.points[:19], small.points)

    def test_selected_design_matrix_nonsingular(self):
        mesh = discrete_leja(self.candidates, self.basis, 15)
        square = self.basis.design_values(mesh.points)[:, :15]
        assert abs(np.linalg.det(square)) > 1e-6

    def test_first_pivot_breaks_tie_at_lowest_index(self):
        # column 0 is constant: every candidate ties, so row 0 wins
        mesh = discrete_leja(self.candidates, self.basis, 1)
        assert np.array_equal(mesh.points[0], self.candidates.points[0])

    def test_endpoint_clustering_toward_arcsine(self):
        mesh = discrete_leja(self.candidates, self.basis, 20)
        assert empirical_marginal_distance(mesh, 0) < 0.2

    def test_rank_deficiency_reported(self):
        dupes = NodalArray(1, np.zeros((5, 1)), {})
        with pytest.raises(ValueError, match="rank"):
            discrete_leja(dupes, self.basis, 3)


class TestKsDistance:
    def test_quantile_grid_distance(self):
        M = 200
        q = (np.arange(1, M + 1) - 0.5) / M
        mesh = NodalArray(1, np.sin(np.pi * (q - 0.5)).reshape(-1, 1), {})
        assert empirical_marginal_distance(mesh, 0) <= 1.0 / M

    def test_range_and_argument_checks(self):
        mesh = sample_iid("uniform", 50, 2, 0)
        d = empirical_marginal_distance(mesh, 1)
        assert 0.0 <= d <= 1.0
        with pytest.raises(ValueError, match="coordinate"):
            empirical_marginal_distance(mesh, 2)
        with pytest.raises(ValueError, match="target"):
            empirical_marginal_distance(mesh, 0, target="normal")

    def test_arcsine_cdf_endpoints(self):
        assert arcsine_cdf(-1.0) == 0.0
        assert arcsine_cdf(1.0) == 1.0


class TestSerialization:
    def test_csv_round_trip(self, tmp_path):
        mesh = sample_iid("chebyshev", 37, 3, 123)
        path = tmp_path / "mesh.csv"
        mesh.to_csv(path)
        back = NodalArray.from_csv(path)
        assert np.array_equal(back.points, mesh.points)
        assert back.provenance == mesh.provenance
        assert back.dimension == 3

    def test_json_round_trip(self):
        mesh = weil_points(13, 2)
        back = NodalArray.from_json(mesh.to_json())
        assert np.array_equal(back.points, mesh.points)
        assert back.provenance == mesh.provenance

    def test_points_read_only(self):
        mesh = sample_iid("uniform", 5, 1, 0)
        with pytest.raises(ValueError):
            mesh.points[0, 0] = 2.0
