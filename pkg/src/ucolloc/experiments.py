"""Seeded, parallel experiment drivers: sampling-stability (condition
numbers), surrogate convergence, sparse-recovery rates, and the prime-lattice
distribution study.

Per-trial seeds derive from the master seed XOR the trial index, so results
are independent of execution order and worker count; rows are emitted in a
fixed iteration order.  Thread counts and wall time never enter the CSV.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .design import assemble, condition_number, cs_preconditioner, ls_weights
from .index_sets import (IndexSet, hyperbolic_cross_set, tensor_set, total_degree_set)
from .least_squares import solve_ls, solve_weighted_ls, sup_error
from .mesh_gen import (NodalArray, derive_seed, empirical_marginal_distance, is_prime,
                       sample_iid, smallest_weil_prime, subsampled_gauss_grid, weil_points)
from .poly_basis import tensor_basis
from .records import ExperimentRecord, Stopwatch
from .sparse_recovery import recovery_study

THREADS_ENV_VAR = "UCOLLOC_THREADS"


def resolve_threads(explicit: int | None = None, config_value: int | None = None) -> int:
    """Thread count precedence: CLI flag, then environment, then config, then 1."""
    if explicit:
        return max(1, int(explicit))
    env = os.environ.get(THREADS_ENV_VAR)
    if env:
        return max(1, int(env))
    if config_value:
        return max(1, int(config_value))
    return 1


def _map_trials(fn: Callable[[int], object], n: int, threads: int) -> list:
    """fn over trial indices 0..n-1; results returned in index order."""
    if threads <= 1 or n <= 1:
        return [fn(t) for t in range(n)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(fn, t) for t in range(n)]
        return [f.result() for f in futures]


@dataclass(frozen=True)
class ScalingRule:
    """Sample-count rule M(N); evaluations are ceiled and at least 1."""

    tag: str
    evaluate: Callable[[int], float]

    def __call__(self, n: int) -> int:
        return max(1, math.ceil(self.evaluate(n)))


SCALING_RULES = {
    "linear_2": ScalingRule("linear_2", lambda n: 2.0 * n),
    "linear_2p5": ScalingRule("linear_2p5", lambda n: 2.5 * n),
    "loglinear_1p5": ScalingRule("loglinear_1p5", lambda n: 1.5 * n * math.log(n)),
    "logcubed_0p3": ScalingRule("logcubed_0p3", lambda n: 0.3 * n * math.log(n) ** 3),
}


def get_scaling_rule(tag) -> ScalingRule:
    if isinstance(tag, ScalingRule):
        return tag
    try:
        return SCALING_RULES[tag]
    except KeyError:
        raise ValueError(f"unknown scaling rule {tag!r}; choose from {sorted(SCALING_RULES)}") from None


_SPACES = {
    "hyperbolic_cross": hyperbolic_cross_set,
    "total_degree": total_degree_set,
    "tensor": tensor_set,
}


def build_mesh(sampler: str, M: int, d: int, seed: int,
               grid_degree: int | None = None) -> NodalArray:
    """Mesh for one of the named samplers; Weil ignores the seed and returns
    floor(p/2) points for the smallest prime p >= 2M + 1."""
    if sampler == "mc_chebyshev":
        return sample_iid("chebyshev", M, d, seed)
    if sampler == "mc_uniform":
        return sample_iid("uniform", M, d, seed)
    if sampler == "gauss_subsample":
        if grid_degree is None:
            raise ValueError("gauss_subsample needs a candidate grid degree")
        return subsampled_gauss_grid(grid_degree, d, M, seed)
    if sampler == "weil":
        return weil_points(smallest_weil_prime(M), d)
    raise ValueError(f"unknown sampler {sampler!r}")


def _gauss_grid_degree(k: int, M: int, d: int) -> int:
    """Smallest candidate degree covering the space degree and M points."""
    return max(k, math.ceil(M ** (1.0 / d)) - 1)


CONDITION_DEFAULTS = {
    "dimension": 4,
    "space": "hyperbolic_cross",
    "degrees": [2, 3, 4, 5, 6, 7, 8],
    "rules": ["linear_2p5", "loglinear_1p5", "logcubed_0p3"],
    "samplers": ["mc_chebyshev", "weil", "gauss_subsample"],
    "trials": 200,
    "seed": 0,
}


def run_condition_study(config: dict | None = None, threads: int = 1) -> ExperimentRecord:
    """Gram condition numbers per (rule, sampler, degree), mean and
    one-standard-deviation dispersion over seeded trials."""
    cfg = {**CONDITION_DEFAULTS, **(config or {})}
    d = int(cfg["dimension"])
    seed = int(cfg["seed"])
    trials = int(cfg["trials"])
    make_space = _SPACES[cfg["space"]]
    record = ExperimentRecord(
        "condition", cfg,
        ("rule", "sampler", "k", "N", "M", "prime", "trials", "mean_cond", "std_cond", "flag"),
    )
    with Stopwatch() as clock:
        for rule_tag in cfg["rules"]:
            rule = get_scaling_rule(rule_tag)
            for sampler in cfg["samplers"]:
                for k in cfg["degrees"]:
                    space = make_space(d, int(k))
                    basis = tensor_basis("chebyshev", space)
                    n_cols = len(space)
                    m_rule = rule(n_cols)
                    m_req, flag = m_rule, ""
                    if m_req <= n_cols:
                        m_req, flag = n_cols + 1, "clamped"
                    if sampler == "gauss_subsample" and m_req > (int(k) + 1) ** d:
                        record.add_row(rule.tag, sampler, int(k), n_cols, m_req, 0, 0,
                                       float("nan"), float("nan"), "infeasible_candidate_grid")
                        continue
                    prime = smallest_weil_prime(m_req) if sampler == "weil" else 0
                    n_trials = 1 if sampler == "weil" else trials

                    def one_trial(t, sampler=sampler, m_req=m_req, k=k, basis=basis):
                        mesh = build_mesh(sampler, m_req, d, derive_seed(seed, t),
                                          grid_degree=int(k))
                        return condition_number(assemble(mesh, basis))

                    conds = _map_trials(one_trial, n_trials, threads)
                    mean = float(np.mean(conds))
                    std = float(np.std(conds, ddof=1)) if n_trials > 1 else 0.0
                    m_used = weil_points(prime, d).count if sampler == "weil" else m_req
                    record.add_row(rule.tag, sampler, int(k), n_cols, m_used, prime,
                                   n_trials, mean, std, flag)
    record.wall_time = clock.elapsed
    return record


CONVERGENCE_DEFAULTS = {
    "dimension": 2,
    "degrees": [2, 4, 6, 8, 10, 12, 14, 16, 18, 20, 22, 24],
    "samplers": ["mc_chebyshev", "weil", "gauss_subsample"],
    "variants": ["chebyshev", "legendre_preconditioned"],
    "rule": "linear_2",
    "test_points": 2000,
    "seed": 0,
}


def exp_sum_target(coefficients: np.ndarray):
    """Smooth test response exp(-sum_i a_i z_i)."""
    a = np.asarray(coefficients, dtype=float)

    def target(points: np.ndarray) -> np.ndarray:
        return np.exp(-np.atleast_2d(points) @ a)

    return target


def run_convergence_study(config: dict | None = None, threads: int = 1) -> ExperimentRecord:
    """Sup-norm surrogate error versus degree for the smooth exponential
    target, with the linear sampling rule M = 2N."""
    cfg = {**CONVERGENCE_DEFAULTS, **(config or {})}
    d = int(cfg["dimension"])
    seed = int(cfg["seed"])
    rule = get_scaling_rule(cfg["rule"])
    rng = np.random.default_rng(seed)
    a = rng.uniform(-1.0, 1.0, size=d)
    cfg = {**cfg, "target_coefficients": [float(v) for v in a]}
    target = exp_sum_target(a)
    test_rng = np.random.default_rng([seed, 982451653])
    test_mesh = NodalArray(d, test_rng.uniform(-1.0, 1.0, size=(int(cfg["test_points"]), d)),
                           {"sampler": "iid", "density": "uniform", "role": "test"})
    record = ExperimentRecord(
        "convergence", cfg,
        ("variant", "sampler", "k", "N", "M", "prime", "mesh_seed", "sup_error"),
    )

    def one_row(args):
        variant, sampler, k = args
        space = total_degree_set(d, k)
        n_cols = len(space)
        m_req = max(rule(n_cols), n_cols + 1)
        mesh_seed = derive_seed(seed, k)
        prime = smallest_weil_prime(m_req) if sampler == "weil" else 0
        mesh = build_mesh(sampler, m_req, d, mesh_seed,
                          grid_degree=_gauss_grid_degree(k, m_req, d))
        u = target(mesh.points)
        if variant == "chebyshev":
            surrogate, _ = solve_ls(assemble(mesh, tensor_basis("chebyshev", space)), u)
        elif variant == "legendre_preconditioned":
            A = assemble(mesh, tensor_basis("legendre", space))
            surrogate, _ = solve_weighted_ls(A, u, ls_weights(mesh, "uniform"))
        else:
            raise ValueError(f"unknown variant {variant!r}")
        err = sup_error(surrogate, target, test_mesh)
        return variant, sampler, int(k), n_cols, mesh.count, prime, mesh_seed, err

    jobs = [(variant, sampler, int(k))
            for variant in cfg["variants"]
            for sampler in cfg["samplers"]
            for k in cfg["degrees"]]
    with Stopwatch() as clock:
        rows = _map_trials(lambda t: one_row(jobs[t]), len(jobs), threads)
    for row in rows:
        record.add_row(*row)
    record.wall_time = clock.elapsed
    return record


#: (dimension, degree, M, basis, [(sampler, preconditioned), ...])
RECOVERY_PRESETS = {
    "cheb_d2": (2, 20, 74, "chebyshev",
                [("mc_chebyshev", False), ("weil", False), ("gauss_subsample", False)]),
    "leg_d2": (2, 35, 66, "legendre",
               [("mc_chebyshev", True), ("weil", True), ("gauss_subsample", True),
                ("mc_uniform", False)]),
    "cheb_d15": (15, 4, 81, "chebyshev",
                 [("mc_chebyshev", False), ("weil", False), ("gauss_subsample", False)]),
    "leg_d15": (15, 4, 97, "legendre",
                [("mc_uniform", False), ("mc_chebyshev", True), ("weil", True),
                 ("gauss_subsample", True)]),
}

RECOVERY_DEFAULT_SPARSITIES = {
    "cheb_d2": [2, 5, 10, 15, 20, 25, 30, 40],
    "leg_d2": [2, 5, 10, 15, 20, 25],
    "cheb_d15": [2, 4, 6, 8, 10],
    "leg_d15": [2, 4, 6, 8, 10],
}

RECOVERY_DEFAULTS = {"preset": "cheb_d2", "trials": 100, "seed": 0, "success_tol": 1e-4}


def run_recovery_study(config: dict | None = None, threads: int = 1) -> ExperimentRecord:
    """Planted-coefficient recovery rates per (variant, sparsity) for one of
    the four presets."""
    cfg = {**RECOVERY_DEFAULTS, **(config or {})}
    preset = cfg["preset"]
    if preset not in RECOVERY_PRESETS:
        raise ValueError(f"unknown preset {preset!r}; choose from {sorted(RECOVERY_PRESETS)}")
    d, k, m_target, basis_name, variants = RECOVERY_PRESETS[preset]
    sparsities = [int(s) for s in cfg.get("sparsities", RECOVERY_DEFAULT_SPARSITIES[preset])]
    trials = int(cfg["trials"])
    seed = int(cfg["seed"])
    cfg = {**cfg, "sparsities": sparsities, "dimension": d, "degree": k, "M_target": m_target,
           "basis": basis_name}
    space = total_degree_set(d, k)
    basis = tensor_basis(basis_name, space)
    record = ExperimentRecord(
        "recovery", cfg,
        ("variant", "s", "trials", "successes", "rate", "mean_iterations", "M", "prime"),
    )
    with Stopwatch() as clock:
        for sampler, preconditioned in variants:
            prime = smallest_weil_prime(m_target) if sampler == "weil" else 0
            if sampler == "weil":
                weil_mesh = weil_points(prime, d)
                m_used = weil_mesh.count
                make_mesh = lambda trial_seed, mesh=weil_mesh: mesh
            else:
                m_used = m_target
                make_mesh = lambda trial_seed, s=sampler: build_mesh(
                    s, m_target, d, trial_seed, grid_degree=k)
            precondition = cs_preconditioner if preconditioned else None
            label = sampler + ("_precond" if preconditioned else "")
            rows = recovery_study(space, basis, make_mesh, m_used, sparsities, trials,
                                  seed, precondition=precondition,
                                  success_tol=float(cfg["success_tol"]), threads=threads)
            for s, n_trials, successes, rate, mean_iters in rows:
                record.add_row(label, s, n_trials, successes, rate, mean_iters, m_used, prime)
    record.wall_time = clock.elapsed
    return record


WEIL_DEFAULTS = {"primes": [101, 359, 751, 1511], "dimension": 2}


def run_weil_study(config: dict | None = None, threads: int = 1) -> ExperimentRecord:
    """Per-prime point counts, marginal KS distances to the arcsine law, and
    the half-lattice mirror-symmetry check."""
    cfg = {**WEIL_DEFAULTS, **(config or {})}
    d = int(cfg["dimension"])
    primes = [int(p) for p in cfg["primes"]]
    for p in primes:
        if not is_prime(p):
            raise ValueError(f"{p} is not prime")
    record = ExperimentRecord(
        "weil", cfg, ("prime", "count", "coordinate", "ks_distance", "symmetry_ok"),
    )

    def one_prime(idx: int):
        p = primes[idx]
        mesh = weil_points(p, d)
        j = np.arange(p, dtype=np.int64)
        residue = np.ones(p, dtype=np.int64)
        symmetric = True
        for _ in range(d):
            residue = (residue * j) % p
            coords = np.cos(2.0 * np.pi * residue / p)
            if not np.allclose(coords[1:], coords[1:][::-1], rtol=0.0, atol=1e-12):
                symmetric = False
        distances = [empirical_marginal_distance(mesh, c) for c in range(d)]
        return p, mesh.count, distances, symmetric

    with Stopwatch() as clock:
        results = _map_trials(one_prime, len(primes), threads)
    for p, count, distances, symmetric in results:
        for coordinate, dist in enumerate(distances):
            record.add_row(p, count, coordinate, dist, symmetric)
    record.wall_time = clock.elapsed
    return record
