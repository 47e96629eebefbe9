"""Sparse recovery of coefficient vectors by l1 minimization.

Solves basis pursuit (min ||c||_1 s.t. Ac = u) and its denoising relaxation
(||Ac - u||_2 <= eps) with a single mechanism: Newton root finding on the
Pareto curve tau -> min_{||c||_1 <= tau} ||Ac - u||_2, with each Lasso
subproblem solved by spectral projected gradient (Barzilai-Borwein steps,
nonmonotone line search).  Feasibility is always re-verified from A, c, u
after the solve; the result is flagged non-converged when the constraint
cannot be met.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .design import DesignMatrix, WeightVector
from .index_sets import IndexSet
from .mesh_gen import NodalArray, derive_seed
from .poly_basis import TensorBasis

#: Relative duality-gap stopping tolerance for the Lasso subproblems.
OPT_TOL = 1e-9
#: Equality constraint ||Ac - u|| <= FEAS_TOL * ||u|| declares basis pursuit solved.
FEAS_TOL = 1e-8
#: Combined cap on inner (projected-gradient) iterations per solve.
MAX_ITER = 10**4

_STEP_MIN, _STEP_MAX = 1e-16, 1e5


@dataclass(frozen=True)
class BPProblem:
    """Underdetermined collocation data for an l1 solve."""

    A: DesignMatrix
    u: np.ndarray
    epsilon: float = 0.0
    preconditioner: WeightVector | None = None

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float).reshape(-1)
        if u.size != self.A.shape[0]:
            raise ValueError(f"data length {u.size} != {self.A.shape[0]} rows")
        if self.epsilon < 0:
            raise ValueError("residual budget epsilon must be >= 0")
        if self.preconditioner is not None and len(self.preconditioner) != u.size:
            raise ValueError("preconditioner length does not match data")
        u.setflags(write=False)
        object.__setattr__(self, "u", u)


@dataclass(frozen=True)
class RecoveryResult:
    coefficients: np.ndarray
    residual: float
    l1_norm: float
    iterations: int
    converged: bool


def project_l1(v: np.ndarray, radius: float) -> np.ndarray:
    """Euclidean projection onto the l1 ball of the given radius."""
    if radius <= 0.0:
        return np.zeros_like(v)
    a = np.abs(v)
    if a.sum() <= radius:
        return v.copy()
    dec = np.sort(a)[::-1]
    cumulative = np.cumsum(dec)
    k = np.nonzero(dec * np.arange(1, a.size + 1) > cumulative - radius)[0][-1]
    shift = (cumulative[k] - radius) / (k + 1.0)
    return np.sign(v) * np.maximum(a - shift, 0.0)


def _search_curvy(A, u, tau, x, g, alpha, f_limit):
    """Backtrack along the projection arc x(a) = P(x - a g); None on failure."""
    for _ in range(30):
        x_new = project_l1(x - alpha * g, tau)
        d = x_new - x
        gtd = float(g @ d)
        if gtd >= 0.0:
            return None  # arc gives no descent at this scale
        r_new = u - A @ x_new
        f_new = 0.5 * float(r_new @ r_new)
        if f_new <= f_limit + 1e-4 * gtd:
            return x_new, r_new, f_new
        alpha *= 0.5
    return None


def _search_segment(A, u, tau, x, g, alpha, f_limit):
    """Backtrack along the fixed feasible direction P(x - a g) - x."""
    d = project_l1(x - alpha * g, tau) - x
    gtd = float(g @ d)
    if gtd >= 0.0:
        return None
    beta = 1.0
    for _ in range(30):
        x_new = x + beta * d
        r_new = u - A @ x_new
        f_new = 0.5 * float(r_new @ r_new)
        if f_new <= f_limit + 1e-4 * beta * gtd:
            return x_new, r_new, f_new
        beta *= 0.5
    return None


def _lasso_spg(A, u, tau, x, r, g, budget, rtarget):
    """Minimize 0.5||Ax - u||^2 over the l1 ball of radius tau.

    Spectral projected gradient: Barzilai-Borwein steps with a nonmonotone
    (10-value) line search, falling back to a feasible-direction search and
    step damping before giving up.  Warm-started at (x, r, g); returns
    (x, r, g, iterations, stationary) where `stationary` means no further
    descent was possible (duality gap met or machine-precision floor).
    """
    f = 0.5 * float(r @ r)
    history = [f] * 10
    dx = project_l1(x - g, tau) - x
    dxnorm = float(np.abs(dx).max()) if dx.size else 0.0
    step = _STEP_MAX if dxnorm < 1.0 / _STEP_MAX else min(_STEP_MAX, max(_STEP_MIN, 1.0 / dxnorm))
    step_max = _STEP_MAX
    iterations = 0
    stationary = False
    failures = 0
    while iterations < budget:
        rnorm = np.sqrt(2.0 * f)
        if rnorm <= rtarget:
            break
        gap = float(r @ (r - u)) + tau * float(np.abs(g).max())
        if abs(gap) <= OPT_TOL * max(1.0, f):
            stationary = True
            break
        f_limit = max(history)
        hit = _search_curvy(A, u, tau, x, g, step, f_limit)
        if hit is None:
            hit = _search_segment(A, u, tau, x, g, step, f_limit)
        iterations += 1
        if hit is None:
            failures += 1
            step_max /= 10.0
            step = min(step, step_max)
            if failures >= 3 or step_max < _STEP_MIN:
                stationary = True
                break
            continue
        failures = 0
        x_new, r_new, f_new = hit
        g_new = -(A.T @ r_new)
        s = x_new - x
        y = g_new - g
        sts, sty = float(s @ s), float(s @ y)
        step = step_max if sty <= 0.0 else min(step_max, max(_STEP_MIN, sts / sty))
        x, r, g, f = x_new, r_new, g_new, f_new
        history.pop(0)
        history.append(f)
    return x, r, g, iterations, stationary


def _lasso_active_set(A, u, tau, x0=None, state=None, max_steps=None):
    """Exact solve of min 0.5||Ax - u||^2 s.t. ||x||_1 <= tau by active-set
    KKT iteration, warm-started from the support of x0 or a (support, signs)
    state threaded from the previous Pareto point.

    On the support S with signs sigma the KKT system gives
    x_S = G^{-1}(A_S^T u - lam sigma) with lam chosen so sigma^T x_S = tau;
    columns enter at the largest off-support |a_j^T r| and leave on sign
    crossings.  Returns (x, r, lam, (support, signs)) at optimality or None
    when the iteration fails to settle (caller falls back to the
    projected-gradient point).
    """
    if tau <= 0.0:
        return None
    M = A.shape[0]
    if max_steps is None:
        max_steps = max(60, 3 * M)  # dense optimal supports need ~M entering steps
    if state is not None:
        support, signs = list(state[0]), list(state[1])
    else:
        xmax = float(np.abs(x0).max())
        if xmax == 0.0:
            return None
        order = np.argsort(-np.abs(x0))
        support = [int(j) for j in order[:M] if abs(x0[j]) > 1e-12 * xmax]
        signs = [float(np.sign(x0[j])) for j in support]
    if not support:
        return None
    scale = float(np.abs(A.T @ u).max())
    seen: set[frozenset] = set()
    for _ in range(max_steps):
        A_s = A[:, support]
        sigma_s = np.array(signs)
        G = A_s.T @ A_s
        try:
            Gi_h = np.linalg.solve(G, A_s.T @ u)
            Gi_s = np.linalg.solve(G, sigma_s)
        except np.linalg.LinAlgError:
            return None
        denom = float(sigma_s @ Gi_s)
        if denom <= 0.0 or not np.isfinite(denom):
            return None
        lam = max(0.0, (float(sigma_s @ Gi_h) - tau) / denom)
        xs = Gi_h - lam * Gi_s
        crossings = sigma_s * xs
        worst = int(np.argmin(crossings))
        if crossings[worst] <= 0.0:
            if len(support) == 1:
                return None
            support.pop(worst)
            signs.pop(worst)
            continue
        r = u - A_s @ xs
        v = A.T @ r
        v[support] = 0.0
        enter = int(np.argmax(np.abs(v)))
        if np.abs(v[enter]) <= lam * (1.0 + 1e-9) + 1e-12 * scale:
            x = np.zeros(A.shape[1])
            x[support] = xs
            return x, r, lam, (support, signs)
        if len(support) >= M:
            # full support needs an exchange: drop the weakest coefficient
            weakest = int(np.argmin(np.abs(xs)))
            support.pop(weakest)
            signs.pop(weakest)
        support.append(enter)
        signs.append(float(np.sign(v[enter])))
        key = frozenset(zip(support, signs))
        if key in seen:
            return None  # cycling; let the caller fall back
        seen.add(key)
    return None


def _pareto_root_solve(A, u, sigma, max_iter=MAX_ITER):
    """Newton iteration on the Pareto curve driving ||Ac - u|| down to sigma.

    The data is normalized to ||u|| = 1 internally, which makes the solve
    exactly scale-equivariant and keeps every tolerance meaningful.
    """
    A = np.asarray(A, dtype=float)
    u_orig = np.asarray(u, dtype=float).reshape(-1)
    n_cols = A.shape[1]
    unorm_orig = float(np.linalg.norm(u_orig))
    if unorm_orig <= max(sigma, 0.0) or unorm_orig == 0.0:
        return RecoveryResult(np.zeros(n_cols), unorm_orig, 0.0, 0, True)
    u = u_orig / unorm_orig
    sigma = sigma / unorm_orig
    unorm = 1.0
    target = max(sigma, FEAS_TOL * unorm)
    stop_slack = 1e-9 * sigma + 1e-12 * unorm

    x = np.zeros(n_cols)
    r = u.copy()
    g = -(A.T @ r)
    tau = 0.0
    used = 0
    state = None  # exact (support, signs) once refinement succeeds
    for _ in range(200):
        refined = None
        if state is not None:
            refined = _lasso_active_set(A, u, tau, state=state)
            used += 1
        if refined is None:
            if state is not None:
                state = None
                g = -(A.T @ r)  # rebuild gradient after leaving the exact path
            budget = min(max_iter - used, 2000)  # let root updates and refinement cut in
            x, r, g, spent, stationary = _lasso_spg(A, u, tau, x, r, g, budget, target)
            used += spent
            rnorm = float(np.linalg.norm(r))
            if target + stop_slack < rnorm <= 0.5 * unorm:
                refined = _lasso_active_set(A, u, tau, x0=x)
                used += 1
        if refined is not None:
            x, r, lam, state = refined
            rnorm = float(np.linalg.norm(r))
            gnorm = lam
            g = None  # not needed while the exact path is tracked
            stationary = True
        else:
            rnorm = float(np.linalg.norm(r))
            gnorm = float(np.abs(g).max())  # = ||A^T r||_inf
        if rnorm <= target + stop_slack:
            break
        if gnorm <= 1e-12 * max(1.0, rnorm) or used >= max_iter:
            break  # least-squares floor reached or budget exhausted
        tau_new = tau + rnorm * (rnorm - sigma) / gnorm
        if not np.isfinite(tau_new) or tau_new <= tau * (1.0 + 1e-14):
            if stationary:
                break
            tau_new = tau * (1.0 + 1e-10) + 1e-14
        tau = tau_new

    x = unorm_orig * x
    rnorm = float(np.linalg.norm(u_orig - A @ x))  # re-verified, never trusted
    sigma_orig = sigma * unorm_orig
    converged = rnorm <= (sigma_orig * (1.0 + 1e-6) if sigma_orig > 0 else FEAS_TOL * unorm_orig)
    return RecoveryResult(x, rnorm, float(np.abs(x).sum()), used, converged)


def solve_bp(problem: BPProblem) -> RecoveryResult:
    """Basis pursuit: min ||c||_1 subject to Ac = u."""
    if problem.epsilon != 0.0:
        raise ValueError("basis pursuit requires epsilon = 0; use solve_bpdn")
    return _pareto_root_solve(problem.A.values, problem.u, 0.0)


def solve_bpdn(problem: BPProblem) -> RecoveryResult:
    """Basis pursuit denoising: min ||c||_1 subject to ||Ac - u||_2 <= epsilon."""
    if problem.epsilon <= 0.0:
        raise ValueError("denoising form requires epsilon > 0; use solve_bp")
    return _pareto_root_solve(problem.A.values, problem.u, problem.epsilon)


def solve_preconditioned(problem: BPProblem) -> RecoveryResult:
    """l1 solve on the row-scaled system W A c = W u.

    Coefficients come back in the original coordinates; the residual and the
    epsilon budget refer to the scaled system that was actually solved.
    """
    if problem.preconditioner is None:
        raise ValueError("problem carries no preconditioner")
    w = problem.preconditioner.values
    return _pareto_root_solve(w[:, None] * problem.A.values, w * problem.u, problem.epsilon)


def ric_bruteforce(A: DesignMatrix, s: int) -> float:
    """Exact restricted isometry constant delta_s by support enumeration.

    Interlacing makes size-s supports dominate smaller ones, so only those
    are enumerated.  Diagnostic tool: refuses more than 30 columns.
    """
    values = A.values if isinstance(A, DesignMatrix) else np.asarray(A, dtype=float)
    n_cols = values.shape[1]
    if n_cols > 30:
        raise ValueError(f"{n_cols} columns is too many for brute-force RIC (max 30)")
    if not 1 <= s <= n_cols:
        raise ValueError(f"sparsity {s} out of range [1, {n_cols}]")
    gram_full = values.T @ values
    delta = 0.0
    for support in itertools.combinations(range(n_cols), s):
        eigs = np.linalg.eigvalsh(gram_full[np.ix_(support, support)])
        delta = max(delta, float(eigs[-1] - 1.0), float(1.0 - eigs[0]))
    return delta


def plant_sparse_vector(n: int, s: int, rng: np.random.Generator) -> np.ndarray:
    """s-sparse vector: support uniform without replacement, values standard normal."""
    c = np.zeros(n)
    if s > 0:
        support = rng.choice(n, size=s, replace=False)
        c[support] = rng.standard_normal(s)
    return c


def recovery_study(
    space: IndexSet,
    basis: TensorBasis,
    make_mesh,
    M: int,
    s_range,
    trials: int,
    seed: int,
    precondition=None,
    success_tol: float = 1e-4,
    threads: int = 1,
):
    """Planted-vector recovery rates per sparsity level.

    ``make_mesh(trial_seed)`` supplies the mesh for each trial (a
    deterministic sampler may ignore the seed).  ``precondition``, when
    given, maps a mesh to a WeightVector applied as an l1 preconditioner.
    Success means ||c_planted - c#||_inf <= success_tol.  Trials run
    concurrently on `threads` workers; per-trial seeds make the aggregate
    independent of scheduling.  Returns a list of rows
    (s, trials, successes, rate, mean_iterations).
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    n_cols = len(space)

    def one_trial(s: int, trial: int) -> tuple[bool, int]:
        trial_seed = derive_seed(seed, trial)
        mesh = make_mesh(trial_seed)
        if mesh.count != M:
            raise ValueError(f"sampler produced {mesh.count} points, expected {M}")
        coef_rng = np.random.default_rng([trial_seed, 1])
        planted = plant_sparse_vector(n_cols, s, coef_rng)
        A = DesignMatrix(basis.design_values(mesh.points), mesh, basis)
        u = A.values @ planted
        problem = BPProblem(A, u, 0.0, precondition(mesh) if precondition else None)
        result = solve_preconditioned(problem) if precondition else solve_bp(problem)
        success = bool(np.abs(result.coefficients - planted).max() <= success_tol)
        return success, result.iterations

    rows = []
    for s in s_range:
        if not 0 <= s <= n_cols:
            raise ValueError(f"sparsity {s} out of range [0, {n_cols}]")
        if threads > 1 and trials > 1:
            from concurrent.futures import ThreadPoolExecutor

            with ThreadPoolExecutor(max_workers=threads) as pool:
                futures = [pool.submit(one_trial, int(s), t) for t in range(trials)]
                outcomes = [f.result() for f in futures]
        else:
            outcomes = [one_trial(int(s), t) for t in range(trials)]
        successes = sum(1 for ok, _ in outcomes if ok)
        total_iters = sum(iters for _, iters in outcomes)
        rows.append((int(s), int(trials), int(successes), successes / trials,
                     total_iters / trials))
    return rows
