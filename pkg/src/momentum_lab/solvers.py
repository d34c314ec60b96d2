"""Randomized (block) Kaczmarz and block coordinate descent with momentum.

Updates follow the projection form with unit step size: the pure RK step
projects onto the sampled equations, the pure CD step solves the sampled
principal block, and mini-batching averages ``m`` independently sampled
directions.  Momentum adds the two-step correction with weight ``omega``
interpolating heavy-ball (0) and Nesterov (1).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .linalg import sym_eig
from .process import MomentumConfig
from .schemes import BlockScheme, BlockSampler, bind_scheme
from .validation import as_matrix, as_vector, check_symmetric

__all__ = [
    "LinearProblem",
    "SolverRunResult",
    "BlockScheme",
    "rk_direction",
    "cd_direction",
    "minibatch_direction",
    "momentum_solve",
    "condition_number",
    "ConditionEstimate",
    "beta_schedule",
    "practical_beta",
]

KIND_LS = "consistent-ls"
KIND_PSD = "psd"

PINV_TOL = 1e-10


@dataclass
class LinearProblem:
    """A row-consistent least-squares system (A, y) or a psd system (K, y)."""

    kind: str
    matrix: np.ndarray
    rhs: np.ndarray
    w_star: np.ndarray | None = None
    name: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in (KIND_LS, KIND_PSD):
            raise ValueError(f"unknown problem kind {self.kind!r}")
        if self.kind == KIND_PSD:
            self.matrix = check_symmetric(self.matrix, name="K")
        else:
            self.matrix = as_matrix(self.matrix, "A")
        self.rhs = as_vector(self.rhs, "y")
        if self.rhs.size != self.matrix.shape[0]:
            raise ValueError("rhs length must match the number of rows")
        if self.w_star is not None:
            self.w_star = as_vector(self.w_star, "w_star")
            ynorm = np.linalg.norm(self.rhs)
            resid = np.linalg.norm(self.matrix @ self.w_star - self.rhs)
            if resid > 1e-10 * max(ynorm, 1e-300):
                raise ValueError(
                    f"supplied w_star is inconsistent: relative residual {resid / ynorm:.3e}"
                )

    @property
    def n_rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def dimension(self) -> int:
        return self.matrix.shape[1]

    def relative_residual(self, w: np.ndarray) -> float:
        ynorm = np.linalg.norm(self.rhs)
        r = np.linalg.norm(self.matrix @ w - self.rhs)
        return float(r / ynorm) if ynorm > 0 else float(r)


@dataclass
class SolverRunResult:
    """Outcome of one solver run.

    ``rows_sampled == iterations * m * k`` exactly.  The residual history is
    decimated: every iteration up to 1000, then every ceil(max_iters/1000)-th.
    """

    iterations: int
    rows_sampled: int
    residual_steps: np.ndarray
    residual_history: np.ndarray
    final_residual: float
    beta: float
    converged: bool
    diverged: bool = False
    wall_time_s: float = 0.0
    w: np.ndarray | None = None
    w_error_history: np.ndarray | None = None
    minibatch: int = 1
    block_size: int = 1


def _rk_directions(A: np.ndarray, y: np.ndarray, w: np.ndarray, blocks: np.ndarray,
                   tol: float = PINV_TOL) -> np.ndarray:
    """Stacked RK directions A_S^+ (A_S w - y_S) for blocks of shape (m, k)."""
    sub = A[blocks]                                     # (m, k, d)
    resid = sub @ w - y[blocks]                         # (m, k)
    return np.linalg.pinv(sub, rcond=tol) @ resid[..., None]


def _cd_block_solutions(K: np.ndarray, y: np.ndarray, w: np.ndarray, blocks: np.ndarray,
                        tol: float = PINV_TOL) -> np.ndarray:
    """Per-block solutions (K_{S,S})^+ (K w - y)_S for blocks of shape (m, k)."""
    flat = blocks.reshape(-1)
    resid = (K[flat] @ w - y[flat]).reshape(blocks.shape)          # (m, k)
    sub = K[blocks[:, :, None], blocks[:, None, :]]                # (m, k, k)
    return (np.linalg.pinv(sub, rcond=tol) @ resid[..., None])[..., 0]


def rk_direction(A, y, w, S, tol: float = PINV_TOL) -> np.ndarray:
    """Kaczmarz direction d = A_S^+ (A_S w - y_S); the step is w - d."""
    S = np.asarray(S, dtype=np.int64)
    return _rk_directions(np.asarray(A, float), np.asarray(y, float),
                          np.asarray(w, float), S[None])[0, :, 0]


def cd_direction(K, y, w, S, tol: float = PINV_TOL) -> np.ndarray:
    """Coordinate-descent direction supported on S: I_S^T (K_SS)^+ (Kw - y)_S."""
    S = np.asarray(S, dtype=np.int64)
    sols = _cd_block_solutions(np.asarray(K, float), np.asarray(y, float),
                               np.asarray(w, float), S[None], tol)
    d = np.zeros(len(w))
    d[S] = sols[0]
    return d


def minibatch_direction(problem: LinearProblem, scheme: BlockScheme, w, m: int,
                        rng: np.random.Generator,
                        sampler: BlockSampler | None = None) -> np.ndarray:
    """Average of m independent block directions, accumulated in index order."""
    if m < 1:
        raise ValueError("minibatch size must be >= 1")
    w = np.asarray(w, dtype=np.float64)
    if sampler is None:
        sampler = bind_scheme(problem.matrix, scheme)
    blocks = sampler.draw_many(m, rng)
    if problem.kind == KIND_LS:
        dirs = _rk_directions(problem.matrix, problem.rhs, w, blocks)[..., 0]
        return dirs.mean(axis=0)
    sols = _cd_block_solutions(problem.matrix, problem.rhs, w, blocks)
    d = np.zeros(problem.dimension)
    np.add.at(d, blocks.reshape(-1), sols.reshape(-1))
    return d / m


def _history_stride(max_iters: int) -> int:
    return max(1, math.ceil(max_iters / 1000))


def chain_step(problem: LinearProblem, scheme: BlockScheme, w: np.ndarray, c: np.ndarray,
               m: int, beta: float, rng: np.random.Generator, *, alpha: float = 1.0,
               omega: float = 1.0, sampler: BlockSampler | None = None
               ) -> tuple[np.ndarray, np.ndarray]:
    """One momentum step on the (iterate, momentum-cache) pair.

    The cache is c_t = w_{t-1} - omega * d_{t-1}; at omega = 1 it is exactly
    the auxiliary NAG sequence x_t, which is why the adaptive tuner and
    ``momentum_solve`` share this function (their trajectories must agree
    bitwise under a shared stream).
    """
    d = minibatch_direction(problem, scheme, w, m, rng, sampler=sampler)
    if beta == 0.0:
        return w - alpha * d, w
    c_new = w - omega * d
    return w - alpha * d + beta * (c_new - c), c_new


def momentum_solve(problem: LinearProblem, scheme: BlockScheme, config: MomentumConfig,
                   tolerance: float, max_iters: int, rng: np.random.Generator,
                   divergence_factor: float = 1e12) -> SolverRunResult:
    """Iterate the momentum update until the relative residual drops below tolerance.

    Non-convergence within ``max_iters`` is reported in the result, not
    raised; a run whose residual exceeds ``divergence_factor`` times the
    initial one is cut short and flagged as diverged.
    """
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    sampler = bind_scheme(problem.matrix, scheme)
    m, k = config.minibatch, scheme.k
    w = np.zeros(problem.dimension)
    # previous-iterate cache c = w_{t-1} - omega * d_{t-1}; the w_{-1} = w_0,
    # d_{-1} = 0 start makes the first step a plain (1 + beta*omega)-damped step
    c = w.copy()
    track_err = problem.w_star is not None
    wstar_norm = np.linalg.norm(problem.w_star) if track_err else 0.0

    stride = _history_stride(max_iters)
    steps, hist, err_hist = [], [], []
    started = time.perf_counter()
    res0 = problem.relative_residual(w)
    converged = diverged = False
    iterations = max_iters
    res = res0
    for t in range(max_iters + 1):
        res = problem.relative_residual(w)
        if t <= 1000 or t % stride == 0 or res <= tolerance or t == max_iters:
            steps.append(t)
            hist.append(res)
            if track_err:
                err_hist.append(float(np.linalg.norm(w - problem.w_star) / wstar_norm))
        if res <= tolerance:
            converged = True
            iterations = t
            break
        if res > divergence_factor * max(res0, 1e-300):
            diverged = True
            iterations = t
            break
        if t == max_iters:
            break
        w, c = chain_step(problem, scheme, w, c, m, config.beta, rng,
                          alpha=config.alpha, omega=config.omega, sampler=sampler)
    wall = time.perf_counter() - started
    return SolverRunResult(
        iterations=iterations,
        rows_sampled=iterations * m * k,
        residual_steps=np.asarray(steps, dtype=np.int64),
        residual_history=np.asarray(hist),
        final_residual=res,
        beta=config.beta,
        converged=converged,
        diverged=diverged,
        wall_time_s=wall,
        w=w,
        w_error_history=np.asarray(err_hist) if track_err else None,
        minibatch=m,
        block_size=k,
    )


class ConditionEstimate(NamedTuple):
    kappa: float
    estimated: bool


def condition_number(problem: LinearProblem, scheme: BlockScheme,
                     estimate_seed: int = 0, estimate_draws: int = 100_000) -> ConditionEstimate:
    """Stochastic condition number kappa = 1 / lambda_min^+ (average rate).

    Weighted single-index schemes use the closed forms ||A||_F^2 ||A^+||^2
    and tr(K) ||K^+||; uniform block schemes fall back to enumeration at
    small size or a flagged Monte Carlo estimate.
    """
    M = problem.matrix
    if scheme.scheme == "row-weighted":
        if problem.kind != KIND_LS:
            raise ValueError("row-weighted scheme applies to least-squares problems")
        sv = np.linalg.svd(M, compute_uv=False)
        smin = sv[sv > PINV_TOL * sv[0]].min()
        return ConditionEstimate(float(np.sum(sv * sv) / (smin * smin)), False)
    if scheme.scheme == "coord-weighted":
        if problem.kind != KIND_PSD:
            raise ValueError("coord-weighted scheme applies to psd problems")
        dec = sym_eig(M, psd=True)
        return ConditionEstimate(float(np.trace(M)) / dec.lambda_min_pos, False)
    # uniform blocks: through the sampler's average rate
    from .samplers import CoordinateDescentSampler, KaczmarzSampler

    if problem.kind == KIND_PSD:
        sampler = CoordinateDescentSampler(M, scheme, estimate_seed=estimate_seed,
                                           estimate_draws=estimate_draws)
    else:
        sampler = KaczmarzSampler(M, scheme, estimate_seed=estimate_seed,
                                  estimate_draws=estimate_draws)
    avg = sampler.average_rate()
    dec = sym_eig(avg, psd=True)
    return ConditionEstimate(1.0 / dec.lambda_min_pos, not sampler.average_rate_exact)


def beta_schedule(m: int, kappa: float, c1: float, c2: float) -> float:
    """Piecewise momentum schedule; boundary points take the middle branch."""
    if m < 1 or kappa < 1 or c1 <= 0 or c2 <= 0:
        raise ValueError("need m >= 1, kappa >= 1 and positive constants")
    saturation = c2 * math.sqrt(kappa)
    if m < c1:
        return 0.0
    if m <= saturation:
        return 1.0 - c1 / (2.0 * m)
    return 1.0 - c1 / (2.0 * saturation)


def practical_beta(m: int, kappa: float | None = None) -> float:
    """beta = 1 - 1/m, capped at 1 - 1/(3 sqrt(kappa)) when kappa is known."""
    if m < 1:
        raise ValueError("m must be >= 1")
    base = 1.0 - 1.0 / m
    if kappa is None:
        return base
    return min(base, 1.0 - 1.0 / (3.0 * math.sqrt(kappa)))
