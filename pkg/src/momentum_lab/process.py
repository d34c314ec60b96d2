"""Stochastic contraction and momentum processes.

The error vector of every solver in this library evolves as
``Delta_{t+1} = Delta_t - alpha * Pi_t Delta_t`` plus, with momentum, a
two-step correction ``beta * [(Delta_t - omega d_t) - (Delta_{t-1} - omega
d_{t-1})]`` where ``d_t = Pi_t Delta_t`` reuses the single fresh draw of the
step.  These drivers run the abstract process directly on a sampler, which
is what the Monte Carlo verifications of the convergence theory consume.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .rng import substream
from .samplers import RateSampler, minibatch_draw
from .validation import as_vector

__all__ = [
    "MomentumConfig",
    "ProcessState",
    "TrajectoryStats",
    "contraction_step",
    "momentum_step",
    "run_process",
    "monte_carlo_moments",
]

THREADS_ENV = "MOMENTUM_LAB_THREADS"


def worker_count(requested: int | None = None) -> int:
    """Worker cap: explicit argument, else MOMENTUM_LAB_THREADS, else all cores."""
    if requested is not None:
        return max(1, requested)
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass(frozen=True)
class MomentumConfig:
    """Step size, momentum, momentum-gradient weight and mini-batch size.

    ``omega = 0`` is heavy-ball, ``omega = alpha`` is Nesterov.
    """

    alpha: float = 1.0
    beta: float = 0.0
    omega: float = 0.0
    minibatch: int = 1

    def __post_init__(self):
        if not (0.0 <= self.omega <= self.alpha <= 1.0):
            raise ValueError(f"need 0 <= omega <= alpha <= 1, got omega={self.omega}, alpha={self.alpha}")
        if self.beta < 0:
            raise ValueError("beta must be >= 0")
        if self.minibatch < 1:
            raise ValueError("minibatch must be >= 1")


@dataclass
class ProcessState:
    """Two-step window of the process: Delta_t, Delta_{t-1} and the cached
    previous direction Pi_{t-1} Delta_{t-1} needed by the omega term."""

    current: np.ndarray
    previous: np.ndarray
    previous_direction: np.ndarray
    step: int = 0

    @classmethod
    def initial(cls, delta0) -> "ProcessState":
        d0 = as_vector(delta0, "delta0")
        zero = np.zeros_like(d0)
        # Delta_{-1} = 0 convention, hence zero cached direction as well
        return cls(current=d0, previous=zero, previous_direction=zero.copy(), step=0)


@dataclass
class TrajectoryStats:
    """Per-step squared norms; mean and standard error when Monte Carlo."""

    mean: np.ndarray
    stderr: np.ndarray | None = None
    trials: int = 1
    master_seed: int | None = None
    meta: dict = field(default_factory=dict)


def contraction_step(state: ProcessState, sampler: RateSampler, alpha: float,
                     rng: np.random.Generator) -> ProcessState:
    """One step Delta' = Delta - alpha * Pi Delta with a fresh draw."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must be in [0, 1]")
    d = sampler.draw(rng).apply(state.current)
    new = state.current - alpha * d
    return ProcessState(new, state.current, d, state.step + 1)


def momentum_step(state: ProcessState, sampler: RateSampler, config: MomentumConfig,
                  rng: np.random.Generator) -> ProcessState:
    """One momentum step; the single mini-batch draw feeds both terms."""
    d = minibatch_draw(sampler, config.minibatch, rng).apply(state.current)
    if config.beta == 0.0:
        # same expression tree as contraction_step, bitwise-identical at beta=0
        new = state.current - config.alpha * d
    else:
        correction = (state.current - config.omega * d) - (
            state.previous - config.omega * state.previous_direction
        )
        new = state.current - config.alpha * d + config.beta * correction
    return ProcessState(new, state.current, d, state.step + 1)


def check_in_range(sampler: RateSampler, delta0: np.ndarray, tol: float = 1e-8) -> float:
    """Relative residual of delta0 against the range of the average rate."""
    nrm = np.linalg.norm(delta0)
    if nrm == 0:
        return 0.0
    Vr = sampler.average_decomposition().range_basis()
    resid = delta0 - Vr @ (Vr.T @ delta0)
    rel = float(np.linalg.norm(resid) / nrm)
    if rel > tol:
        raise ValueError(
            f"delta0 lies outside range(average rate): projection residual {rel:.3e} > {tol:.1e}; "
            "the convergence theory only covers the range component"
        )
    return rel


def run_process(sampler: RateSampler, config: MomentumConfig, delta0, horizon: int,
                rng: np.random.Generator) -> TrajectoryStats:
    """Run one trajectory and record ||Delta_t||^2 for t = 0..horizon."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    state = ProcessState.initial(delta0)
    check_in_range(sampler, state.current)
    sq = np.empty(horizon + 1)
    sq[0] = float(state.current @ state.current)
    for t in range(1, horizon + 1):
        state = momentum_step(state, sampler, config, rng)
        sq[t] = float(state.current @ state.current)
    return TrajectoryStats(mean=sq, stderr=None, trials=1)


def monte_carlo_moments(sampler: RateSampler, config: MomentumConfig, delta0,
                        horizon: int, trials: int, master_seed: int,
                        threads: int | None = None) -> TrajectoryStats:
    """Empirical mean and standard error of ||Delta_t||^2 over independent runs.

    Trial ``i`` consumes the stream derived from ``(master_seed, i)``, so the
    result does not depend on scheduling order or worker count.
    """
    if trials < 1:
        raise ValueError("need at least 1 trial")
    delta0 = as_vector(delta0, "delta0")
    check_in_range(sampler, delta0)
    out = np.empty((trials, horizon + 1))

    def one(i: int):
        out[i] = run_process(sampler, config, delta0, horizon, substream(master_seed, i)).mean

    workers = min(worker_count(threads), trials)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(one, range(trials)))
    else:
        for i in range(trials):
            one(i)
    mean = out.mean(axis=0)
    if trials == 1:
        stderr = None
    else:
        stderr = out.std(axis=0, ddof=1) / np.sqrt(trials)
    return TrajectoryStats(mean=mean, stderr=stderr, trials=trials, master_seed=master_seed)
