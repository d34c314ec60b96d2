"""Scikit-learn style estimator fronts for the randomized solvers.

These wrap the functional solvers behind ``fit`` / ``get_params`` so they
compose with pipelines, grid search and cloning.  The fitted solution lands
in ``coef_`` with the run diagnostics in ``result_``.
"""

from __future__ import annotations

import numbers

import numpy as np
from sklearn.base import BaseEstimator

from .adaptive import AdaptiveConfig, adaptive_solve
from .process import MomentumConfig
from .rng import substream
from .schemes import BlockScheme
from .solvers import KIND_LS, KIND_PSD, LinearProblem, momentum_solve, practical_beta

__all__ = ["MomentumCoordinateDescent", "MomentumKaczmarz", "AdaptiveMomentumCD"]


def _resolve_beta(beta, minibatch) -> float:
    if beta == "practical":
        return practical_beta(minibatch)
    if isinstance(beta, numbers.Real):
        return float(beta)
    raise ValueError(f"beta must be 'practical' or a number, got {beta!r}")


class _MomentumSolverBase(BaseEstimator):
    _kind = KIND_PSD

    def __init__(self, block_size=16, minibatch=1, beta="practical", omega=1.0,
                 scheme="uniform", tol=1e-7, max_iter=100_000, random_state=0):
        self.block_size = block_size
        self.minibatch = minibatch
        self.beta = beta
        self.omega = omega
        self.scheme = scheme
        self.tol = tol
        self.max_iter = max_iter
        self.random_state = random_state

    def _scheme(self) -> BlockScheme:
        if self.scheme == "uniform":
            return BlockScheme("uniform", self.block_size)
        return BlockScheme(self.scheme, 1)

    def fit(self, X, y):
        problem = LinearProblem(kind=self._kind, matrix=np.asarray(X, float),
                                rhs=np.asarray(y, float))
        beta = _resolve_beta(self.beta, self.minibatch)
        config = MomentumConfig(alpha=1.0, beta=beta, omega=self.omega,
                                minibatch=self.minibatch)
        result = momentum_solve(problem, self._scheme(), config, self.tol,
                                self.max_iter, substream(self.random_state, 0))
        self.coef_ = result.w
        self.n_iter_ = result.iterations
        self.converged_ = result.converged
        self.result_ = result
        return self


class MomentumCoordinateDescent(_MomentumSolverBase):
    """Block coordinate descent with momentum for psd systems K w = y."""

    _kind = KIND_PSD


class MomentumKaczmarz(_MomentumSolverBase):
    """Randomized block Kaczmarz with momentum for consistent systems A w = y."""

    _kind = KIND_LS

    def __init__(self, block_size=16, minibatch=1, beta="practical", omega=1.0,
                 scheme="uniform", tol=1e-7, max_iter=100_000, random_state=0):
        super().__init__(block_size=block_size, minibatch=minibatch, beta=beta,
                         omega=omega, scheme=scheme, tol=tol, max_iter=max_iter,
                         random_state=random_state)

    def _scheme(self) -> BlockScheme:
        if self.scheme == "uniform":
            return BlockScheme("uniform", self.block_size)
        return BlockScheme("row-weighted", 1)


class AdaptiveMomentumCD(BaseEstimator):
    """Coordinate descent with run-time bracketed momentum tuning."""

    def __init__(self, block_size=16, minibatch=8, warmup=50, check_interval=10,
                 probe_rows=100, tol=1e-7, max_iter=100_000, random_state=0):
        self.block_size = block_size
        self.minibatch = minibatch
        self.warmup = warmup
        self.check_interval = check_interval
        self.probe_rows = probe_rows
        self.tol = tol
        self.max_iter = max_iter
        self.random_state = random_state

    def fit(self, X, y):
        problem = LinearProblem(kind=KIND_PSD, matrix=np.asarray(X, float),
                                rhs=np.asarray(y, float))
        config = AdaptiveConfig(minibatch=self.minibatch, max_iters=self.max_iter,
                                warmup=self.warmup, check_interval=self.check_interval,
                                probe_rows=self.probe_rows)
        result = adaptive_solve(problem, BlockScheme("uniform", self.block_size),
                                config, self.tol, self.random_state)
        self.coef_ = result.w
        self.beta_ = result.selected_beta
        self.n_iter_ = result.iterations
        self.converged_ = result.converged
        self.result_ = result
        return self
