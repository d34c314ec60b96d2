"""Stochastic rate-matrix samplers.

A sampler is a source of random psd matrices ``Pi`` with ``0 <= Pi <= I``
(Loewner order) and a known average rate.  Draws are exposed as actions
``v -> Pi v`` so large Kaczmarz / coordinate-descent instances never
materialize an n x n matrix; explicit materialization is available where
cheap, and is what the debug psd checks and the variance verifier use.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .linalg import SpectralDecomposition, pinv, sqrt_psd, sym_eig
from .rng import substream, weighted_index
from .schemes import BlockScheme, bind_scheme
from .validation import as_matrix, check_symmetric

__all__ = [
    "RateDraw",
    "RateSampler",
    "DeterministicSampler",
    "ExplicitSampler",
    "KaczmarzSampler",
    "CoordinateDescentSampler",
    "eigenbasis_bernoulli_sampler",
    "minibatch_draw",
]


class RateDraw:
    """One sampled rate matrix, usable as an action and optionally explicit."""

    __slots__ = ("_apply", "_materialize")

    def __init__(self, apply_fn, materialize_fn=None):
        self._apply = apply_fn
        self._materialize = materialize_fn

    def apply(self, v: np.ndarray) -> np.ndarray:
        return self._apply(v)

    def matrix(self) -> np.ndarray:
        if self._materialize is None:
            raise NotImplementedError("this draw is action-only")
        return self._materialize()


class RateSampler:
    """Base class: dimension, average rate, and a draw procedure."""

    dimension: int

    def average_rate(self) -> np.ndarray:
        raise NotImplementedError

    @property
    def average_rate_exact(self) -> bool:
        return True

    def draw(self, rng: np.random.Generator) -> RateDraw:
        raise NotImplementedError

    def average_decomposition(self) -> SpectralDecomposition:
        """Eigendecomposition of the average rate, cached after first use."""
        dec = getattr(self, "_avg_dec", None)
        if dec is None:
            dec = sym_eig(self.average_rate(), psd=True)
            self._avg_dec = dec
        return dec

    def psd_check(self, rng: np.random.Generator, draws: int = 10, tol: float = 1e-10) -> None:
        """Debug mode: verify 0 <= Pi <= I on explicitly materialized draws."""
        for _ in range(draws):
            P = self.draw(rng).matrix()
            check_symmetric(P, tol=tol, name="sampled rate matrix")
            vals = np.linalg.eigvalsh(0.5 * (P + P.T))
            if vals.min() < -tol or vals.max() > 1 + tol:
                raise ValueError(
                    f"sampled rate matrix has spectrum [{vals.min():.3e}, {vals.max():.3e}] "
                    f"outside [0, 1] at tolerance {tol:.1e}"
                )


class DeterministicSampler(RateSampler):
    """Always returns the same rate matrix (Pi == average rate)."""

    def __init__(self, P):
        self._P = check_symmetric(P, name="rate matrix")
        self.dimension = self._P.shape[0]

    def average_rate(self) -> np.ndarray:
        return self._P

    def draw(self, rng) -> RateDraw:
        P = self._P
        return RateDraw(lambda v: P @ v, lambda: P)


class ExplicitSampler(RateSampler):
    """Finite distribution over explicitly given psd matrices.

    The average rate is the probability-weighted sum unless an exact
    ``average`` is supplied (certified-by-construction samplers).
    """

    def __init__(self, matrices, probabilities, average=None):
        self.matrices = [as_matrix(M, "outcome matrix") for M in matrices]
        p = np.asarray(probabilities, dtype=np.float64)
        if len(self.matrices) != p.size:
            raise ValueError("need one probability per outcome")
        if abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("probabilities must sum to 1 within 1e-12")
        self.probabilities = p
        self._cum = np.cumsum(p)
        self._cum[-1] = 1.0
        self.dimension = self.matrices[0].shape[0]
        if average is not None:
            self._avg = as_matrix(average, "average rate")
        else:
            self._avg = sum(pi * M for pi, M in zip(p, self.matrices))

    def average_rate(self) -> np.ndarray:
        return self._avg

    def draw(self, rng) -> RateDraw:
        M = self.matrices[weighted_index(self._cum, rng)]
        return RateDraw(lambda v: M @ v, lambda: M)


def eigenbasis_bernoulli_sampler(basis: np.ndarray, rates: np.ndarray) -> ExplicitSampler:
    """Explicit sampler with Pi = V diag(b) V^T, b_i ~ Bernoulli(rate_i).

    Draws are diagonal in the given orthonormal basis, so the average rate
    V diag(rates) V^T and the mini-batch variance envelope are both exact.
    Outcomes are enumerated, which limits this to ~12 positive rates.
    """
    V = as_matrix(basis, "basis")
    lam = np.asarray(rates, dtype=np.float64)
    pos = np.flatnonzero(lam > 0)
    if pos.size > 12:
        raise ValueError("too many positive rates to enumerate")
    mats, probs = [], []
    for bits in itertools.product((0, 1), repeat=pos.size):
        b = np.zeros(lam.size)
        b[pos] = bits
        prob = np.prod(np.where(np.array(bits) == 1, lam[pos], 1 - lam[pos])) if pos.size else 1.0
        mats.append((V * b) @ V.T)
        probs.append(prob)
    avg = (V * lam) @ V.T
    return ExplicitSampler(mats, np.array(probs), average=0.5 * (avg + avg.T))


class KaczmarzSampler(RateSampler):
    """Rate matrices Pi = A_S^+ A_S of a randomized (block) Kaczmarz sweep."""

    def __init__(self, A, scheme: BlockScheme, pinv_tol: float = 1e-10,
                 estimate_seed: int = 0, estimate_draws: int = 100_000):
        self.A = as_matrix(A, "A")
        self.scheme = scheme
        self.pinv_tol = pinv_tol
        self.dimension = self.A.shape[1]
        self._blocks = bind_scheme(self.A, scheme)
        self._estimate_seed = estimate_seed
        self._estimate_draws = estimate_draws
        self._avg = None
        self._avg_exact = None

    def draw(self, rng) -> RateDraw:
        S = self._blocks.draw(rng)
        AS = self.A[S]
        ASp = pinv(AS, tol=self.pinv_tol)
        return RateDraw(lambda v: ASp @ (AS @ v), lambda: ASp @ AS)

    @property
    def average_rate_exact(self) -> bool:
        self.average_rate()
        return self._avg_exact

    def average_rate(self) -> np.ndarray:
        if self._avg is not None:
            return self._avg
        A = self.A
        if self.scheme.scheme == "row-weighted":
            self._avg = A.T @ A / float(np.einsum("ij,ij->", A, A))
            self._avg_exact = True
        else:
            M, exact = _uniform_block_mean(
                A.shape[0], self.scheme.k,
                lambda S: pinv(A[S] @ A[S].T, tol=self.pinv_tol),
                self._estimate_seed, self._estimate_draws,
            )
            self._avg = A.T @ M @ A
            self._avg_exact = exact
        self._avg = 0.5 * (self._avg + self._avg.T)
        return self._avg


class CoordinateDescentSampler(RateSampler):
    """Rate matrices Pi = K^{1/2} I_S^T (K_{S,S})^+ I_S K^{1/2} of block CD."""

    def __init__(self, K, scheme: BlockScheme, pinv_tol: float = 1e-10,
                 estimate_seed: int = 0, estimate_draws: int = 100_000):
        self.K = check_symmetric(K, name="K")
        self.scheme = scheme
        self.pinv_tol = pinv_tol
        self.dimension = self.K.shape[0]
        self._blocks = bind_scheme(self.K, scheme)
        self._sqrt = sqrt_psd(self.K)
        self._estimate_seed = estimate_seed
        self._estimate_draws = estimate_draws
        self._avg = None
        self._avg_exact = None

    def draw(self, rng) -> RateDraw:
        S = self._blocks.draw(rng)
        B = self._sqrt[:, S]
        block_inv = pinv(self.K[np.ix_(S, S)], tol=self.pinv_tol)
        return RateDraw(lambda v: B @ (block_inv @ (B.T @ v)), lambda: B @ block_inv @ B.T)

    @property
    def average_rate_exact(self) -> bool:
        self.average_rate()
        return self._avg_exact

    def average_rate(self) -> np.ndarray:
        if self._avg is not None:
            return self._avg
        if self.scheme.scheme == "coord-weighted":
            self._avg = self.K / float(np.trace(self.K))
            self._avg_exact = True
        else:
            M, exact = _uniform_block_mean(
                self.dimension, self.scheme.k,
                lambda S: pinv(self.K[np.ix_(S, S)], tol=self.pinv_tol),
                self._estimate_seed, self._estimate_draws,
            )
            self._avg = self._sqrt @ M @ self._sqrt
            self._avg_exact = exact
        self._avg = 0.5 * (self._avg + self._avg.T)
        return self._avg


def _uniform_block_mean(n, k, block_fn, seed, draws, max_enum=100_000):
    """Mean of I_S^T block_fn(S) I_S over uniform k-subsets.

    Exact enumeration when feasible (n <= 20 and C(n, k) within budget),
    otherwise a seeded Monte Carlo estimate flagged as inexact.
    """
    M = np.zeros((n, n))
    if n <= 20 and math.comb(n, k) <= max_enum:
        count = 0
        for S in itertools.combinations(range(n), k):
            S = np.asarray(S)
            M[np.ix_(S, S)] += block_fn(S)
            count += 1
        return M / count, True
    rng = substream(seed, 0xB10C)
    for _ in range(draws):
        S = rng.choice(n, size=k, replace=False)
        M[np.ix_(S, S)] += block_fn(S)
    return M / draws, False


def minibatch_draw(sampler: RateSampler, m: int, rng: np.random.Generator) -> RateDraw:
    """Average of ``m`` independent draws (Pi^[m]), drawn sequentially."""
    if m < 1:
        raise ValueError("minibatch size must be >= 1")
    if m == 1:
        return sampler.draw(rng)
    draws = [sampler.draw(rng) for _ in range(m)]

    def apply(v):
        acc = draws[0].apply(v)
        for d in draws[1:]:
            acc = acc + d.apply(v)
        return acc / m

    def materialize():
        acc = draws[0].matrix().copy()
        for d in draws[1:]:
            acc += d.matrix()
        return acc / m

    return RateDraw(apply, materialize)
