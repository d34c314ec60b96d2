"""Index-block sampling schemes for row/coordinate solvers.

A scheme is either a uniform draw of a k-subset or a weighted single-index
draw (row norms for least squares, diagonal entries for psd systems).
Weighted draws use cumulative-sum inversion of one uniform variate so the
choice is a deterministic function of the stream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import weighted_index

UNIFORM = "uniform"
ROW_WEIGHTED = "row-weighted"
COORD_WEIGHTED = "coord-weighted"

_SCHEMES = (UNIFORM, ROW_WEIGHTED, COORD_WEIGHTED)


@dataclass(frozen=True)
class BlockScheme:
    """Sampling scheme tag plus block size.

    Weighted schemes are single-index by definition, so ``k`` must be 1
    there; the uniform scheme draws ``k``-subsets without replacement.
    """

    scheme: str = UNIFORM
    k: int = 1

    def __post_init__(self):
        if self.scheme not in _SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}, expected one of {_SCHEMES}")
        if self.k < 1:
            raise ValueError("block size k must be >= 1")
        if self.scheme != UNIFORM and self.k != 1:
            raise ValueError(f"{self.scheme} is a single-index scheme, got k={self.k}")


def scheme_probabilities(scheme: BlockScheme, matrix: np.ndarray) -> np.ndarray | None:
    """Selection probabilities for a weighted scheme; None for uniform."""
    if scheme.scheme == UNIFORM:
        return None
    if scheme.scheme == ROW_WEIGHTED:
        w = np.einsum("ij,ij->i", matrix, matrix)
    else:
        w = np.diag(matrix).copy()
    total = w.sum()
    if total <= 0:
        raise ValueError(f"{scheme.scheme} weights are all zero")
    return w / total


class BlockSampler:
    """Draws index blocks for one (matrix, scheme) pair.

    ``draw_many`` performs ``m`` successive draws from the stream, in index
    order, which is the documented consumption contract that keeps
    mini-batched runs bitwise reproducible.
    """

    def __init__(self, n: int, scheme: BlockScheme, probabilities: np.ndarray | None = None):
        if scheme.k > n:
            raise ValueError(f"block size k={scheme.k} exceeds n={n}")
        self.n = n
        self.scheme = scheme
        self.probabilities = probabilities
        if probabilities is not None:
            if abs(probabilities.sum() - 1.0) > 1e-12:
                raise ValueError("probabilities must sum to 1 within 1e-12")
            self._cum = np.cumsum(probabilities)
            self._cum[-1] = 1.0
        else:
            self._cum = None

    def draw(self, rng: np.random.Generator) -> np.ndarray:
        if self._cum is None:
            return rng.choice(self.n, size=self.scheme.k, replace=False)
        return np.array([weighted_index(self._cum, rng)], dtype=np.int64)

    def draw_many(self, m: int, rng: np.random.Generator) -> np.ndarray:
        out = np.empty((m, self.scheme.k), dtype=np.int64)
        for j in range(m):
            out[j] = self.draw(rng)
        return out


def bind_scheme(matrix: np.ndarray, scheme: BlockScheme) -> BlockSampler:
    return BlockSampler(matrix.shape[0], scheme, scheme_probabilities(scheme, matrix))
