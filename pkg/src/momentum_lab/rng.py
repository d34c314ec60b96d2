"""Deterministic random-stream derivation.

Every stochastic component in the library draws from a
``numpy.random.Generator`` obtained through :func:`substream`, keyed by a
master seed plus an integer path (trial index, chain id, cell index, ...).
Streams with distinct keys are statistically independent and reproducible
regardless of scheduling order, which is what makes Monte Carlo drivers and
sweep cells safe to parallelize.
"""

from __future__ import annotations

import numpy as np


def substream(master_seed: int, *key: int) -> np.random.Generator:
    """Return the generator for stream ``key`` under ``master_seed``."""
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=tuple(key)))


def weighted_index(cumprobs: np.ndarray, rng: np.random.Generator) -> int:
    """Draw one index by cumulative-sum inversion of a single uniform variate."""
    return int(np.searchsorted(cumprobs, rng.random(), side="right"))
