import itertools

import numpy as np
import pytest

from momentum_lab.linalg import pinv, sqrt_psd
from momentum_lab.rng import substream
from momentum_lab.samplers import (
    CoordinateDescentSampler,
    DeterministicSampler,
    ExplicitSampler,
    KaczmarzSampler,
    eigenbasis_bernoulli_sampler,
    minibatch_draw,
)
from momentum_lab.schemes import BlockScheme, BlockSampler, bind_scheme, scheme_probabilities


def spd(n, seed):
    rng = substream(seed, 0)
    G = rng.standard_normal((n, n))
    return G.T @ G + 0.5 * np.eye(n)


def test_scheme_validation():
    with pytest.raises(ValueError):
        BlockScheme("row-weighted", 2)
    with pytest.raises(ValueError):
        BlockScheme("nope", 1)
    with pytest.raises(ValueError):
        BlockSampler(3, BlockScheme("uniform", 5))


def test_scheme_probabilities():
    A = np.array([[1.0, 0.0], [0.0, 2.0], [2.0, 1.0]])
    p = scheme_probabilities(BlockScheme("row-weighted", 1), A)
    assert p == pytest.approx(np.array([1.0, 4.0, 5.0]) / 10.0)
    K = np.diag([2.0, 1.0, 1.0])
    p = scheme_probabilities(BlockScheme("coord-weighted", 1), K)
    assert p == pytest.approx(np.array([0.5, 0.25, 0.25]))
    assert scheme_probabilities(BlockScheme("uniform", 2), K) is None


def test_weighted_draw_is_cumsum_inversion():
    K = np.diag([2.0, 1.0, 1.0])
    s = bind_scheme(K, BlockScheme("coord-weighted", 1))
    rng = substream(5, 0)
    # replicate by inverting the same uniforms
    expect = np.searchsorted(np.cumsum([0.5, 0.25, 0.25]), substream(5, 0).random(50), side="right")
    got = np.array([s.draw(rng)[0] for _ in range(50)])
    assert np.array_equal(got, expect)


def test_deterministic_sampler():
    P = np.diag([0.5, 0.2])
    s = DeterministicSampler(P)
    d = s.draw(substream(0, 0))
    assert np.array_equal(d.matrix(), P)
    assert np.allclose(d.apply(np.array([1.0, 1.0])), [0.5, 0.2])
    assert np.array_equal(s.average_rate(), P)


def test_explicit_sampler_validation_and_mean():
    mats = [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]
    with pytest.raises(ValueError):
        ExplicitSampler(mats, [0.7, 0.7])
    s = ExplicitSampler(mats, [0.25, 0.75])
    assert np.allclose(s.average_rate(), np.diag([0.25, 0.75]))
    rng = substream(1, 0)
    acc = sum(s.draw(rng).matrix() for _ in range(4000)) / 4000
    assert np.linalg.norm(acc - s.average_rate()) < 0.05
    s.psd_check(substream(2, 0))


def test_psd_check_rejects_bad_matrix():
    s = ExplicitSampler([np.diag([1.5, 0.0])], [1.0])
    with pytest.raises(ValueError, match="outside"):
        s.psd_check(substream(0, 0))


def test_bernoulli_eigenbasis_sampler():
    rng = substream(3, 0)
    V, _ = np.linalg.qr(rng.standard_normal((5, 5)))
    rates = np.array([0.8, 0.3, 0.0, 0.0, 0.0])
    s = eigenbasis_bernoulli_sampler(V, rates)
    assert len(s.matrices) == 4
    assert np.allclose(s.average_rate(), (V * rates) @ V.T, atol=1e-12)
    s.psd_check(substream(4, 0), draws=8)
    assert s.average_decomposition().rank == 2


def test_kaczmarz_sampler_weighted_average():
    rng = substream(6, 0)
    A = rng.standard_normal((7, 4))
    s = KaczmarzSampler(A, BlockScheme("row-weighted", 1))
    want = A.T @ A / np.sum(A * A)
    assert np.allclose(s.average_rate(), want, atol=1e-12)
    assert s.average_rate_exact
    # single-row draw: projection onto that row
    d = s.draw(substream(7, 0))
    P = d.matrix()
    assert np.allclose(P @ P, P, atol=1e-10)


def test_kaczmarz_uniform_enumeration_oracle():
    rng = substream(8, 0)
    A = rng.standard_normal((6, 3))
    scheme = BlockScheme("uniform", 2)
    s = KaczmarzSampler(A, scheme)
    got = s.average_rate()
    assert s.average_rate_exact
    acc = np.zeros((3, 3))
    combos = list(itertools.combinations(range(6), 2))
    for S in combos:
        AS = A[list(S)]
        acc += pinv(AS) @ AS
    assert np.allclose(got, acc / len(combos), atol=1e-10)


def test_cd_sampler_weighted_average_and_action():
    K = spd(5, 9)
    s = CoordinateDescentSampler(K, BlockScheme("coord-weighted", 1))
    assert np.allclose(s.average_rate(), K / np.trace(K), atol=1e-12)
    d = s.draw(substream(10, 0))
    v = substream(11, 0).standard_normal(5)
    assert np.allclose(d.apply(v), d.matrix() @ v, atol=1e-10)


def test_cd_uniform_enumeration_oracle():
    K = spd(6, 12)
    scheme = BlockScheme("uniform", 2)
    s = CoordinateDescentSampler(K, scheme)
    got = s.average_rate()
    root = sqrt_psd(K)
    acc = np.zeros((6, 6))
    combos = list(itertools.combinations(range(6), 2))
    for S in combos:
        S = list(S)
        acc += root[:, S] @ pinv(K[np.ix_(S, S)]) @ root[:, S].T
    assert np.allclose(got, acc / len(combos), atol=1e-10)
    assert s.average_rate_exact


def test_cd_uniform_large_n_is_estimated():
    K = spd(24, 13)
    s = CoordinateDescentSampler(K, BlockScheme("uniform", 2), estimate_draws=2000)
    s.average_rate()
    assert not s.average_rate_exact


def test_minibatch_draw_m1_identical_to_single():
    K = spd(4, 14)
    s = CoordinateDescentSampler(K, BlockScheme("coord-weighted", 1))
    v = substream(15, 0).standard_normal(4)
    a = minibatch_draw(s, 1, substream(16, 0)).apply(v)
    b = s.draw(substream(16, 0)).apply(v)
    assert np.array_equal(a, b)


def test_minibatch_of_deterministic_is_average_rate():
    P = np.diag([0.7, 0.1])
    s = DeterministicSampler(P)
    for m in (1, 3, 8):
        d = minibatch_draw(s, m, substream(17, m))
        assert np.allclose(d.matrix(), P, atol=1e-15)


def test_minibatch_mean_matches_closed_form():
    # diagonally dominant 3x3, one mini-batch of 1e5 draws averaged once
    K = np.array([[4.0, 0.3, 0.2], [0.3, 3.0, 0.1], [0.2, 0.1, 2.0]])
    s = CoordinateDescentSampler(K, BlockScheme("coord-weighted", 1))
    want = K / np.trace(K)
    draws = 100_000
    got = minibatch_draw(s, draws, substream(18, 0)).matrix()
    # entrywise 5 standard errors, exact variance from the 3-outcome distribution
    probs = np.diag(K) / np.trace(K)
    mats = []
    root = sqrt_psd(K)
    for i in range(3):
        c = root[:, i] / np.sqrt(K[i, i])
        mats.append(np.outer(c, c))
    mats = np.stack(mats)
    second = np.einsum("i,ijk->jk", probs, mats * mats)
    var = second - want * want
    se = np.sqrt(var / draws)
    assert np.all(np.abs(got - want) <= 5 * se + 1e-12)
