import numpy as np
import pytest

from momentum_lab.process import (
    MomentumConfig,
    ProcessState,
    contraction_step,
    momentum_step,
    monte_carlo_moments,
    run_process,
)
from momentum_lab.rng import substream
from momentum_lab.samplers import (
    CoordinateDescentSampler,
    DeterministicSampler,
    ExplicitSampler,
    RateDraw,
    RateSampler,
    eigenbasis_bernoulli_sampler,
)
from momentum_lab.schemes import BlockScheme
from momentum_lab.theory import build_block


class FixedSequenceSampler(RateSampler):
    """Cycles through a fixed list of matrices regardless of the stream."""

    def __init__(self, mats):
        self.mats = [np.asarray(M, float) for M in mats]
        self.dimension = self.mats[0].shape[0]
        self.calls = 0

    def average_rate(self):
        return sum(self.mats) / len(self.mats)

    def draw(self, rng):
        M = self.mats[self.calls % len(self.mats)]
        self.calls += 1
        return RateDraw(lambda v: M @ v, lambda: M)


def test_config_validation():
    with pytest.raises(ValueError):
        MomentumConfig(alpha=0.5, omega=0.7)
    with pytest.raises(ValueError):
        MomentumConfig(beta=-0.1)
    with pytest.raises(ValueError):
        MomentumConfig(minibatch=0)
    MomentumConfig(alpha=1.0, beta=0.9, omega=1.0, minibatch=4)


def test_full_contraction():
    s = DeterministicSampler(np.eye(3))
    state = ProcessState.initial(np.array([1.0, -2.0, 0.5]))
    out = contraction_step(state, s, 1.0, substream(0, 0))
    assert np.array_equal(out.current, np.zeros(3))
    assert out.step == 1


def test_zero_step_is_identity():
    s = DeterministicSampler(np.diag([0.5, 0.25]))
    d0 = np.array([1.0, 2.0])
    out = contraction_step(ProcessState.initial(d0), s, 0.0, substream(0, 0))
    assert np.array_equal(out.current, d0)


def test_coordinate_annihilation():
    P = np.zeros((2, 2))
    P[0, 0] = 1.0
    out = contraction_step(ProcessState.initial(np.array([1.0, 1.0])),
                           DeterministicSampler(P), 1.0, substream(0, 0))
    assert np.array_equal(out.current, np.array([0.0, 1.0]))


def test_beta_zero_reduces_to_contraction_bitwise():
    rng_a = substream(42, 0)
    rng_b = substream(42, 0)
    K = np.array([[2.0, 0.4], [0.4, 1.0]])
    s = CoordinateDescentSampler(K, BlockScheme("coord-weighted", 1))
    cfg = MomentumConfig(alpha=0.8, beta=0.0, omega=0.0, minibatch=1)
    a = ProcessState.initial(np.array([1.0, -1.0]))
    b = ProcessState.initial(np.array([1.0, -1.0]))
    for _ in range(50):
        a = momentum_step(a, s, cfg, rng_a)
        b = contraction_step(b, s, 0.8, rng_b)
        assert np.array_equal(a.current, b.current)
        assert np.array_equal(a.previous_direction, b.previous_direction)


def test_heavy_ball_identity_at_omega_zero():
    mats = [np.diag([0.5, 0.2]), np.diag([0.9, 0.1]), np.diag([0.3, 0.6])]
    s = FixedSequenceSampler(mats)
    cfg = MomentumConfig(alpha=1.0, beta=0.5, omega=0.0, minibatch=1)
    state = ProcessState.initial(np.array([1.0, 2.0]))
    deltas = [np.zeros(2), np.array([1.0, 2.0])]   # Delta_{-1}, Delta_0
    for t in range(3):
        state = momentum_step(state, s, cfg, substream(0, t))
        manual = (np.eye(2) - mats[t]) @ deltas[-1] + 0.5 * (deltas[-1] - deltas[-2])
        assert np.allclose(state.current, manual, atol=1e-15)
        deltas.append(state.current.copy())


def test_nag_three_step_hand_unroll():
    P0 = np.array([[0.5, 0.1], [0.1, 0.3]])
    P1 = np.array([[0.2, 0.0], [0.0, 0.8]])
    P2 = np.array([[0.6, -0.2], [-0.2, 0.4]])
    s = FixedSequenceSampler([P0, P1, P2])
    beta, omega = 0.6, 1.0
    cfg = MomentumConfig(alpha=1.0, beta=beta, omega=omega, minibatch=1)
    d0 = np.array([0.7, -1.3])

    # manual unroll of the two-draw recursion with Delta_{-1} = 0
    g0 = P0 @ d0
    d1 = d0 - g0 + beta * ((d0 - omega * g0) - np.zeros(2))
    g1 = P1 @ d1
    d2 = d1 - g1 + beta * ((d1 - omega * g1) - (d0 - omega * g0))
    g2 = P2 @ d2
    d3 = d2 - g2 + beta * ((d2 - omega * g2) - (d1 - omega * g1))

    state = ProcessState.initial(d0)
    for want in (d1, d2, d3):
        state = momentum_step(state, s, cfg, substream(0, 0))
        assert np.allclose(state.current, want, atol=1e-15)


def test_deterministic_momentum_matches_block_powers():
    lams = np.array([0.8, 0.3, 0.05])
    s = DeterministicSampler(np.diag(lams))
    beta, omega = 0.5, 1.0
    cfg = MomentumConfig(alpha=1.0, beta=beta, omega=omega, minibatch=1)
    d0 = np.array([1.0, -2.0, 0.7])
    state = ProcessState.initial(d0)
    T = 25
    for _ in range(T):
        state = momentum_step(state, s, cfg, substream(0, 0))
    for i, lam in enumerate(lams):
        Ti = build_block(lam, beta, omega).matrix
        vec = np.linalg.matrix_power(Ti, T) @ np.array([d0[i], 0.0])
        assert state.current[i] == pytest.approx(vec[0], rel=1e-10, abs=1e-12)
        assert state.previous[i] == pytest.approx(vec[1], rel=1e-10, abs=1e-12)


def test_nonexpansive_at_beta_zero():
    K = np.array([[3.0, 0.5, 0.1], [0.5, 2.0, 0.2], [0.1, 0.2, 1.0]])
    s = CoordinateDescentSampler(K, BlockScheme("coord-weighted", 1))
    rng = substream(100, 0)
    state = ProcessState.initial(substream(101, 0).standard_normal(3))
    for _ in range(200):
        nxt = contraction_step(state, s, 1.0, rng)
        assert np.linalg.norm(nxt.current) <= np.linalg.norm(state.current) + 1e-12
        state = nxt


def test_range_preservation():
    rng = substream(102, 0)
    V, _ = np.linalg.qr(rng.standard_normal((4, 4)))
    s = eigenbasis_bernoulli_sampler(V, np.array([0.9, 0.4, 0.0, 0.0]))
    Vr = V[:, :2]
    d0 = Vr @ np.array([1.0, -1.0])
    cfg = MomentumConfig(alpha=1.0, beta=0.7, omega=1.0, minibatch=2)
    state = ProcessState.initial(d0)
    g = substream(103, 0)
    scale = np.linalg.norm(d0)   # round-off outside the range persists at
    for _ in range(100):         # machine epsilon of the initial magnitude
        state = momentum_step(state, s, cfg, g)
        resid = state.current - Vr @ (Vr.T @ state.current)
        assert np.linalg.norm(resid) <= 1e-8 * scale


def test_run_process_identity_contracts_to_zero():
    s = DeterministicSampler(np.eye(2))
    cfg = MomentumConfig(alpha=1.0)
    stats = run_process(s, cfg, np.array([1.0, 1.0]), 5, substream(0, 0))
    assert stats.mean[0] == pytest.approx(2.0)
    assert np.all(stats.mean[1:] == 0.0)


def test_run_process_rejects_out_of_range_start():
    rng = substream(104, 0)
    V, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    s = eigenbasis_bernoulli_sampler(V, np.array([0.5, 0.0, 0.0]))
    bad = V[:, 2]
    with pytest.raises(ValueError, match="range"):
        run_process(s, MomentumConfig(alpha=1.0), bad, 3, substream(0, 0))


def test_monte_carlo_single_trial_and_deterministic():
    s = DeterministicSampler(np.diag([0.5, 0.5]))
    cfg = MomentumConfig(alpha=1.0)
    one = monte_carlo_moments(s, cfg, np.array([1.0, 0.0]), 4, 1, master_seed=9)
    assert one.stderr is None
    single = run_process(s, cfg, np.array([1.0, 0.0]), 4, substream(9, 0))
    assert np.array_equal(one.mean, single.mean)
    many = monte_carlo_moments(s, cfg, np.array([1.0, 0.0]), 4, 8, master_seed=9)
    assert np.allclose(many.stderr, 0.0, atol=1e-18)


def test_monte_carlo_thread_count_invariance():
    K = np.array([[2.0, 0.3], [0.3, 1.0]])
    s = CoordinateDescentSampler(K, BlockScheme("coord-weighted", 1))
    cfg = MomentumConfig(alpha=1.0, beta=0.5, omega=1.0, minibatch=2)
    d0 = np.array([1.0, -0.5])
    a = monte_carlo_moments(s, cfg, d0, 20, 16, master_seed=7, threads=1)
    b = monte_carlo_moments(s, cfg, d0, 20, 16, master_seed=7, threads=4)
    assert np.array_equal(a.mean, b.mean)
    assert np.array_equal(a.stderr, b.stderr)


def test_mean_trajectory_below_contraction_envelope():
    # small-scale version of the base-rate law; the full-size one is acceptance
    from momentum_lab.verify import check_base_rate

    rec = check_base_rate(seed=5, n=16, kappa=60.0, trials=300, horizon=100)[0]
    assert rec.passed, rec.line()


def test_minibatching_with_momentum_converges_faster():
    # kappa = 100 toy problem: at the practical beta = 1 - 1/m, the m = 16
    # process reaches mean 1e-6 ||Delta_0||^2 in strictly fewer steps than m = 1
    from momentum_lab.data import synth_problem

    problem = synth_problem(32, 100.0, seed=9)
    s = CoordinateDescentSampler(problem.matrix, BlockScheme("coord-weighted", 1))
    d0 = substream(110, 0).standard_normal(32)
    d0 /= np.linalg.norm(d0)

    def steps_to_threshold(m, horizon):
        cfg = MomentumConfig(alpha=1.0, beta=1.0 - 1.0 / m, omega=1.0, minibatch=m)
        stats = monte_carlo_moments(s, cfg, d0, horizon, 40, master_seed=111)
        below = np.flatnonzero(stats.mean <= 1e-6 * stats.mean[0])
        assert below.size, f"threshold not reached for m={m}"
        return int(below[0])

    t16 = steps_to_threshold(16, 400)
    t1 = steps_to_threshold(1, 3000)
    assert t16 < t1
