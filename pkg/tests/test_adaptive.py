import numpy as np
import pytest

from momentum_lab.adaptive import AdaptiveConfig, adaptive_solve, probe_residual
from momentum_lab.data import synth_problem
from momentum_lab.rng import substream
from momentum_lab.schemes import BlockScheme, bind_scheme
from momentum_lab.solvers import chain_step


def test_config_validation():
    with pytest.raises(ValueError):
        AdaptiveConfig(minibatch=4, max_iters=100, warmup=100)
    with pytest.raises(ValueError):
        AdaptiveConfig(minibatch=4, max_iters=100, check_interval=0)
    with pytest.raises(ValueError):
        AdaptiveConfig(minibatch=4, max_iters=100, ratio_low=1.5)


def test_probe_residual():
    p = synth_problem(16, 50, seed=1)
    assert probe_residual(p.matrix, p.rhs, p.w_star) == pytest.approx(0.0, abs=1e-12)
    x = np.zeros(16)
    full = np.linalg.norm(p.matrix @ x - p.rhs) / np.linalg.norm(p.rhs)
    assert probe_residual(p.matrix, p.rhs, x) == pytest.approx(full)
    with pytest.raises(ValueError, match="zero"):
        probe_residual(p.matrix, np.zeros(16), x)


def test_degenerate_bracket_m2():
    p = synth_problem(24, 80, seed=2)
    cfg = AdaptiveConfig(minibatch=2, max_iters=3000, warmup=10, probe_rows=24)
    out = adaptive_solve(p, BlockScheme("uniform", 4), cfg, 1e-8, master_seed=5)
    # beta_plus = beta_minus = 1/2: the bracket is closed on arrival
    assert out.selected_beta == pytest.approx(0.5)
    assert out.bracket_closed_at == cfg.warmup
    assert out.trace == []
    assert out.converged


def test_minibatch_one_falls_through_to_plain_cd():
    p = synth_problem(16, 40, seed=3)
    cfg = AdaptiveConfig(minibatch=1, max_iters=4000, warmup=5, probe_rows=16)
    out = adaptive_solve(p, BlockScheme("uniform", 4), cfg, 1e-8, master_seed=6)
    assert "degenerate-minibatch" in out.flags
    assert out.selected_beta == 0.0
    assert out.converged


def test_plus_chain_equals_fixed_beta_run_bitwise():
    p = synth_problem(32, 200, seed=4)
    scheme = BlockScheme("uniform", 4)
    m, steps = 8, 60
    cfg = AdaptiveConfig(minibatch=m, max_iters=steps, warmup=10,
                         check_interval=steps + 50, probe_rows=32)
    out = adaptive_solve(p, scheme, cfg, 1e-300, master_seed=11)
    assert "bracket-open-at-max-iters" in out.flags

    # reference: plain chain at beta = 1 - 1/m on the same derived stream
    rng = substream(11, 0)
    sampler = bind_scheme(p.matrix, scheme)
    w = np.zeros(32)
    c = w.copy()
    for _ in range(steps):
        w, c = chain_step(p, scheme, w, c, m, 1 - 1 / m, rng, sampler=sampler)
    assert np.array_equal(out.w, w)


def test_bracket_dynamics_on_desk_problem():
    p = synth_problem(128, 5000, seed=7)
    cfg = AdaptiveConfig(minibatch=16, max_iters=4000, warmup=20, check_interval=5,
                         probe_rows=64, record_chain_agreement=True)
    out = adaptive_solve(p, BlockScheme("uniform", 8), cfg, 1e-9, master_seed=12)
    assert out.converged
    assert out.bracket_closed_at is not None
    # bracket monotonicity along the trace
    bp = [t[1] for t in out.trace]
    bm = [t[2] for t in out.trace]
    assert all(a >= b - 1e-15 for a, b in zip(bp, bp[1:]))
    assert all(a <= b + 1e-15 for a, b in zip(bm, bm[1:]))
    ratios = [(1 - m_) / (1 - p_) for p_, m_ in zip(bp, bm)]
    assert all(a >= b - 1e-12 for a, b in zip(ratios, ratios[1:]))
    # bound safety
    assert all(1.0 / (1.0 - b) <= 16 + 1e-9 for b in bp)
    assert all(1.0 / (1.0 - b) >= 2 - 1e-9 for b in bm)
    # chains agree exactly right after a copy event
    assert out.chain_agreement, "expected at least one adaptation event"
    assert all(d == 0.0 for _, d in out.chain_agreement)
    # iterations bookkeeping
    assert out.rows_sampled == out.total_steps * 16 * 8


def test_patience_fires_conservative_branch():
    # an easy well-conditioned problem keeps R in (1/2, 1): only the patience
    # counter can fire, doubling phi_minus
    p = synth_problem(64, 400, seed=8)
    cfg = AdaptiveConfig(minibatch=16, max_iters=3000, warmup=10, check_interval=1,
                         probe_rows=64)
    out = adaptive_solve(p, BlockScheme("uniform", 4), cfg, 1e-12, master_seed=13)
    fired_via_patience = False
    prev_bm = 0.5
    for t, bp, bm, r in out.trace:
        if bm > prev_bm and r > 0.5:
            fired_via_patience = True
        prev_bm = max(prev_bm, bm)
    assert fired_via_patience or out.bracket_closed_at is not None
