"""Run-time momentum tuning by bracketed binary search.

Two solver chains run in parallel: an aggressive one at beta_plus =
1 - 1/m and a conservative one at beta_minus = 1/2.  Every check interval
the ratio R of their probe residuals decides whether the aggressive chain
is diverging (R >= 3: halve phi_plus and restart it from the conservative
state) or the conservative one is lagging (R <= 1/2, or R < 1 for more than
the patience limit: double phi_minus and restart it from the aggressive
state).  Once the bracket satisfies (1 - beta_minus)/(1 - beta_plus) <= 2
the aggressive beta is adopted and a single chain runs to tolerance.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .rng import substream
from .schemes import BlockScheme, bind_scheme
from .solvers import LinearProblem, SolverRunResult, _history_stride, chain_step
from .validation import as_vector

__all__ = ["AdaptiveConfig", "AdaptiveRunResult", "probe_residual", "adaptive_solve"]


@dataclass(frozen=True)
class AdaptiveConfig:
    """Knobs of the bracketed search; defaults follow the reference recipe
    (100 probe rows) with warmup/check cadence as configuration."""

    minibatch: int
    max_iters: int
    warmup: int = 50
    check_interval: int = 10
    probe_rows: int = 100
    patience_limit: int = 20
    ratio_high: float = 3.0
    ratio_low: float = 0.5
    record_chain_agreement: bool = False

    def __post_init__(self):
        if self.minibatch < 1:
            raise ValueError("minibatch must be >= 1")
        if not 0 <= self.warmup < self.max_iters:
            raise ValueError("need 0 <= warmup < max_iters")
        if self.check_interval < 1:
            raise ValueError("check_interval must be >= 1")
        if not (self.ratio_high > 1.0 > self.ratio_low > 0.0):
            raise ValueError("need ratio_high > 1 > ratio_low > 0")
        if self.probe_rows < 1:
            raise ValueError("probe_rows must be >= 1")


@dataclass
class AdaptiveRunResult:
    w: np.ndarray
    selected_beta: float
    bracket_closed_at: int | None
    trace: list[tuple[int, float, float, float]]
    iterations: int
    total_steps: int
    rows_sampled: int
    final_residual: float
    converged: bool
    tail: SolverRunResult | None = None
    flags: list[str] = field(default_factory=list)
    chain_agreement: list[tuple[int, float]] = field(default_factory=list)


def probe_residual(K_probe: np.ndarray, b_probe: np.ndarray, x) -> float:
    """Relative residual on the probe rows; requires a nonzero probe rhs."""
    b = as_vector(b_probe, "probe rhs")
    bn = np.linalg.norm(b)
    if bn == 0:
        raise ValueError("probe rhs is all zero; resample or use absolute residuals")
    return float(np.linalg.norm(K_probe @ np.asarray(x, float) - b) / bn)


def adaptive_solve(problem: LinearProblem, scheme: BlockScheme, config: AdaptiveConfig,
                   tolerance: float, master_seed: int,
                   seed_key: tuple[int, ...] = ()) -> AdaptiveRunResult:
    """Bracketed momentum search followed by a fixed-beta run to tolerance.

    Streams: the warmup/aggressive/tail trajectory, the conservative chain
    and the probe-row draw are keyed independently under ``master_seed`` so
    the two chains stay decoupled.  With checks disabled the aggressive
    chain reproduces a plain fixed-beta run on the same stream bit for bit.
    """
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    m, k = config.minibatch, scheme.k
    T = config.max_iters
    flags: list[str] = []
    sampler = bind_scheme(problem.matrix, scheme)
    s_main = substream(master_seed, *seed_key, 0)
    s_minus = substream(master_seed, *seed_key, 1)
    s_probe = substream(master_seed, *seed_key, 2)

    n = problem.n_rows
    rows = s_probe.choice(n, size=min(config.probe_rows, n), replace=False)
    K_probe = problem.matrix[rows]
    b_probe = problem.rhs[rows]
    probe_norm = float(np.linalg.norm(b_probe))
    if probe_norm == 0:
        flags.append("probe-absolute-residual")

    def probe(x: np.ndarray) -> float:
        r = float(np.linalg.norm(K_probe @ x - b_probe))
        return r / probe_norm if probe_norm > 0 else r

    started = time.perf_counter()
    w = np.zeros(problem.dimension)
    c = w.copy()
    t = 0
    total_steps = 0
    trace: list[tuple[int, float, float, float]] = []
    agreement: list[tuple[int, float]] = []
    bracket_closed_at: int | None = None
    selected = 0.0

    if m < 2:
        # beta_plus = beta_minus = 0: nothing to bracket, plain minibatch CD
        flags.append("degenerate-minibatch")
        bracket_closed_at = 0
    else:
        beta_w = 1.0 - 1.0 / m
        for _ in range(config.warmup):
            w, c = chain_step(problem, scheme, w, c, m, beta_w, s_main, sampler=sampler)
            t += 1
            total_steps += 1

        beta_plus = 1.0 - 1.0 / m
        beta_minus = 0.5
        wp, cp = w.copy(), c.copy()
        wm, cm = w.copy(), c.copy()
        patience = 0
        minus_converged = False
        while t < T and (1.0 - beta_minus) / (1.0 - beta_plus) > 2.0:
            wp, cp = chain_step(problem, scheme, wp, cp, m, beta_plus, s_main, sampler=sampler)
            wm, cm = chain_step(problem, scheme, wm, cm, m, beta_minus, s_minus, sampler=sampler)
            total_steps += 2
            if t % config.check_interval == 0:
                r_plus, r_minus = probe(cp), probe(cm)
                if r_minus == 0.0:
                    flags.append("conservative-chain-converged")
                    minus_converged = True
                    break
                ratio = r_plus / r_minus
                trace.append((t, beta_plus, beta_minus, ratio))
                patience = patience + 1 if ratio < 1.0 else 0
                if ratio >= config.ratio_high:
                    phi_plus = 0.5 / (1.0 - beta_plus)
                    beta_plus = 1.0 - 1.0 / phi_plus
                    wp, cp = wm.copy(), cm.copy()
                    patience = 0
                    if config.record_chain_agreement:
                        agreement.append((t, _chain_distance(wp, cp, wm, cm)))
                elif ratio <= config.ratio_low or patience > config.patience_limit:
                    phi_minus = 2.0 / (1.0 - beta_minus)
                    beta_minus = 1.0 - 1.0 / phi_minus
                    wm, cm = wp.copy(), cp.copy()
                    patience = 0
                    if config.record_chain_agreement:
                        agreement.append((t, _chain_distance(wp, cp, wm, cm)))
            t += 1
        if minus_converged:
            # adaptation cut short, not a closed bracket
            selected = beta_minus
            w, c = wm, cm
        else:
            selected = beta_plus
            w, c = wp, cp
            if (1.0 - beta_minus) / (1.0 - beta_plus) <= 2.0:
                bracket_closed_at = t
            else:
                flags.append("bracket-open-at-max-iters")

    # tail: single chain at the selected beta until tolerance or T
    stride = _history_stride(T)
    steps_rec, hist = [], []
    tail_steps = 0
    converged = False
    res = problem.relative_residual(w)
    while True:
        res = problem.relative_residual(w)
        if tail_steps <= 1000 or tail_steps % stride == 0 or res <= tolerance or t >= T:
            steps_rec.append(t)
            hist.append(res)
        if res <= tolerance:
            converged = True
            break
        if t >= T:
            flags.append("tolerance-not-reached")
            break
        w, c = chain_step(problem, scheme, w, c, m, selected, s_main, sampler=sampler)
        t += 1
        tail_steps += 1
        total_steps += 1
    wall = time.perf_counter() - started

    tail = SolverRunResult(
        iterations=tail_steps,
        rows_sampled=tail_steps * m * k,
        residual_steps=np.asarray(steps_rec, dtype=np.int64),
        residual_history=np.asarray(hist),
        final_residual=res,
        beta=selected,
        converged=converged,
        wall_time_s=wall,
        w=w,
        minibatch=m,
        block_size=k,
    )
    return AdaptiveRunResult(
        w=w,
        selected_beta=selected,
        bracket_closed_at=bracket_closed_at,
        trace=trace,
        iterations=t,
        total_steps=total_steps,
        rows_sampled=total_steps * m * k,
        final_residual=res,
        converged=converged,
        tail=tail,
        flags=flags,
        chain_agreement=agreement,
    )


def _chain_distance(wp, cp, wm, cm) -> float:
    return float(max(np.max(np.abs(wp - wm)), np.max(np.abs(cp - cm))))
