"""Numerical certification of the spectral bounds against brute force.

Every certified inequality in the library gets a named check that evaluates
both sides on a seeded grid (or by Monte Carlo against an independent
simulation) and reports the worst-case margin as a :class:`CheckRecord`.
The ``verify-theory`` CLI writes these as one CSV line per inequality.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, linear_sum_assignment

from . import theory
from .linalg import norms2x2, sqrt_psd
from .process import MomentumConfig, monte_carlo_moments
from .rng import substream
from .samplers import CoordinateDescentSampler, eigenbasis_bernoulli_sampler
from .schemes import BlockScheme
from .solvers import condition_number
from .theory import TheoryBoundInputs, build_block

__all__ = [
    "CheckRecord",
    "write_records",
    "admissible_grid",
    "check_eigenvalue_law",
    "check_schur_certification",
    "check_power_norm_bounds",
    "check_rho_envelope",
    "check_pt_envelope",
    "check_minibatch_variance",
    "check_base_rate",
    "verify_block_diagonalization",
    "verify_helper_inequalities",
    "check_bias_envelope_simulation",
    "check_l2_envelope_simulation",
    "SUITES",
    "run_suites",
]

#: absolute slack absorbing double-precision round-off in grid inequalities
GRID_SLACK = 1e-9


@dataclass
class CheckRecord:
    """One checked inequality: lhs <= rhs with margin = rhs - lhs at the
    worst grid point / time step."""

    name: str
    params: str
    lhs: float
    rhs: float
    margin: float
    passed: bool

    def line(self) -> str:
        status = "pass" if self.passed else "FAIL"
        return (f"{self.name:34s} {status}  lhs={self.lhs:.6e} rhs={self.rhs:.6e} "
                f"margin={self.margin:.3e}  [{self.params}]")


def write_records(records: list[CheckRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["name", "params", "lhs", "rhs", "margin", "passed"])
        for r in records:
            writer.writerow([r.name, r.params, repr(r.lhs), repr(r.rhs), repr(r.margin),
                             str(r.passed).lower()])


def _worst(name, params, lhs, rhs, slack=GRID_SLACK) -> CheckRecord:
    """Record for elementwise lhs <= rhs + slack, reporting the worst point."""
    lhs = np.asarray(lhs, dtype=np.float64)
    rhs = np.asarray(rhs, dtype=np.float64)
    margin = rhs - lhs
    i = int(np.argmin(margin))
    return CheckRecord(name=name, params=params, lhs=float(lhs.flat[i]), rhs=float(rhs.flat[i]),
                       margin=float(margin.flat[i]), passed=bool(np.all(lhs <= rhs + slack)))


# ---------------------------------------------------------------------------
# grids


def admissible_grid(seed: int = 0, count: int = 10_000,
                    phi_range=(2.0, 50.0)) -> dict[str, np.ndarray]:
    """Seeded triples (lam, phi, omega) with phi in [2, 50] and
    lam in (0, min(1, 1/(9 phi^2))], omega on the five-point grid."""
    rng = substream(seed, 0xA11)
    lo, hi = phi_range
    phi = np.exp(rng.uniform(math.log(lo), math.log(hi), count))
    cap = np.minimum(1.0, 1.0 / (9.0 * phi * phi))
    lam = cap * rng.uniform(1e-9, 1.0, count)
    omega = rng.choice([0.0, 0.25, 0.5, 0.75, 1.0], count)
    return {"lam": lam, "phi": phi, "omega": omega, "beta": 1.0 - 1.0 / phi}


def _grid_eigs(grid):
    """Vectorized eigenvalue pairs and kinds over a (lam, beta, omega) grid."""
    lam, beta, om = grid["lam"], grid["beta"], grid["omega"]
    trace = (1.0 - lam) + beta * (1.0 - om * lam)
    det = beta * (1.0 - om * lam)
    disc = trace * trace - 4.0 * det
    comp = disc < -theory.EQUAL_TOL
    equal = np.abs(disc) <= theory.EQUAL_TOL
    root = np.sqrt(np.abs(disc)) / 2.0
    g1 = np.where(comp, trace / 2.0 + 1j * root, trace / 2.0 + root)
    g2 = np.where(comp, trace / 2.0 - 1j * root, trace / 2.0 - root)
    swap = np.abs(g2) > np.abs(g1)
    g1, g2 = np.where(swap, g2, g1), np.where(swap, g1, g2)
    return g1, g2, comp, equal, disc


# ---------------------------------------------------------------------------
# eigenvalue magnitude law and Schur certification


def wide_grid(seed: int = 0, count: int = 10_000) -> dict[str, np.ndarray]:
    """Unrestricted-lam grid (lam in (0, 1]) with beta = 1 - 1/phi, phi >= 2;
    this is where the complex and repeated-eigenvalue kinds actually occur."""
    rng = substream(seed, 0xA22)
    phi = np.exp(rng.uniform(math.log(2.0), math.log(50.0), count))
    lam = rng.uniform(1e-12, 1.0, count)
    omega = rng.choice([0.0, 0.25, 0.5, 0.75, 1.0], count)
    return {"lam": lam, "phi": phi, "omega": omega, "beta": 1.0 - 1.0 / phi}


def _eig_law_records(grid, tag: str, params: str) -> list[CheckRecord]:
    g1, g2, comp, equal, _ = _grid_eigs(grid)
    lam, phi, om = grid["lam"], grid["phi"], grid["omega"]
    records = []
    exact = comp | equal
    if np.any(exact):
        target = (1.0 - 1.0 / phi[exact]) * (1.0 - om[exact] * lam[exact])
        err = np.abs(np.abs(g1[exact]) ** 2 - target)
        records.append(_worst(f"eig-magnitude-exact-{tag}",
                              f"{params} hits={int(exact.sum())}",
                              err, np.full(err.shape, 1e-12), slack=0.0))
    else:
        records.append(CheckRecord(f"eig-magnitude-exact-{tag}", f"{params} hits=0",
                                   0.0, 1e-12, 1e-12, True))
    dist = ~exact
    if np.any(dist):
        bound = (1.0 - phi[dist] * lam[dist] / 2.0) * (1.0 - om[dist] * lam[dist])
        records.append(_worst(f"eig-magnitude-distinct-{tag}",
                              f"{params} hits={int(dist.sum())}",
                              np.abs(g1[dist]), bound, slack=0.0))
    else:
        records.append(CheckRecord(f"eig-magnitude-distinct-{tag}", f"{params} hits=0",
                                   0.0, 1.0, 1.0, True))
    return records


def check_eigenvalue_law(seed: int = 0, count: int = 10_000) -> list[CheckRecord]:
    """Per-kind magnitude law of the block eigenvalues: exact value
    (1 - 1/phi)(1 - omega*lam) for complex/equal kinds (within 1e-12), strict
    bound (1 - phi*lam/2)(1 - omega*lam) for the real-distinct kind.  Checked
    on the admissible grid (all real-distinct there) and on a wide-lam grid
    that exercises the complex regime."""
    params = f"seed={seed} count={count}"
    records = _eig_law_records(admissible_grid(seed, count), "admissible", params)
    records += _eig_law_records(wide_grid(seed, count), "wide", params)
    return records


def check_schur_certification(seed: int = 0, count: int = 10_000) -> list[CheckRecord]:
    """Unitarity to 1e-12, triangularization residual to 1e-10, Frobenius
    identity to 1e-10, and corner magnitude in [1, 3] on the admissible grid."""
    grid = admissible_grid(seed, count)
    lam, beta, om = grid["lam"], grid["beta"], grid["omega"]
    g1, g2, comp, equal, _ = _grid_eigs(grid)
    n = lam.size
    T = np.zeros((n, 2, 2))
    T[:, 0, 0] = (1.0 + beta) - (1.0 + beta * om) * lam
    T[:, 0, 1] = -beta * (1.0 - om * lam)
    T[:, 1, 0] = 1.0
    scale = 1.0 / np.sqrt(1.0 + np.abs(g1) ** 2)
    U = np.empty((n, 2, 2), dtype=np.complex128)
    U[:, 0, 0] = g1
    U[:, 0, 1] = -1.0
    U[:, 1, 0] = 1.0
    U[:, 1, 1] = np.conj(g1)
    U *= scale[:, None, None]
    UH = np.conj(np.swapaxes(U, 1, 2))
    M = UH @ T.astype(np.complex128) @ U
    eye = np.eye(2)
    unit_err = np.max(np.abs(UH @ U - eye), axis=(1, 2))
    upper = M.copy()
    upper[:, 0, 0] = g1
    upper[:, 1, 1] = g2
    upper[:, 1, 0] = 0.0
    tri_err = np.sqrt(np.sum(np.abs(M - upper) ** 2, axis=(1, 2)))
    frob_err = np.abs(np.sum(np.abs(upper) ** 2, axis=(1, 2)) - np.sum(T * T, axis=(1, 2)))
    x_abs = np.abs(M[:, 0, 1])
    params = f"seed={seed} count={count}"
    return [
        _worst("schur-unitarity", params, unit_err, np.full(n, 1e-12), slack=0.0),
        _worst("schur-residual", params, tri_err, np.full(n, 1e-10), slack=0.0),
        _worst("schur-frobenius-identity", params, frob_err, np.full(n, 1e-10), slack=0.0),
        _worst("schur-corner-upper", params, x_abs, np.full(n, 3.0), slack=0.0),
        _worst("schur-corner-lower", params, np.full(n, 1.0), x_abs, slack=0.0),
    ]


def check_power_norm_bounds(seed: int = 0, count: int = 10_000, k_power: int = 500,
                            k_gram: int = 200) -> list[CheckRecord]:
    """Exact ||T^k|| against (3k+2)|g1|^(k-1) for k <= k_power and exact
    ||(T^T)^k T^k|| against 11 |g1|^(2k) h^2(k) for k <= k_gram."""
    grid = admissible_grid(seed, count)
    lam, beta, om = grid["lam"], grid["beta"], grid["omega"]
    g1, g2, comp, equal, _ = _grid_eigs(grid)
    absg = np.abs(g1)
    gap = np.abs(g1 - g2)
    n = lam.size
    T = np.zeros((n, 2, 2))
    T[:, 0, 0] = (1.0 + beta) - (1.0 + beta * om) * lam
    T[:, 0, 1] = -beta * (1.0 - om * lam)
    T[:, 1, 0] = 1.0
    P = np.broadcast_to(np.eye(2), (n, 2, 2)).copy()
    worst_pow = (np.inf, 0.0, 0.0)  # margin, lhs, rhs
    worst_gram = (np.inf, 0.0, 0.0)
    pow_ok = gram_ok = True
    for k in range(k_power + 1):
        nrm = norms2x2(P)
        bound = (3.0 * k + 2.0) * absg ** (k - 1)
        margin = bound - nrm
        i = int(np.argmin(margin))
        if margin[i] < worst_pow[0]:
            worst_pow = (float(margin[i]), float(nrm[i]), float(bound[i]))
        pow_ok &= bool(np.all(nrm <= bound + GRID_SLACK))
        if k <= k_gram:
            if k == 0:
                h = np.ones(n)
            else:
                h = k / absg
                hg = np.where(equal, np.inf, 2.0 / np.where(gap > 0, gap, np.inf))
                h = np.minimum(h, hg)
            gram = nrm * nrm
            gbound = 11.0 * absg ** (2 * k) * h * h
            gmargin = gbound - gram
            j = int(np.argmin(gmargin))
            if gmargin[j] < worst_gram[0]:
                worst_gram = (float(gmargin[j]), float(gram[j]), float(gbound[j]))
            gram_ok &= bool(np.all(gram <= gbound + GRID_SLACK))
        if k < k_power:
            P = P @ T
    params = f"seed={seed} count={count}"
    return [
        CheckRecord("power-norm-bound", f"{params} k<=500", worst_pow[1], worst_pow[2],
                    worst_pow[0], pow_ok),
        CheckRecord("gram-power-bound", f"{params} k<=200", worst_gram[1], worst_gram[2],
                    worst_gram[0], gram_ok),
    ]


# ---------------------------------------------------------------------------
# rate envelopes


def random_bound_inputs(rng: np.random.Generator, horizon: int,
                        analysis_constant: float = theory.ANALYSIS_C) -> TheoryBoundInputs:
    """One admissible TheoryBoundInputs draw (m chosen to admit phi)."""
    phi = float(np.exp(rng.uniform(math.log(2.0), math.log(50.0))))
    lam_r = float(1.0 / (9.0 * phi * phi) * rng.uniform(1e-6, 1.0))
    r = int(rng.integers(2, 7))
    rest = np.sort(rng.uniform(lam_r, 1.0, r - 1))[::-1]
    spectrum = np.concatenate([rest, [lam_r]])
    m = int(math.ceil(phi * analysis_constant)) * int(rng.integers(1, 4))
    omega = float(rng.choice([0.0, 0.25, 0.5, 0.75, 1.0]))
    return TheoryBoundInputs(spectrum=spectrum, minibatch=m, phi=phi, omega=omega,
                             horizon=horizon, analysis_constant=analysis_constant)


def check_rho_envelope(seed: int = 0, count: int = 1000, horizon: int = 1000) -> list[CheckRecord]:
    """max_i (|g1| + q_i ell_i(t)) <= 1 - phi*lam_r/4 on admissible inputs."""
    rng = substream(seed, 0x9B0)
    worst = (np.inf, 0.0, 0.0)
    ok = True
    for _ in range(count):
        inputs = random_bound_inputs(rng, horizon)
        lhs, rho = theory.spectral_margin(inputs)
        if rho - lhs < worst[0]:
            worst = (rho - lhs, lhs, rho)
        ok &= lhs <= rho
    return [CheckRecord("spectral-margin-envelope", f"seed={seed} count={count} t={horizon}",
                        worst[1], worst[2], worst[0], bool(ok))]


def _matrix_se(sum1: np.ndarray, sum2: np.ndarray, n: int) -> float:
    """Frobenius norm of the entrywise standard errors of a matrix mean."""
    mean = sum1 / n
    var = np.maximum(sum2 / n - mean * mean, 0.0)
    return float(np.linalg.norm(np.sqrt(var / n)))


def check_pt_envelope(seed: int = 0, trials: int = 10_000, horizon: int = 50,
                      minibatches=(4, 16), phi: float = 2.0, omega: float = 1.0,
                      n: int = 8, spectrum=(0.9, 0.5, 0.2, 0.05),
                      se_factor: float = 5.0) -> list[CheckRecord]:
    """Monte Carlo ||E[Sigma_t^T Sigma_t]|| against the certified p_t sequence.

    The sampler draws Bernoulli-diagonal rate matrices in a random
    orthonormal basis of R^n, whose positive spectrum is given; Sigma_t is
    the product of the two-step transition matrices restricted to the 2r
    coordinates that carry the dynamics.
    """
    rng0 = substream(seed, 0x51)
    lam = np.asarray(spectrum, dtype=np.float64)
    r = lam.size
    V, _ = np.linalg.qr(rng0.standard_normal((n, n)))
    rates = np.concatenate([lam, np.zeros(n - r)])
    sampler = eigenbasis_bernoulli_sampler(V, rates)
    Vr = V[:, :r]
    Zs = np.stack([Vr.T @ M @ Vr for M in sampler.matrices])
    cum = np.cumsum(sampler.probabilities)
    cum[-1] = 1.0
    beta = 1.0 - 1.0 / phi
    eye = np.eye(r)
    records = []
    for m in minibatches:
        inputs = TheoryBoundInputs(spectrum=lam, minibatch=m, phi=phi, omega=omega,
                                   horizon=horizon, analysis_constant=1.0)
        p = theory.pt_recursion(inputs)
        sum1 = np.zeros((horizon + 1, 2 * r, 2 * r))
        sum2 = np.zeros_like(sum1)
        chunk = 1000
        for lo in range(0, trials, chunk):
            hi = min(lo + chunk, trials)
            b = hi - lo
            # trial streams keyed by (seed, m, trial); each trial's draws for
            # steps 0..horizon are taken in a single bulk call
            idx = np.empty((b, horizon + 1, m), dtype=np.int64)
            for i in range(lo, hi):
                u = substream(seed, m, i).random((horizon + 1, m))
                idx[i - lo] = np.searchsorted(cum, u, side="right")
            Zbar = Zs[idx].mean(axis=2)                  # (b, horizon+1, r, r)
            sig = np.broadcast_to(np.eye(2 * r), (b, 2 * r, 2 * r)).copy()
            Zprev = Zbar[:, 0]                           # the step-0 draw
            M0 = np.swapaxes(sig, 1, 2) @ sig
            sum1[0] += M0.sum(axis=0)
            sum2[0] += (M0 * M0).sum(axis=0)
            Y = np.zeros((b, 2 * r, 2 * r))
            Y[:, r:, :r] = eye
            for t in range(1, horizon + 1):
                Z = Zbar[:, t]
                Y[:, :r, :r] = (1.0 + beta) * eye - (1.0 + beta * omega) * Z
                Y[:, :r, r:] = -beta * (eye - omega * Zprev)
                sig = Y @ sig
                M = np.swapaxes(sig, 1, 2) @ sig
                sum1[t] += M.sum(axis=0)
                sum2[t] += (M * M).sum(axis=0)
                Zprev = Z
        ok = True
        worst = (np.inf, 0.0, 0.0)
        for t in range(horizon + 1):
            mc = float(np.linalg.norm(sum1[t] / trials, 2))
            envelope = p[t] + se_factor * _matrix_se(sum1[t], sum2[t], trials)
            if envelope - mc < worst[0]:
                worst = (envelope - mc, mc, envelope)
            ok &= mc <= envelope
        records.append(CheckRecord("second-moment-recursion",
                                   f"seed={seed} m={m} trials={trials} t<={horizon}",
                                   worst[1], worst[2], worst[0], bool(ok)))
    return records


def check_minibatch_variance(seed: int = 0, n: int = 16, minibatches=(1, 2, 4, 8),
                             draws: int = 100_000, se_factor: float = 5.0,
                             chunk: int = 10_000) -> list[CheckRecord]:
    """lambda_max(MC estimate of E[(Pi^[m] - avg)^2] - (1/m) avg(I - avg))
    within Monte Carlo noise of zero for the weighted coordinate sampler."""
    from .data import synth_problem

    problem = synth_problem(n, kappa=max(4 * n, 100), seed=seed)
    K = problem.matrix
    root = sqrt_psd(K)
    cols = root / np.sqrt(np.diag(K))[None, :]           # Pi_i = c_i c_i^T
    probs = np.diag(K) / np.trace(K)
    cum = np.cumsum(probs)
    cum[-1] = 1.0
    avg = K / np.trace(K)
    records = []
    for m in minibatches:
        bound = (avg @ (np.eye(n) - avg)) / m
        u = substream(seed, 0xFA, m).random(draws * m)
        idx = np.searchsorted(cum, u, side="right").reshape(draws, m)
        sum1 = np.zeros((n, n))
        sum2 = np.zeros((n, n))
        for lo in range(0, draws, chunk):
            sel = idx[lo:lo + chunk]
            C = cols.T[sel]                              # (b, m, n)
            Pim = np.einsum("bmi,bmj->bij", C, C) / m
            D = Pim - avg
            sq = D @ D
            sum1 += sq.sum(axis=0)
            sum2 += (sq * sq).sum(axis=0)
        diff = sum1 / draws - bound
        lam_max = float(np.linalg.eigvalsh(0.5 * (diff + diff.T)).max())
        se = _matrix_se(sum1, sum2, draws)
        records.append(CheckRecord("minibatch-variance-envelope",
                                   f"seed={seed} n={n} m={m} draws={draws}",
                                   lam_max, se_factor * se, se_factor * se - lam_max,
                                   lam_max <= se_factor * se))
    return records


def check_base_rate(seed: int = 0, n: int = 64, kappa: float = 500.0, trials: int = 2000,
                    horizon: int = 200, se_factor: float = 3.0) -> list[CheckRecord]:
    """Mean ||Delta_t||^2 of weighted single-coordinate descent against the
    (1 - 1/kappa)^t contraction law, within Monte Carlo noise."""
    from .data import synth_problem

    problem = synth_problem(n, kappa=kappa, seed=seed)
    scheme = BlockScheme("coord-weighted", 1)
    sampler = CoordinateDescentSampler(problem.matrix, scheme)
    kap = condition_number(problem, scheme).kappa
    rng = substream(seed, 0xD0)
    delta0 = rng.standard_normal(n)
    delta0 /= np.linalg.norm(delta0)
    stats = monte_carlo_moments(sampler, MomentumConfig(alpha=1.0), delta0, horizon,
                                trials, master_seed=seed)
    t = np.arange(horizon + 1)
    se = stats.stderr if stats.stderr is not None else np.zeros(horizon + 1)
    envelope = (1.0 - 1.0 / kap) ** t + se_factor * se
    rec = _worst("base-contraction-rate",
                 f"seed={seed} n={n} kappa={kap:.1f} trials={trials} t<={horizon}",
                 stats.mean, envelope, slack=0.0)
    return [rec]


# ---------------------------------------------------------------------------
# structural checks


def verify_block_diagonalization(spectrum, beta: float, omega: float) -> CheckRecord:
    """The eigenvalue multiset of the full two-step transition matrix equals
    the union of the per-direction block eigenvalue pairs (within 1e-8)."""
    lam = np.asarray(spectrum, dtype=np.float64)
    d = lam.size
    if d > 64:
        raise ValueError("full-matrix verification capped at dimension 64")
    Lam = np.diag(lam)
    eye = np.eye(d)
    T = np.block([
        [(1.0 + beta) * eye - (1.0 + beta * omega) * Lam, -beta * (eye - omega * Lam)],
        [eye, np.zeros((d, d))],
    ])
    full = np.linalg.eigvals(T)
    blocks = np.concatenate([[b.eig1, b.eig2] for b in
                             (build_block(l, beta, omega) for l in lam)])
    cost = np.abs(full[:, None] - blocks[None, :])
    rows, cols = linear_sum_assignment(cost)
    worst = float(cost[rows, cols].max())
    return CheckRecord("block-diagonalization",
                       f"d={d} beta={beta} omega={omega}",
                       worst, 1e-8, 1e-8 - worst, worst <= 1e-8)


def verify_helper_inequalities(beta_count: int = 200, x_count: int = 200) -> list[CheckRecord]:
    """Pointwise checks of the four scalar inequalities behind the envelope
    case analysis, on a beta x x grid over [1/2, 1) x [1, 1000].

    The third inequality is checked exactly as stated and is expected to
    FAIL: at x = 1 (always inside its constraint set) the left side equals
    (1 - 1/(1+beta)^2) < 4/5 of the reference value for every beta < 1.  The
    measured infimum is ~0.449x the reference at beta = 1/2.  The failure is
    reported honestly; the rate bound it feeds is certified directly by the
    spectral-margin suite, which passes.
    """
    betas = np.linspace(0.5, 0.995, beta_count)
    xs = np.concatenate([[1.0], np.geomspace(1.0 + 1e-6, 1000.0, x_count - 1)])
    B, X = np.meshgrid(betas, xs, indexing="ij")
    ratio = ((1.0 - B * X) / (1.0 + B * X)) ** 2
    f = (1.0 + 1.0 / (1.0 + B * X) ** 2) * ratio
    g = (1.0 - 1.0 / (1.0 + B * X) ** 2) * ratio
    base = ((1.0 - B) / (1.0 + B)) ** 2
    cons = 1.0 - 1.0 / X
    records = []

    set1 = cons <= f
    records.append(_worst("helper-f-upper", f"grid={beta_count}x{x_count}",
                          np.where(set1, f, -np.inf), 1.5 * base, slack=0.0))
    f_at_1 = (1.0 + 1.0 / (1.0 + B) ** 2) * base
    records.append(_worst("helper-f-max-at-one", f"grid={beta_count}x{x_count}",
                          np.where(set1, f, -np.inf), f_at_1, slack=1e-12))

    # equality frontier: root of 1 - 1/x = ratio(x) per beta, value below base
    worst = (np.inf, 0.0, 0.0)
    ok = True
    for b in betas:
        r = lambda x: ((1.0 - b * x) / (1.0 + b * x)) ** 2 - (1.0 - 1.0 / x)
        lo, hi = 1.0, 1.0
        for cand in np.geomspace(1.001, 1000.0, 400):
            if r(cand) < 0:
                hi = cand
                break
            lo = cand
        else:
            ok = False
            continue
        x_star = brentq(r, lo, hi, xtol=1e-14)
        val = ((1.0 - b * x_star) / (1.0 + b * x_star)) ** 2
        bb = ((1.0 - b) / (1.0 + b)) ** 2
        if bb - val < worst[0]:
            worst = (bb - val, val, bb)
        ok &= val <= bb + 1e-12
    records.append(CheckRecord("helper-frontier-value", f"betas={beta_count}",
                               worst[1], worst[2], worst[0], bool(ok)))

    set3 = cons < ratio
    records.append(_worst("helper-g-lower",
                          f"grid={beta_count}x{x_count} stated-constant=4/5 known-refuted-at-x=1",
                          np.where(set3, 0.8 * base, -np.inf), g, slack=0.0))
    set4 = cons < g
    records.append(_worst("helper-ratio-lower", f"grid={beta_count}x{x_count}",
                          np.where(set4, 0.5 * base, -np.inf), ratio, slack=0.0))
    return records


# ---------------------------------------------------------------------------
# envelope-vs-simulation checks


def check_bias_envelope_simulation(phi: float = 4.0, omega: float = 1.0,
                                   spectrum=(0.5, 0.2, 0.05, 1e-3), horizon: int = 500
                                   ) -> list[CheckRecord]:
    """Noise-free two-step recursion stays below the expected-iterate envelope."""
    lam = np.asarray(spectrum, dtype=np.float64)
    inputs = TheoryBoundInputs(spectrum=lam, minibatch=1, phi=phi, omega=omega,
                               horizon=horizon, analysis_constant=1.0)
    beta = inputs.beta
    r = lam.size
    z_prev = np.zeros(r)
    z = np.full(r, 1.0 / math.sqrt(r))   # unit Delta_0 spread across directions
    ok = True
    worst = (np.inf, 0.0, 0.0)
    for i in range(1, horizon + 2):
        z, z_prev = ((1.0 + beta) - (1.0 + beta * omega) * lam) * z \
            - beta * (1.0 - omega * lam) * z_prev, z
        if i < 2:
            continue
        sq = float(z @ z)                # z is E Delta_i; envelope index t = i - 1
        env = theory.bias_envelope(inputs, i - 1)
        if env - sq < worst[0]:
            worst = (env - sq, sq, env)
        ok &= sq <= env
    return [CheckRecord("bias-envelope-simulation",
                        f"phi={phi} omega={omega} r={r} t<={horizon}",
                        worst[1], worst[2], worst[0], bool(ok))]


def check_l2_envelope_simulation(seed: int = 0, phi: float = 2.5, omega: float = 1.0,
                                 m: int = 32, trials: int = 300, horizon: int = 100,
                                 n: int = 8) -> list[CheckRecord]:
    """Monte Carlo second moment stays below the t^3-envelope (relaxed
    analysis constant, so the certificate is exploratory, not formal)."""
    rng = substream(seed, 0x12E)
    lam_r = 1.0 / (9.0 * phi * phi) * 0.9
    lam = np.sort(np.concatenate([rng.uniform(lam_r, 1.0, 3), [lam_r]]))[::-1]
    V, _ = np.linalg.qr(rng.standard_normal((n, n)))
    rates = np.concatenate([lam, np.zeros(n - lam.size)])
    sampler = eigenbasis_bernoulli_sampler(V, rates)
    inputs = TheoryBoundInputs(spectrum=lam, minibatch=m, phi=phi, omega=omega,
                               horizon=horizon, analysis_constant=1.0)
    delta0 = V[:, : lam.size] @ np.full(lam.size, 1.0 / math.sqrt(lam.size))
    config = MomentumConfig(alpha=1.0, beta=inputs.beta, omega=omega, minibatch=m)
    stats = monte_carlo_moments(sampler, config, delta0, horizon, trials, master_seed=seed)
    ok = True
    worst = (np.inf, 0.0, 0.0)
    for t in range(1, horizon + 1):
        env = theory.l2_envelope(inputs, t)
        if env - stats.mean[t] < worst[0]:
            worst = (env - stats.mean[t], float(stats.mean[t]), env)
        ok &= stats.mean[t] <= env
    return [CheckRecord("l2-envelope-simulation",
                        f"seed={seed} phi={phi} m={m} trials={trials} certified=false",
                        worst[1], worst[2], worst[0], bool(ok))]


# ---------------------------------------------------------------------------
# suite registry


def _suite_structural(seed: int = 0) -> list[CheckRecord]:
    records = [verify_block_diagonalization([0.5, 0.2, 0.01], 0.5, 1.0),
               verify_block_diagonalization([0.9, 0.4, 0.1, 0.03, 1e-3], 0.75, 0.0)]
    records.extend(verify_helper_inequalities())
    return records


SUITES = {
    "eigenvalues": lambda seed=0: check_eigenvalue_law(seed),
    "schur": lambda seed=0: check_schur_certification(seed),
    "norms": lambda seed=0: check_power_norm_bounds(seed),
    "rho": lambda seed=0: check_rho_envelope(seed),
    "pt": lambda seed=0: check_pt_envelope(seed),
    "variance": lambda seed=0: check_minibatch_variance(seed),
    "base-rate": lambda seed=0: check_base_rate(seed),
    "structural": lambda seed=0: _suite_structural(seed),
    "bias-sim": lambda seed=0: check_bias_envelope_simulation(),
    "l2-sim": lambda seed=0: check_l2_envelope_simulation(seed),
}


def run_suites(names=None, seed: int = 0) -> list[CheckRecord]:
    chosen = list(SUITES) if not names or names == ["all"] else names
    records = []
    for name in chosen:
        if name not in SUITES:
            raise KeyError(f"unknown suite {name!r}; available: {sorted(SUITES)}")
        records.extend(SUITES[name](seed))
    return records
