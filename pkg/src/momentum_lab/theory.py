"""Transition-block analysis behind the momentum convergence bounds.

Each eigendirection of the average rate evolves under a real 2x2 block

    T = [[(1+beta) - (1+beta*omega)*lam,  -beta*(1-omega*lam)],
         [1,                               0]]

whose eigenvalue pair, Schur triangularization and power norms drive every
bound in the library: the spectral-radius law per kind (complex / equal /
distinct), the (3k+2)|gamma1|^(k-1) power-norm bound, the 11 |gamma1|^(2k)
h^2(k) bound on ||(T^t)^k T^k||, the p_t recursion for the second moment of
the random transition product, and the rate envelopes built from them.
Everything here is deterministic; the Monte Carlo counterparts live in
``momentum_lab.verify``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .linalg import norms2x2

__all__ = [
    "TransitionBlock",
    "SchurForm",
    "TheoryBoundInputs",
    "TheoryError",
    "build_block",
    "block_matrix",
    "radius_bound",
    "schur_form",
    "block_power_norm",
    "power_norms",
    "tct_norm_bound",
    "ell",
    "pt_recursion",
    "rho_envelope",
    "bias_envelope",
    "l2_envelope",
    "second_moment_block_bound",
]

#: default analysis constant of the second-moment envelope (certificate mode)
ANALYSIS_C = 76800.0

#: |discriminant| below this counts as a repeated eigenvalue
EQUAL_TOL = 1e-12

KIND_COMPLEX = "complex"
KIND_EQUAL = "real-equal"
KIND_DISTINCT = "real-distinct"


class TheoryError(ValueError):
    """A bound was requested outside its hypothesis, or a certified
    inequality failed numerically (which would falsify the analysis)."""


@dataclass(frozen=True)
class TransitionBlock:
    """One 2x2 transition block with its exact eigenvalue pair."""

    lam: float
    beta: float
    omega: float
    matrix: np.ndarray
    eig1: complex  # |eig1| >= |eig2|
    eig2: complex
    kind: str

    @property
    def spectral_radius(self) -> float:
        return abs(self.eig1)

    @property
    def eig_gap(self) -> float:
        return abs(self.eig1 - self.eig2)


@dataclass(frozen=True)
class SchurForm:
    """Unitary triangularization U^H T U = [[eig1, x], [0, eig2]]."""

    unitary: np.ndarray
    upper: np.ndarray

    @property
    def corner(self) -> complex:
        return complex(self.upper[0, 1])


def block_matrix(lam: float, beta: float, omega: float) -> np.ndarray:
    return np.array([
        [(1.0 + beta) - (1.0 + beta * omega) * lam, -beta * (1.0 - omega * lam)],
        [1.0, 0.0],
    ])


def build_block(lam: float, beta: float, omega: float) -> TransitionBlock:
    """Assemble the block for one eigenvalue and solve its characteristic
    quadratic gamma^2 - trace*gamma + det = 0 exactly."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lam must be in [0, 1]")
    if beta < 0:
        raise ValueError("beta must be >= 0")
    if not 0.0 <= omega <= 1.0:
        raise ValueError("omega must be in [0, 1]")
    trace = (1.0 - lam) + beta * (1.0 - omega * lam)
    det = beta * (1.0 - omega * lam)
    disc = trace * trace - 4.0 * det
    if abs(disc) <= EQUAL_TOL:
        kind = KIND_EQUAL
        g1 = g2 = complex(trace / 2.0)
    elif disc < 0:
        kind = KIND_COMPLEX
        root = math.sqrt(-disc) / 2.0
        g1 = complex(trace / 2.0, root)
        g2 = complex(trace / 2.0, -root)
    else:
        kind = KIND_DISTINCT
        root = math.sqrt(disc) / 2.0
        a, b = trace / 2.0 + root, trace / 2.0 - root
        if abs(a) >= abs(b):
            g1, g2 = complex(a), complex(b)
        else:
            g1, g2 = complex(b), complex(a)
    return TransitionBlock(lam=lam, beta=beta, omega=omega,
                           matrix=block_matrix(lam, beta, omega),
                           eig1=g1, eig2=g2, kind=kind)


def _check_phi(block: TransitionBlock, phi: float) -> None:
    if phi < 2.0:
        raise TheoryError(f"phi >= 2 violated: phi = {phi}")
    if abs(block.beta - (1.0 - 1.0 / phi)) > 1e-12:
        raise TheoryError(f"block beta {block.beta} does not match 1 - 1/phi = {1 - 1/phi}")


def radius_bound(block: TransitionBlock, phi: float) -> float:
    """Upper bound on |eig1|^2 per kind; exact for complex and equal kinds."""
    _check_phi(block, phi)
    lam, om = block.lam, block.omega
    if block.kind in (KIND_COMPLEX, KIND_EQUAL):
        return (1.0 - 1.0 / phi) * (1.0 - om * lam)
    return ((1.0 - phi * lam / 2.0) * (1.0 - om * lam)) ** 2


def schur_form(block: TransitionBlock) -> SchurForm:
    """Explicit Schur triangularization from the leading eigenvalue."""
    g1, g2 = block.eig1, block.eig2
    scale = 1.0 / math.sqrt(1.0 + abs(g1) ** 2)
    U = scale * np.array([[g1, -1.0], [1.0, np.conj(g1)]], dtype=np.complex128)
    M = U.conj().T @ block.matrix.astype(np.complex128) @ U
    upper = np.array([[g1, M[0, 1]], [0.0, g2]], dtype=np.complex128)
    if not np.all(np.isfinite(upper)):
        raise ValueError("non-finite Schur form")
    return SchurForm(unitary=U, upper=upper)


def power_norms(block: TransitionBlock, k_max: int) -> np.ndarray:
    """Exact ||T^k|| for k = 0..k_max by repeated 2x2 multiplication."""
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    out = np.empty(k_max + 1)
    P = np.eye(2)
    T = block.matrix
    for k in range(k_max + 1):
        out[k] = norms2x2(P[None])[0]
        if k < k_max:
            P = P @ T
    return out


def block_power_norm(block: TransitionBlock, k: int) -> float:
    """Exact spectral norm of T^k."""
    return float(power_norms(block, k)[k])


def _h_factor(block: TransitionBlock, k: np.ndarray) -> np.ndarray:
    """h(k) from the ||(T^t)^k T^k|| bound; h(0) is taken as 1."""
    g1 = block.spectral_radius
    k = np.asarray(k, dtype=np.float64)
    if g1 == 0.0:
        return np.where(k == 0, 1.0, np.inf)
    ratio = k / g1
    if block.kind != KIND_EQUAL:
        gap = block.eig_gap
        ratio = np.minimum(ratio, 2.0 / gap) if gap > 0 else ratio
    return np.where(k == 0, 1.0, ratio)


def tct_norm_bound(block: TransitionBlock, k: int) -> float:
    """Bound 11 |eig1|^(2k) h^2(k) on ||(T^T)^k T^k||.

    A nilpotent block (|eig1| = 0) gets the exact norm instead, since the
    bound formula degenerates there.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    if k == 0:
        return 11.0
    g1 = block.spectral_radius
    if g1 == 0.0:
        return block_power_norm(block, k) ** 2
    h = float(_h_factor(block, np.array([k]))[0])
    return 11.0 * g1 ** (2 * k) * h * h


def ell(block: TransitionBlock, t: int) -> float:
    """ell(t) = max over 0 <= k <= t of 11 |eig1|^k h^2(k)."""
    if t < 0:
        raise ValueError("t must be >= 0")
    ks = np.arange(t + 1)
    g1 = block.spectral_radius
    if g1 == 0.0:
        return 11.0
    h = _h_factor(block, ks)
    return float(np.max(11.0 * np.power(g1, ks) * h * h))


@dataclass(frozen=True)
class TheoryBoundInputs:
    """Spectrum, batching and momentum data feeding the rate envelopes.

    ``spectrum`` is the positive part of the average-rate spectrum, sorted
    non-increasing; ``phi`` encodes the momentum via beta = 1 - 1/phi.
    ``analysis_constant`` below the certificate value 76800 marks the
    inputs as exploratory (non-certified envelopes).
    """

    spectrum: np.ndarray
    minibatch: int
    phi: float
    omega: float
    horizon: int
    analysis_constant: float = ANALYSIS_C

    def __post_init__(self):
        spec = np.asarray(self.spectrum, dtype=np.float64)
        object.__setattr__(self, "spectrum", spec)
        if spec.ndim != 1 or spec.size == 0:
            raise ValueError("spectrum must be a non-empty 1-d array")
        if np.any(spec <= 0) or np.any(spec > 1):
            raise ValueError("spectrum entries must lie in (0, 1]")
        if np.any(np.diff(spec) > 0):
            raise ValueError("spectrum must be sorted non-increasing")
        if self.phi < 2.0:
            raise TheoryError(f"phi >= 2 violated: phi = {self.phi}")
        if self.minibatch < 1:
            raise ValueError("minibatch must be >= 1")
        if not 0.0 <= self.omega <= 1.0:
            raise ValueError("omega must be in [0, 1]")
        if self.horizon < 0:
            raise ValueError("horizon must be >= 0")

    @property
    def rank(self) -> int:
        return self.spectrum.size

    @property
    def lam_r(self) -> float:
        return float(self.spectrum[-1])

    @property
    def beta(self) -> float:
        return 1.0 - 1.0 / self.phi

    @property
    def certified(self) -> bool:
        return self.analysis_constant >= ANALYSIS_C

    @cached_property
    def blocks(self) -> list[TransitionBlock]:
        return [build_block(lam, self.beta, self.omega) for lam in self.spectrum]

    @property
    def noise_rates(self) -> np.ndarray:
        """q_i = 4 lam_i (1 - lam_i) / m."""
        return 4.0 * self.spectrum * (1.0 - self.spectrum) / self.minibatch


def pt_recursion(inputs: TheoryBoundInputs) -> np.ndarray:
    """The certified sequence p_0..p_horizon bounding ||E[Sigma_t^T Sigma_t]||.

    Uses exact block power norms (not their bounds), so the envelope is the
    tightest the recursion admits: p_t = max_i ( a_i(t) + q_i * sum_{j<t}
    p_j a_i(t-1-j) ) with a_i(k) = ||T_i^k||^2 and p_0 = 1.
    """
    t_max = inputs.horizon
    q = inputs.noise_rates
    alpha = np.array([power_norms(b, t_max) ** 2 for b in inputs.blocks])
    p = np.empty(t_max + 1)
    p[0] = 1.0
    for t in range(1, t_max + 1):
        conv = alpha[:, t - 1::-1][:, :t] @ p[:t]
        p[t] = float(np.max(alpha[:, t] + q * conv))
    return p


def _hypothesis(inputs: TheoryBoundInputs, *, with_batch: bool = True) -> None:
    phi, lam_r = inputs.phi, inputs.lam_r
    if phi < 2.0:
        raise TheoryError(f"phi >= 2 violated: phi = {phi}")
    cap = 1.0 / (3.0 * math.sqrt(lam_r))
    if phi > cap:
        raise TheoryError(f"phi <= 1/(3 sqrt(lam_r)) violated: phi = {phi} > {cap}")
    if with_batch:
        batch_cap = inputs.minibatch / inputs.analysis_constant
        if phi > batch_cap:
            raise TheoryError(
                f"phi <= m/C violated: phi = {phi} > {inputs.minibatch}/{inputs.analysis_constant}"
            )


def spectral_margin(inputs: TheoryBoundInputs) -> tuple[float, float]:
    """(max_i (|gamma_i1| + q_i ell_i(t)), 1 - phi*lam_r/4), hypothesis-checked."""
    _hypothesis(inputs)
    q = inputs.noise_rates
    lhs = max(
        b.spectral_radius + qi * ell(b, inputs.horizon)
        for b, qi in zip(inputs.blocks, q)
    )
    rho = 1.0 - inputs.phi * inputs.lam_r / 4.0
    return lhs, rho


def rho_envelope(inputs: TheoryBoundInputs) -> float:
    """rho = 1 - phi*lam_r/4, with the per-direction inequality verified.

    The numeric check is what the analysis constant buys: it is enforced in
    certificate mode and skipped for relaxed (exploratory, non-certified)
    inputs, where small mini-batches make the noise terms exceed it.
    """
    if not inputs.certified:
        _hypothesis(inputs)
        return 1.0 - inputs.phi * inputs.lam_r / 4.0
    lhs, rho = spectral_margin(inputs)
    if lhs > rho:
        raise TheoryError(
            f"certified inequality max_i(|gamma_1| + q_i ell_i(t)) <= rho failed: "
            f"{lhs} > {rho}"
        )
    return rho


def bias_envelope(inputs: TheoryBoundInputs, t: int) -> float:
    """Expected-iterate envelope 17 (3t+2)^2 rho^(t-1), rho = (1 - phi*lam_r/2)(1 - omega*lam_r)."""
    if t < 1:
        raise ValueError("t must be >= 1")
    _hypothesis(inputs, with_batch=False)
    rho = (1.0 - inputs.phi * inputs.lam_r / 2.0) * (1.0 - inputs.omega * inputs.lam_r)
    return 17.0 * (3.0 * t + 2.0) ** 2 * rho ** (t - 1)


def l2_envelope(inputs: TheoryBoundInputs, t: int) -> float:
    """Second-moment envelope 170 t^3 rho^(t-1) with rho = 1 - phi*lam_r/4."""
    if t < 1:
        raise ValueError("t must be >= 1")
    rho = rho_envelope(inputs)
    return 170.0 * t ** 3 * rho ** (t - 1)


def second_moment_block_bound(spectrum, m: int, omega: float) -> np.ndarray:
    """Per-direction diagonal noise envelopes 4 * diag(lam(1-lam)/m, omega^2 lam(1-lam)/m)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    lam = np.asarray(spectrum, dtype=np.float64)
    base = lam * (1.0 - lam) / m
    out = np.zeros((lam.size, 2, 2))
    out[:, 0, 0] = 4.0 * base
    out[:, 1, 1] = 4.0 * omega * omega * base
    return out
