"""momentum-lab: mini-batch randomized Kaczmarz / block coordinate descent
with classical momentum, plus numerical certification of the spectral bounds
that govern their convergence."""

__version__ = "0.1.0"

from .linalg import SpectralDecomposition, pinv, spectral_norm, sym_eig
from .process import (
    MomentumConfig,
    ProcessState,
    TrajectoryStats,
    contraction_step,
    momentum_step,
    monte_carlo_moments,
    run_process,
)
from .samplers import (
    CoordinateDescentSampler,
    DeterministicSampler,
    ExplicitSampler,
    KaczmarzSampler,
    RateSampler,
    eigenbasis_bernoulli_sampler,
    minibatch_draw,
)
from .schemes import BlockScheme
from .solvers import (
    LinearProblem,
    SolverRunResult,
    beta_schedule,
    cd_direction,
    condition_number,
    minibatch_direction,
    momentum_solve,
    practical_beta,
    rk_direction,
)
from .theory import (
    TheoryBoundInputs,
    TransitionBlock,
    bias_envelope,
    block_power_norm,
    build_block,
    l2_envelope,
    pt_recursion,
    radius_bound,
    rho_envelope,
    schur_form,
    second_moment_block_bound,
    tct_norm_bound,
)
from .adaptive import AdaptiveConfig, AdaptiveRunResult, adaptive_solve, probe_residual
from .data import build_kernel, ingest_csv, standardize, synth_problem
from .estimators import AdaptiveMomentumCD, MomentumCoordinateDescent, MomentumKaczmarz
from .sweep import SweepRecord, Variant, run_sweep
from .verify import run_suites, verify_block_diagonalization, verify_helper_inequalities

__all__ = [name for name in dir() if not name.startswith("_")]
