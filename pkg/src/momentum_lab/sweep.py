"""Sweep orchestration over (problem, solver variant, omega, m, k, seed) grids.

Each grid cell runs independently on its own derived stream and yields one
record; the CSV is written in canonical cell order with a fixed header, so a
sweep with a fixed master seed reproduces the table byte for byte (wall
clock column aside).  A JSON manifest with the configuration echo and
per-dataset condition estimates is written next to the table.
"""

from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__ as _version
from .adaptive import AdaptiveConfig, adaptive_solve
from .process import MomentumConfig, worker_count
from .rng import substream
from .schemes import BlockScheme
from .solvers import (
    LinearProblem,
    beta_schedule,
    condition_number,
    momentum_solve,
    practical_beta,
)

__all__ = ["Variant", "SweepRecord", "SWEEP_COLUMNS", "run_sweep", "write_sweep_csv",
           "write_manifest", "resolve_beta"]

SWEEP_COLUMNS = ["dataset", "solver", "omega", "m", "k", "beta", "iterations",
                 "rows_sampled", "final_residual", "converged", "seed", "wall_ms"]

VARIANT_TAGS = ("cd", "cd-nag", "cd-hbm", "cdm-omega", "cd-nag-adaptive")


@dataclass(frozen=True)
class Variant:
    """Solver variant tag plus the momentum-gradient weight it implies."""

    tag: str
    omega: float = 1.0

    def __post_init__(self):
        if self.tag not in VARIANT_TAGS:
            raise ValueError(f"unknown variant {self.tag!r}, expected one of {VARIANT_TAGS}")

    def effective_omega(self) -> float:
        if self.tag == "cd":
            return 0.0
        if self.tag == "cd-hbm":
            return 0.0
        if self.tag in ("cd-nag", "cd-nag-adaptive"):
            return 1.0
        return self.omega


@dataclass
class SweepRecord:
    dataset: str
    solver: str
    omega: float
    m: int
    k: int
    beta: float
    iterations: int
    rows_sampled: int
    final_residual: float
    converged: bool
    seed: int
    wall_ms: float

    def row(self) -> list:
        return [self.dataset, self.solver, repr(self.omega), self.m, self.k,
                repr(self.beta), self.iterations, self.rows_sampled,
                repr(self.final_residual), str(self.converged).lower(), self.seed,
                f"{self.wall_ms:.3f}"]


def resolve_beta(beta_mode, m: int, kappa_fn) -> float:
    """Map a beta_mode config (practical | schedule | fixed) to a value.

    ``kappa_fn`` lazily supplies the condition number for the schedule mode.
    """
    if beta_mode in (None, "practical"):
        return practical_beta(m)
    if isinstance(beta_mode, dict):
        if "fixed" in beta_mode:
            return float(beta_mode["fixed"]["value"] if isinstance(beta_mode["fixed"], dict)
                         else beta_mode["fixed"])
        if "schedule" in beta_mode:
            sched = beta_mode["schedule"]
            return beta_schedule(m, kappa_fn(), float(sched["c1"]), float(sched["c2"]))
        if beta_mode.get("mode") == "practical":
            return practical_beta(m)
        if beta_mode.get("mode") == "fixed":
            return float(beta_mode["value"])
        if beta_mode.get("mode") == "schedule":
            return beta_schedule(m, kappa_fn(), float(beta_mode["c1"]), float(beta_mode["c2"]))
    raise ValueError(f"unrecognized beta_mode {beta_mode!r}")


def run_cell(problem: LinearProblem, variant: Variant, m: int, k: int, seed: int,
             seed_key: tuple[int, ...], beta_mode, tolerance: float, max_iters: int,
             kappa_fn, adaptive_overrides: dict | None = None) -> SweepRecord:
    scheme = BlockScheme("uniform", k)
    omega = variant.effective_omega()
    started = time.perf_counter()
    if variant.tag == "cd-nag-adaptive":
        overrides = dict(adaptive_overrides or {})
        aconf = AdaptiveConfig(minibatch=m, max_iters=max_iters, **overrides)
        out = adaptive_solve(problem, scheme, aconf, tolerance, seed, seed_key=seed_key)
        beta = out.selected_beta
        iterations = out.total_steps
        rows = out.rows_sampled
        final_res = out.final_residual
        converged = out.converged
    else:
        beta = 0.0 if variant.tag == "cd" else resolve_beta(beta_mode, m, kappa_fn)
        config = MomentumConfig(alpha=1.0, beta=beta, omega=omega, minibatch=m)
        rng = substream(seed, *seed_key)
        res = momentum_solve(problem, scheme, config, tolerance, max_iters, rng)
        iterations = res.iterations
        rows = res.rows_sampled
        final_res = res.final_residual
        converged = res.converged
    wall_ms = (time.perf_counter() - started) * 1e3
    return SweepRecord(
        dataset=problem.name or "problem",
        solver=variant.tag,
        omega=omega,
        m=m,
        k=k,
        beta=beta,
        iterations=iterations,
        rows_sampled=rows,
        final_residual=final_res,
        converged=converged,
        seed=seed,
        wall_ms=wall_ms,
    )


def run_sweep(problems, variants, m_grid, k_grid, seeds, *, beta_mode="practical",
              tolerance: float = 1e-7, max_iters: int = 200_000, output_path=None,
              threads: int | None = None, adaptive_overrides: dict | None = None,
              estimate_kappa: bool = True, manifest_extra: dict | None = None
              ) -> list[SweepRecord]:
    """One record per (problem, variant, m, k, seed) cell, in canonical order."""
    if not (list(m_grid) and list(k_grid) and list(seeds) and list(variants) and list(problems)):
        raise ValueError("all sweep grids must be non-empty")
    kappa_cache: dict[tuple[int, int], float] = {}

    def kappa_for(pi: int, k: int):
        def compute() -> float:
            key = (pi, k)
            if key not in kappa_cache:
                est = condition_number(problems[pi], BlockScheme("uniform", k))
                kappa_cache[key] = est.kappa
            return kappa_cache[key]
        return compute

    cells = []
    for pi, problem in enumerate(problems):
        for vi, variant in enumerate(variants):
            for mi, m in enumerate(m_grid):
                for ki, k in enumerate(k_grid):
                    for seed in seeds:
                        cells.append((pi, vi, mi, ki, seed, problem, variant, m, k))

    def execute(cell):
        pi, vi, mi, ki, seed, problem, variant, m, k = cell
        return run_cell(problem, variant, m, k, seed, (pi, vi, mi, ki), beta_mode,
                        tolerance, max_iters, kappa_for(pi, k), adaptive_overrides)

    workers = min(worker_count(threads), len(cells))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(execute, cells))
    else:
        records = [execute(c) for c in cells]

    if output_path is not None:
        write_sweep_csv(output_path, records)
        manifest = {
            "version": _version,
            "tolerance": tolerance,
            "max_iters": max_iters,
            "beta_mode": beta_mode if not isinstance(beta_mode, dict) else beta_mode,
            "m_grid": list(m_grid),
            "k_grid": list(k_grid),
            "seeds": list(seeds),
            "variants": [{"tag": v.tag, "omega": v.omega} for v in variants],
            "residual_metric": "relative residual ||Mw - y|| / ||y|| (assumed; see run notes)",
            "datasets": {},
        }
        if manifest_extra:
            manifest.update(manifest_extra)
        for pi, problem in enumerate(problems):
            entry: dict = {"n": problem.n_rows, "kind": problem.kind}
            if "kappa_cd" in problem.meta:
                entry["kappa_cd"] = problem.meta["kappa_cd"]
            elif estimate_kappa and problem.kind == "psd":
                est = condition_number(problem, BlockScheme("coord-weighted", 1))
                entry["kappa_cd"] = est.kappa
            manifest["datasets"][problem.name or f"problem-{pi}"] = entry
        write_manifest(_manifest_path(output_path), manifest)
    return records


def _manifest_path(output_path) -> str:
    path = str(output_path)
    return (path[:-4] if path.endswith(".csv") else path) + ".manifest.json"


def write_sweep_csv(path, records: list[SweepRecord]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_COLUMNS)
        for rec in records:
            writer.writerow(rec.row())
            fh.flush()


def write_manifest(path, manifest: dict) -> None:
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj)}")
