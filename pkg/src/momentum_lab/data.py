"""Dataset ingestion, standardization, kernel construction and synthetic
problems for the experiment harness.

CSV files are the only external data source (no network fetching); the
synthetic generator produces SPD systems with a log-uniform spectrum hitting
a requested coordinate-descent condition number, which is the desk-scale
stand-in for the kernel benchmarks.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .solvers import KIND_PSD, LinearProblem

__all__ = [
    "DatasetSpec",
    "KernelSpec",
    "IngestReport",
    "ingest_csv",
    "standardize",
    "build_kernel",
    "synth_problem",
    "save_problem_npz",
    "load_problem_npz",
]


@dataclass
class DatasetSpec:
    """Where the data comes from and how much of it to use."""

    path: str | None = None
    synth: dict | None = None
    target_column: str | int | None = None
    n_subsample: int = 2048
    standardize: bool = True

    def __post_init__(self):
        if (self.path is None) == (self.synth is None):
            raise ValueError("specify exactly one of path or synth")


@dataclass
class KernelSpec:
    gamma: float = 0.1
    ridge_lambda: float = 0.0

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.ridge_lambda < 0:
            raise ValueError("ridge lambda must be >= 0")


@dataclass
class IngestReport:
    rows_read: int = 0
    rows_dropped: int = 0
    rows_used: int = 0
    subsampled: bool = False
    flags: list[str] = field(default_factory=list)


def ingest_csv(path, target_column, n_subsample: int, rng: np.random.Generator
               ) -> tuple[np.ndarray, np.ndarray, IngestReport]:
    """Read a numeric CSV with header, drop bad rows, subsample n rows.

    Rows containing non-numeric or missing cells are dropped and counted.
    Subsampling is without replacement from the seeded stream; if fewer rows
    than requested survive, all of them are used and the report is flagged.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        rows = []
        dropped = 0
        width = len(header)
        for raw in reader:
            if not raw:
                continue
            if len(raw) != width:
                dropped += 1
                continue
            try:
                vals = [float(cell) for cell in raw]
            except ValueError:
                dropped += 1
                continue
            if any(not np.isfinite(v) for v in vals):
                dropped += 1
                continue
            rows.append(vals)
    report = IngestReport(rows_read=len(rows) + dropped, rows_dropped=dropped)
    if not rows:
        raise ValueError(f"{path}: no numeric rows survived ingestion")
    data = np.asarray(rows, dtype=np.float64)

    if target_column is None:
        t_idx = width - 1
        report.flags.append("target-defaulted-to-last-column")
    elif isinstance(target_column, int):
        t_idx = target_column
    else:
        try:
            t_idx = header.index(target_column)
        except ValueError:
            raise ValueError(f"target column {target_column!r} not in header {header}") from None
    if not 0 <= t_idx < width:
        raise ValueError(f"target column index {t_idx} out of range")

    if data.shape[0] > n_subsample:
        keep = np.sort(rng.choice(data.shape[0], size=n_subsample, replace=False))
        data = data[keep]
        report.subsampled = True
    elif data.shape[0] < n_subsample:
        report.flags.append("fewer-rows-than-requested")
    report.rows_used = data.shape[0]
    y = data[:, t_idx].copy()
    X = np.delete(data, t_idx, axis=1)
    return X, y, report


def standardize(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Center and scale each column to mean 0, population std 1.

    Zero-variance columns are mapped to all-zeros; their indices come back
    as the second return value so callers can flag them.
    """
    X = np.asarray(X, dtype=np.float64)
    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    zero_var = np.flatnonzero(sd == 0)
    scale = np.where(sd == 0, 1.0, sd)
    Xs = (X - mu) / scale
    if zero_var.size:
        Xs[:, zero_var] = 0.0
    return Xs, zero_var


def build_kernel(X_scaled: np.ndarray, gamma: float = 0.1, ridge_lambda: float = 0.0
                 ) -> np.ndarray:
    """RBF kernel exp(-gamma ||x_i - x_j||^2) plus the ridge shift.

    The Gram trick is symmetrized and the kernel diagonal is pinned to 1
    exactly before adding ridge_lambda * I.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    X = np.asarray(X_scaled, dtype=np.float64)
    sq = np.einsum("ij,ij->i", X, X)
    D = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
    np.maximum(D, 0.0, out=D)
    K = np.exp(-gamma * D)
    K = 0.5 * (K + K.T)
    np.fill_diagonal(K, 1.0)
    if ridge_lambda:
        K = K + ridge_lambda * np.eye(K.shape[0])
    return K


def synth_problem(n: int, kappa: float, seed: int) -> LinearProblem:
    """SPD system with log-uniform spectrum hitting the requested kappa.

    kappa here is the coordinate-descent condition number tr(K) * ||K^-1||,
    which is at least n for any SPD matrix: a request below that floor falls
    back to the identity spectrum (kappa = n) and flags the problem.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if kappa < 1:
        raise ValueError("kappa must be >= 1")
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0x5E,)))
    flags = []
    exponents = rng.random(n)
    exponents[0], exponents[1] = 0.0, 1.0   # pins lam_min = 1, lam_max = R
    if kappa <= n:
        lam = np.ones(n)
        if kappa < n:
            flags.append("kappa-floor: tr(K)||K^-1|| >= n for every SPD K; using identity spectrum")
    else:
        ratio = brentq(lambda R: np.sum(R ** exponents) - kappa, 1.0 + 1e-13, 1e14)
        lam = ratio ** exponents
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    K = (Q * lam) @ Q.T
    K = 0.5 * (K + K.T)
    w_star = rng.standard_normal(n)
    w_star /= np.linalg.norm(w_star)
    y = K @ w_star
    spectrum = np.sort(lam)[::-1]
    meta = {
        "spectrum": spectrum,
        "kappa_cd": float(lam.sum() / lam.min()),
        "seed": seed,
        "flags": flags,
    }
    return LinearProblem(kind=KIND_PSD, matrix=K, rhs=y, w_star=w_star,
                         name=f"synth-n{n}-kappa{kappa:g}-seed{seed}", meta=meta)


def save_problem_npz(problem: LinearProblem, path) -> None:
    np.savez_compressed(
        path,
        kind=problem.kind,
        matrix=problem.matrix,
        rhs=problem.rhs,
        w_star=problem.w_star if problem.w_star is not None else np.array([]),
        name=problem.name,
        kappa_cd=problem.meta.get("kappa_cd", np.nan),
    )


def load_problem_npz(path) -> LinearProblem:
    with np.load(path, allow_pickle=False) as z:
        w_star = z["w_star"]
        meta = {}
        if "kappa_cd" in z and np.isfinite(float(z["kappa_cd"])):
            meta["kappa_cd"] = float(z["kappa_cd"])
        return LinearProblem(
            kind=str(z["kind"]),
            matrix=z["matrix"],
            rhs=z["rhs"],
            w_star=w_star if w_star.size else None,
            name=str(z["name"]),
            meta=meta,
        )
