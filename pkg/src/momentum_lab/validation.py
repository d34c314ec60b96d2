"""Input validation helpers shared across the library.

These mirror the defensive checks scikit-learn style estimators perform on
entry: coerce to float arrays, insist on finiteness, and give actionable
diagnostics (the worst offending entry) instead of a bare ``ValueError``.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "as_matrix",
    "as_vector",
    "check_square",
    "check_symmetric",
    "symmetry_defect",
]


def as_matrix(M, name: str = "matrix") -> np.ndarray:
    """Coerce to a 2-D float64 array with finite entries."""
    A = np.asarray(M, dtype=np.float64)
    if A.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {A.shape}")
    if A.shape[0] < 1 or A.shape[1] < 1:
        raise ValueError(f"{name} must have at least one row and column, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        bad = np.argwhere(~np.isfinite(A))[0]
        raise ValueError(f"{name} has a non-finite entry at {tuple(bad)}")
    return A


def as_vector(v, name: str = "vector") -> np.ndarray:
    """Coerce to a 1-D float64 array with finite entries."""
    x = np.asarray(v, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(x)):
        bad = int(np.argwhere(~np.isfinite(x))[0])
        raise ValueError(f"{name} has a non-finite entry at index {bad}")
    return x


def check_square(M: np.ndarray, name: str = "matrix") -> np.ndarray:
    A = as_matrix(M, name)
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"{name} must be square, got shape {A.shape}")
    return A


def symmetry_defect(M: np.ndarray) -> tuple[float, tuple[int, int]]:
    """Largest absolute entry of ``M - M.T`` and its position."""
    D = np.abs(M - M.T)
    ij = np.unravel_index(int(np.argmax(D)), D.shape)
    return float(D[ij]), (int(ij[0]), int(ij[1]))


def check_symmetric(M, tol: float = 1e-10, name: str = "matrix") -> np.ndarray:
    """Validate symmetry within ``tol`` per entry; report the worst entry."""
    A = check_square(M, name)
    defect, (i, j) = symmetry_defect(A)
    if defect > tol:
        raise ValueError(
            f"{name} is not symmetric: |M[{i},{j}] - M[{j},{i}]| = {defect:.3e} "
            f"exceeds tolerance {tol:.1e}"
        )
    return A
