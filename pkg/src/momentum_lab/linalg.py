"""Dense linear algebra kernels used throughout the library.

Symmetric eigendecomposition, Moore-Penrose pseudoinverse and spectral norms
are thin, contract-enforcing wrappers over LAPACK (via numpy).  The 2x2
helpers at the bottom are exact closed forms used heavily by the transition
block analysis, where millions of tiny norms are needed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .validation import as_matrix, check_symmetric

__all__ = [
    "SpectralDecomposition",
    "sym_eig",
    "pinv",
    "spectral_norm",
    "norm2x2",
    "norms2x2",
]

#: eigenvalues above RANK_TOL * lambda_max count toward the rank
RANK_TOL = 1e-10

#: negative eigenvalues of a nominally psd matrix no worse than -PSD_CLAMP_TOL
#: are treated as round-off and clamped to zero
PSD_CLAMP_TOL = 1e-12


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigendecomposition ``M = V diag(eigenvalues) V.T`` of a symmetric matrix.

    ``eigenvalues`` are sorted non-increasing, the columns of ``basis`` are
    the matching orthonormal eigenvectors, and ``rank`` counts eigenvalues
    above the rank tolerance.
    """

    eigenvalues: np.ndarray
    basis: np.ndarray
    rank: int

    def reconstruct(self) -> np.ndarray:
        return (self.basis * self.eigenvalues) @ self.basis.T

    def range_basis(self) -> np.ndarray:
        """Orthonormal basis of the numerical range (top ``rank`` columns)."""
        return self.basis[:, : self.rank]

    @property
    def lambda_min_pos(self) -> float:
        """Smallest eigenvalue counted in the rank (0.0 for the zero matrix)."""
        if self.rank == 0:
            return 0.0
        return float(self.eigenvalues[self.rank - 1])


def sym_eig(
    M,
    *,
    symmetry_tol: float = 1e-10,
    rank_tol: float = RANK_TOL,
    psd: bool = False,
    clamp_tol: float = PSD_CLAMP_TOL,
) -> SpectralDecomposition:
    """Eigendecomposition of a symmetric matrix, sorted descending.

    Parameters
    ----------
    M : array_like
        Symmetric matrix (validated entrywise to ``symmetry_tol``).
    psd : bool
        When the caller asserts positive semidefiniteness, eigenvalues in
        ``[-clamp_tol, 0)`` are clamped to zero; anything more negative is
        treated as a caller bug and rejected.
    """
    A = check_symmetric(M, tol=symmetry_tol)
    A = 0.5 * (A + A.T)
    vals, vecs = np.linalg.eigh(A)
    vals, vecs = vals[::-1].copy(), vecs[:, ::-1].copy()
    if psd:
        neg = vals < 0
        if np.any(vals < -clamp_tol):
            worst = float(vals.min())
            raise ValueError(
                f"matrix declared psd has eigenvalue {worst:.3e} below -{clamp_tol:.1e}"
            )
        vals[neg] = 0.0
    lam_max = float(np.abs(vals).max()) if vals.size else 0.0
    rank = int(np.sum(vals > rank_tol * lam_max)) if lam_max > 0 else 0
    return SpectralDecomposition(eigenvalues=vals, basis=vecs, rank=rank)


def pinv(M, tol: float = 1e-10) -> np.ndarray:
    """Moore-Penrose pseudoinverse, zeroing singular values below ``tol * sigma_max``."""
    A = as_matrix(M)
    return np.linalg.pinv(A, rcond=tol)


def spectral_norm(M) -> float:
    """Largest singular value."""
    A = as_matrix(M)
    return float(np.linalg.norm(A, 2))


def sqrt_psd(M, *, symmetry_tol: float = 1e-10) -> np.ndarray:
    """Symmetric square root of a psd matrix."""
    dec = sym_eig(M, symmetry_tol=symmetry_tol, psd=True)
    return (dec.basis * np.sqrt(dec.eigenvalues)) @ dec.basis.T


def norm2x2(M: np.ndarray) -> float:
    """Exact spectral norm of a single real or complex 2x2 matrix."""
    return norms2x2(M[None, :, :])[0] if M.ndim == 2 else float("nan")


def norms2x2(M: np.ndarray) -> np.ndarray:
    """Exact spectral norms of a stack of 2x2 matrices, shape (..., 2, 2).

    Uses the closed form sigma_max^2 = (f + sqrt(f^2 - 4 |det|^2)) / 2 with
    f the squared Frobenius norm; the discriminant is clamped at zero to
    absorb round-off when the singular values coincide.
    """
    f = np.sum(np.abs(M) ** 2, axis=(-2, -1))
    det = M[..., 0, 0] * M[..., 1, 1] - M[..., 0, 1] * M[..., 1, 0]
    d2 = np.abs(det) ** 2
    disc = np.maximum(f * f - 4.0 * d2, 0.0)
    return np.sqrt((f + np.sqrt(disc)) / 2.0)
