"""Dense real-matrix kernels used throughout the package.

Thin wrappers over numpy/scipy that add the shape checks, tolerances and
error types the rest of the package relies on.  Matrices are plain
``numpy.ndarray`` objects; ``vec`` is column stacking.
"""

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from .errors import (
    DefinitenessError,
    NumericalError,
    ShapeError,
    SingularMatrixError,
    SizeLimitError,
)

# Largest Kronecker product accepted, in entries (a 2500 x 2500 matrix, i.e. n = 50).
MAX_KRON_ENTRIES = 2500 * 2500
SYMMETRY_RTOL = 1e-9
PSD_RTOL = 1e-10
SINGULAR_RCOND = 1e-14


def as_matrix(M, name="matrix"):
    """Return ``M`` as a finite 2-D float array."""
    arr = np.array(M, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2 or arr.size == 0:
        raise ShapeError(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ShapeError(f"{name} has non-finite entries")
    return arr


def _require_square(M, name):
    if M.shape[0] != M.shape[1]:
        raise ShapeError(f"{name} must be square, got shape {M.shape}")


def kron(A, B):
    A = as_matrix(A, "A")
    B = as_matrix(B, "B")
    entries = A.size * B.size
    if entries > MAX_KRON_ENTRIES:
        raise SizeLimitError(
            f"Kronecker product of {A.shape} and {B.shape} has {entries} entries "
            f"(limit {MAX_KRON_ENTRIES})"
        )
    return np.kron(A, B)


def vec_stack(M):
    """Stack the columns of ``M`` into an (rows*cols, 1) column vector."""
    M = as_matrix(M)
    return M.reshape(-1, 1, order="F")


def unvec(v, rows, cols):
    """Inverse of :func:`vec_stack`."""
    return np.asarray(v, dtype=float).reshape(rows, cols, order="F")


def factorized(A):
    """LU-factor ``A`` once and return a solver ``b -> A^{-1} b``.

    Raises :class:`SingularMatrixError` (carrying the 1-norm condition
    estimate) when the reciprocal condition number is below
    ``SINGULAR_RCOND``.
    """
    A = as_matrix(A, "A")
    _require_square(A, "A")
    anorm = np.linalg.norm(A, 1)
    if anorm == 0.0:
        raise SingularMatrixError("matrix is identically zero", cond=np.inf)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            lu, piv = scipy.linalg.lu_factor(A, check_finite=False)
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise SingularMatrixError(str(exc), cond=np.inf) from exc
    rcond = _lu_rcond(lu, anorm)
    if not rcond > SINGULAR_RCOND:
        cond = np.inf if rcond == 0 else 1.0 / rcond
        raise SingularMatrixError(f"matrix is singular to working precision (cond ~ {cond:.3g})", cond=cond)
    size = A.shape[0]

    def solve(b):
        b_arr = np.asarray(b, dtype=float)
        vector = b_arr.ndim == 1
        b2 = b_arr.reshape(-1, 1) if vector else b_arr
        if b2.shape[0] != size:
            raise ShapeError(f"right-hand side has {b2.shape[0]} rows, expected {size}")
        x = scipy.linalg.lu_solve((lu, piv), b2, check_finite=False)
        return x.ravel() if vector else x

    return solve


def solve_linear(A, b):
    """Solve ``A x = b`` using an LU factorization with partial pivoting."""
    return factorized(A)(b)


def _lu_rcond(lu, anorm):
    gecon = scipy.linalg.get_lapack_funcs("gecon", (lu,))
    rcond, info = gecon(lu, anorm, norm="1")
    if info != 0:
        return 0.0
    return float(rcond)


@dataclass(frozen=True)
class SymEigResult:
    eigenvalues: np.ndarray
    eigenvectors: Optional[np.ndarray] = None

    @property
    def min(self):
        return float(self.eigenvalues[0])

    @property
    def max(self):
        return float(self.eigenvalues[-1])


def symmetrize(M, name="matrix"):
    """Check near-symmetry (relative to the max-abs entry) and return (M + M^T)/2."""
    M = as_matrix(M, name)
    _require_square(M, name)
    scale = np.max(np.abs(M))
    asym = np.max(np.abs(M - M.T))
    if asym > SYMMETRY_RTOL * max(scale, 1e-300) and asym > 0:
        raise ShapeError(f"{name} is not symmetric (max asymmetry {asym:.3g}, scale {scale:.3g})")
    return 0.5 * (M + M.T)


def sym_eig(M, vectors=True):
    S = symmetrize(M)
    if vectors:
        w, V = np.linalg.eigh(S)
        return SymEigResult(w, V)
    return SymEigResult(np.linalg.eigvalsh(S))


def lambda_min(M):
    return sym_eig(M, vectors=False).min


def lambda_max(M):
    return sym_eig(M, vectors=False).max


def spectral_radius(M):
    M = as_matrix(M)
    _require_square(M, "matrix")
    try:
        eigs = np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigenvalue iteration failed: {exc}") from exc
    return float(np.max(np.abs(eigs)))


def spectral_norm(M):
    M = as_matrix(M)
    if not np.any(M):
        return 0.0
    return float(np.linalg.norm(M, 2))


def is_psd(M, rtol=PSD_RTOL):
    """PSD test used everywhere: lambda_min >= -rtol * max(1, ||M||)."""
    ev = sym_eig(M, vectors=False).eigenvalues
    scale = max(1.0, float(np.max(np.abs(ev))))
    return bool(ev[0] >= -rtol * scale)


def log_det_pd(M):
    """log det of a symmetric positive definite matrix via Cholesky."""
    S = symmetrize(M)
    try:
        L = np.linalg.cholesky(S)
    except np.linalg.LinAlgError:
        pivot = float(np.linalg.eigvalsh(S)[0])
        raise DefinitenessError(
            f"matrix is not positive definite (smallest eigenvalue {pivot:.3g})", pivot=pivot
        ) from None
    d = np.diag(L)
    if np.any(d <= 0):
        raise DefinitenessError("matrix is not positive definite", pivot=float(d.min() ** 2))
    return float(2.0 * np.sum(np.log(d)))
