"""Complex dense-matrix kernel: Moore-Penrose pseudoinverse and the
predicate algebra (Hermitian / PSD / range / kernel / EP) every other
module builds on.

All operations are pure functions over immutable ndarrays.  Rank
decisions are made against ``rank_rtol * sigma_max``; callers running
iterated recursions on data with a known outer scale can pass an
absolute floor ``atol`` so that matrices which are zero relative to the
pipeline scale are not mistaken for full-rank junk.
"""

from __future__ import annotations

import numpy as np

from .errors import NumericFailure, ShapeError
from .tolerances import DEFAULT, Tolerances

__all__ = [
    "as_cmatrix",
    "opnorm",
    "herm_part",
    "mat_close",
    "pinv",
    "rank",
    "is_hermitian",
    "is_psd",
    "is_pd",
    "kernel_contained",
    "range_contained",
    "is_ep",
    "orthonormal_range_basis",
]


def as_cmatrix(M) -> np.ndarray:
    """Coerce to a 2-d complex128 array, rejecting non-finite entries."""
    A = np.asarray(M, dtype=complex)
    if A.ndim != 2:
        raise ShapeError(f"expected a 2-d array, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ShapeError("matrix contains non-finite entries")
    return A


def opnorm(M) -> float:
    """Spectral (operator) norm; 0.0 for empty matrices."""
    A = np.asarray(M)
    if A.size == 0:
        return 0.0
    return float(np.linalg.norm(A, 2))


def herm_part(M) -> np.ndarray:
    A = as_cmatrix(M)
    return (A + A.conj().T) / 2


def mat_close(X, Y, tol: Tolerances = DEFAULT) -> bool:
    """Scale-relative comparison: ||X-Y|| <= eq_atol * (1 + max(||X||,||Y||))."""
    X = as_cmatrix(X)
    Y = as_cmatrix(Y)
    if X.shape != Y.shape:
        return False
    scale = max(opnorm(X), opnorm(Y))
    return opnorm(X - Y) <= tol.eq_atol * (1 + scale)


def _svd(M):
    try:
        return np.linalg.svd(M)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK non-convergence
        raise NumericFailure(f"SVD failed to converge: {exc}") from exc


def pinv(M, tol: Tolerances = DEFAULT, *, atol: float = 0.0) -> np.ndarray:
    """Moore-Penrose pseudoinverse via SVD.

    Singular values below ``max(rank_rtol * sigma_max, atol)`` are
    treated as exact zeros.
    """
    A = as_cmatrix(M)
    if A.size == 0:
        return A.conj().T.copy()
    U, s, Vh = _svd(A)
    cutoff = max(tol.rank_rtol * (s[0] if s.size else 0.0), atol)
    r = int(np.count_nonzero(s > cutoff))
    if r == 0:
        return np.zeros((A.shape[1], A.shape[0]), dtype=complex)
    return (Vh[:r].conj().T / s[:r]) @ U[:, :r].conj().T


def rank(M, tol: Tolerances = DEFAULT, *, atol: float = 0.0) -> int:
    A = as_cmatrix(M)
    if A.size == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    cutoff = max(tol.rank_rtol * (s[0] if s.size else 0.0), atol)
    return int(np.count_nonzero(s > cutoff))


def _require_square(M) -> np.ndarray:
    A = as_cmatrix(M)
    if A.shape[0] != A.shape[1]:
        raise ShapeError(f"square matrix required, got {A.shape}")
    return A


def is_hermitian(M, tol: Tolerances = DEFAULT) -> bool:
    A = _require_square(M)
    return opnorm(A - A.conj().T) <= tol.eq_atol * (1 + opnorm(A))


def is_psd(M, tol: Tolerances = DEFAULT) -> bool:
    """Hermitian within eq_atol and eigenvalues >= -psd_atol * (1 + ||M||)."""
    A = _require_square(M)
    if A.size == 0:
        return True
    if not is_hermitian(A, tol):
        return False
    w = np.linalg.eigvalsh(herm_part(A))
    return bool(w.min() >= -tol.psd_atol * (1 + opnorm(A)))


def is_pd(M, tol: Tolerances = DEFAULT) -> bool:
    A = _require_square(M)
    if A.size == 0:
        return True
    if not is_hermitian(A, tol):
        return False
    w = np.linalg.eigvalsh(herm_part(A))
    return bool(w.min() >= tol.psd_atol * (1 + opnorm(A)))


def kernel_contained(A, B, tol: Tolerances = DEFAULT) -> bool:
    """ker(A) inside ker(B), decided algebraically: B A^+ A == B."""
    A = as_cmatrix(A)
    B = as_cmatrix(B)
    if A.shape[1] != B.shape[1]:
        raise ShapeError(f"column counts differ: {A.shape} vs {B.shape}")
    Ap = pinv(A, tol)
    return opnorm(B @ Ap @ A - B) <= tol.eq_atol * (1 + opnorm(B))


def range_contained(C, A, tol: Tolerances = DEFAULT) -> bool:
    """ran(C) inside ran(A), decided algebraically: A A^+ C == C."""
    C = as_cmatrix(C)
    A = as_cmatrix(A)
    if A.shape[0] != C.shape[0]:
        raise ShapeError(f"row counts differ: {C.shape} vs {A.shape}")
    Ap = pinv(A, tol)
    return opnorm(A @ Ap @ C - C) <= tol.eq_atol * (1 + opnorm(C))


def is_ep(M, tol: Tolerances = DEFAULT) -> bool:
    """True iff M commutes with its pseudoinverse (range of M equals range of M*)."""
    A = _require_square(M)
    Ap = pinv(A, tol)
    return opnorm(A @ Ap - Ap @ A) <= tol.eq_atol * (1 + opnorm(A @ Ap))


def orthonormal_range_basis(A, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Columns form an orthonormal basis of ran(A*); U*U = I_r, U U* = A^+ A.

    Raises ShapeError for the zero matrix (empty basis); callers handle the
    rank-0 branch explicitly.
    """
    A = as_cmatrix(A)
    _, s, Vh = _svd(A)
    cutoff = tol.rank_rtol * (s[0] if s.size else 0.0)
    r = int(np.count_nonzero(s > cutoff))
    if r == 0:
        raise ShapeError("zero matrix has an empty range basis")
    return Vh[:r].conj().T
