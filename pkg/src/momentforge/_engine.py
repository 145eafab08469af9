"""Matrix-arithmetic engines backing expression evaluation.

Two interchangeable back ends: fast numpy double precision, and an
mpmath back end for asymptotic work where powers of |z| amplify
roundoff beyond what doubles can represent.  Engine values are opaque
to callers; convert back with ``to_numpy``.
"""

from __future__ import annotations

import numpy as np
from mpmath import mp, mpc
from mpmath import matrix as mp_matrix
from mpmath import eighe

from .errors import SingularLftError

_COND_LIMIT = 1e12
_DET_FLOOR = 1e-300


class NumpyEngine:
    """Plain complex128 arithmetic."""

    kind = "numpy"

    def scalar(self, z):
        return complex(z)

    def wrap(self, A: np.ndarray):
        return np.asarray(A, dtype=complex)

    def to_numpy(self, A) -> np.ndarray:
        return np.asarray(A, dtype=complex)

    def zeros(self, p, q):
        return np.zeros((p, q), dtype=complex)

    def eye(self, q):
        return np.eye(q, dtype=complex)

    def shape(self, A):
        return A.shape

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def neg(self, a):
        return -a

    def mul(self, a, b):
        return a @ b

    def smul(self, s, a):
        return s * a

    def adjoint(self, a):
        return a.conj().T

    def pinv(self, a, rtol=1e-10):
        if a.size == 0:
            return a.conj().T.copy()
        U, s, Vh = np.linalg.svd(a)
        cutoff = rtol * (s[0] if s.size else 0.0)
        r = int(np.count_nonzero(s > cutoff))
        if r == 0:
            return np.zeros((a.shape[1], a.shape[0]), dtype=complex)
        return (Vh[:r].conj().T / s[:r]) @ U[:, :r].conj().T

    def solve_right(self, num, den, *, z=None):
        """num @ den^{-1}, raising SingularLftError on ill-conditioned den."""
        det = np.linalg.det(den)
        if not np.isfinite(det) or abs(det) < _DET_FLOOR:
            raise SingularLftError(f"linear-fractional denominator singular at z={z}", z=z)
        cond = np.linalg.cond(den)
        if not np.isfinite(cond) or cond > _COND_LIMIT:
            raise SingularLftError(
                f"linear-fractional denominator ill-conditioned at z={z} (cond={cond:.2e})",
                z=z,
                cond=float(cond),
            )
        return np.linalg.solve(den.T, num.T).T


class MpEngine:
    """mpmath arbitrary-precision arithmetic at a fixed working precision."""

    kind = "mp"

    def __init__(self, dps: int = 40):
        self.dps = int(dps)

    def scalar(self, z):
        z = complex(z)
        return mpc(z.real, z.imag)

    def wrap(self, A: np.ndarray):
        A = np.asarray(A, dtype=complex)
        m = mp_matrix(A.shape[0], A.shape[1])
        for i in range(A.shape[0]):
            for j in range(A.shape[1]):
                m[i, j] = mpc(A[i, j].real, A[i, j].imag)
        return m

    def to_numpy(self, A) -> np.ndarray:
        out = np.empty((A.rows, A.cols), dtype=complex)
        for i in range(A.rows):
            for j in range(A.cols):
                out[i, j] = complex(A[i, j])
        return out

    def zeros(self, p, q):
        return mp_matrix(p, q)

    def eye(self, q):
        m = mp_matrix(q, q)
        for i in range(q):
            m[i, i] = mpc(1)
        return m

    def shape(self, A):
        return (A.rows, A.cols)

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def neg(self, a):
        return -a

    def mul(self, a, b):
        return a * b

    def smul(self, s, a):
        return s * a

    def adjoint(self, a):
        out = mp_matrix(a.cols, a.rows)
        for i in range(a.rows):
            for j in range(a.cols):
                out[j, i] = a[i, j].conjugate()
        return out

    def pinv(self, a, rtol=None):
        """Pseudoinverse via the Hermitian eigendecomposition of a^H a.

        The cutoff separates the working-precision roundoff cluster from
        genuine singular values; the data itself is double precision, so
        anything below ~1e-25 relative is noise by construction.
        """
        with mp.workdps(self.dps):
            if a.rows == 0 or a.cols == 0:
                return mp_matrix(a.cols, a.rows)
            ah = self.adjoint(a)
            H = ah * a
            E, Q = eighe(H)
            vals = [E[i] for i in range(H.rows)]
            vmax = max((abs(v) for v in vals), default=mp.mpf(0))
            if vmax == 0:
                return mp_matrix(a.cols, a.rows)
            rel = mp.mpf(rtol) if rtol is not None else mp.mpf("1e-25")
            cutoff = rel * vmax
            D = mp_matrix(H.rows, H.rows)
            for i in range(H.rows):
                D[i, i] = 1 / vals[i] if vals[i] > cutoff else mpc(0)
            return Q * D * self.adjoint(Q) * ah

    def solve_right(self, num, den, *, z=None):
        with mp.workdps(self.dps):
            try:
                inv = den ** -1
            except ZeroDivisionError as exc:
                raise SingularLftError(
                    f"linear-fractional denominator singular at z={z}", z=z
                ) from exc
            return num * inv


DOUBLE = NumpyEngine()


def mp_engine(dps: int = 40) -> MpEngine:
    return MpEngine(dps)
