"""The coupled pair of Schur-type transforms on functions, the companion
2q x 2q matrix polynomials, matrix linear-fractional transforms, and the
resolvent products whose lower-right LFT parametrizes solution sets.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import matkit, seqkit
from ._engine import DOUBLE
from .errors import ShapeError
from .herglotz import HerglotzExpr, SchurMinus, SchurPlus
from .tolerances import DEFAULT, Tolerances

__all__ = [
    "lft",
    "w_poly",
    "v_poly",
    "ElementaryFactor",
    "ResolventPoly",
    "resolvent_v",
    "resolvent_w",
    "schur_plus",
    "schur_minus",
    "sn_chain_forward",
    "sn_chain_backward",
]


def lft(E, X, *, z=None) -> np.ndarray:
    """(a X + b)(c X + d)^{-1} for E = [[a, b], [c, d]] with q x q blocks.

    Raises SingularLftError when the denominator is numerically singular
    (|det| underflow or condition estimate beyond 1e12).
    """
    E = matkit.as_cmatrix(E)
    X = matkit.as_cmatrix(X)
    q = X.shape[0]
    if X.shape != (q, q) or E.shape != (2 * q, 2 * q):
        raise ShapeError(f"expected 2q x 2q over q x q, got {E.shape} over {X.shape}")
    num = E[:q, :q] @ X + E[:q, q:]
    den = E[q:, :q] @ X + E[q:, q:]
    return DOUBLE.solve_right(num, den, z=z)


def w_poly(A, B=None):
    """z -> [[z I - B A^+, A], [-A^+, I - A^+ A]]; B omitted means B = 0."""
    A = matkit.as_cmatrix(A)
    q = A.shape[0]
    B = np.zeros((q, q), dtype=complex) if B is None else matkit.as_cmatrix(B)
    Ap = matkit.pinv(A)
    eye = np.eye(q, dtype=complex)
    BAp = B @ Ap
    lower = np.hstack([-Ap, eye - Ap @ A])

    def at(z):
        top = np.hstack([z * eye - BAp, A])
        return np.vstack([top, lower])

    return at


def v_poly(A, B=None):
    """z -> [[0, -A], [A^+, z I - A^+ B]]; B omitted means B = 0."""
    A = matkit.as_cmatrix(A)
    q = A.shape[0]
    B = np.zeros((q, q), dtype=complex) if B is None else matkit.as_cmatrix(B)
    Ap = matkit.pinv(A)
    eye = np.eye(q, dtype=complex)
    ApB = Ap @ B
    top = np.hstack([np.zeros((q, q), dtype=complex), -A])

    def at(z):
        bottom = np.hstack([Ap, z * eye - ApB])
        return np.vstack([top, bottom])

    return at


@dataclass(frozen=True)
class ElementaryFactor:
    """One factor of a resolvent product.

    kind "V"/"W" carry both coefficients; lowercase "v"/"w" are the B = 0
    specializations.  The pseudoinverse of A is fixed data of the factor,
    computed once per arithmetic back end and cached.
    """

    kind: str  # "V" | "v" | "W" | "w"
    a: np.ndarray
    b: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("V", "v", "W", "w"):
            raise ShapeError(f"unknown factor kind {self.kind!r}")
        A = matkit.as_cmatrix(self.a)
        A.setflags(write=False)
        object.__setattr__(self, "a", A)
        if self.kind in ("V", "W"):
            if self.b is None:
                raise ShapeError(f"factor kind {self.kind!r} needs both coefficients")
            B = matkit.as_cmatrix(self.b)
            if B.shape != A.shape:
                raise ShapeError("factor coefficients must share one shape")
            B.setflags(write=False)
            object.__setattr__(self, "b", B)
        else:
            object.__setattr__(self, "b", None)
        object.__setattr__(self, "_pinv_cache", {})

    @property
    def q(self) -> int:
        return self.a.shape[0]

    def _a_pinv(self, eng):
        cached = self._pinv_cache.get(eng.kind)
        if cached is None:
            cached = eng.to_numpy(eng.pinv(eng.wrap(self.a)))
            self._pinv_cache[eng.kind] = cached
        return cached

    def eval_at(self, z, eng):
        q = self.q
        A = eng.wrap(self.a)
        Ap = eng.wrap(self._a_pinv(eng))
        B = eng.wrap(self.b) if self.b is not None else eng.zeros(q, q)
        eye = eng.eye(q)
        out = eng.zeros(2 * q, 2 * q)
        if self.kind in ("V", "v"):
            blocks = (
                (0, q, eng.neg(A)),
                (q, 0, Ap),
                (q, q, eng.sub(eng.smul(z, eye), eng.mul(Ap, B))),
            )
        else:
            blocks = (
                (0, 0, eng.sub(eng.smul(z, eye), eng.mul(B, Ap))),
                (0, q, A),
                (q, 0, eng.neg(Ap)),
                (q, q, eng.sub(eye, eng.mul(Ap, A))),
            )
        for (r0, c0, blk) in blocks:
            for i in range(q):
                for j in range(q):
                    out[r0 + i, c0 + j] = blk[i, j]
        return out


@dataclass(frozen=True)
class ResolventPoly:
    """Ordered product of elementary factors, evaluated left to right as
    written; no re-association, so values are bit-stable across runs."""

    factors: tuple
    q: int
    m: int

    def eval_at(self, z, eng=DOUBLE):
        out = self.factors[0].eval_at(z, eng)
        for f in self.factors[1:]:
            out = eng.mul(out, f.eval_at(z, eng))
        return out

    def __call__(self, z) -> np.ndarray:
        return DOUBLE.to_numpy(self.eval_at(DOUBLE.scalar(z), DOUBLE))

    def blocks(self, z):
        """q x q blocks (v11, v12, v21, v22) at z."""
        E = self(z)
        q = self.q
        return E[:q, :q], E[:q, q:], E[q:, :q], E[q:, q:]


def _heads(seq: seqkit.MatrixSeq, n: int, tol: Tolerances):
    """(s0^(k), s1^(k)) for k = 0..n; s1 present only while the level has it."""
    out = []
    for k in range(n + 1):
        st = seqkit.schur_transform(seq, k, tol)
        out.append((st[0], st[1] if st.kappa >= 1 else None))
    return out


def resolvent_v(seq: seqkit.MatrixSeq, m: int, tol: Tolerances = DEFAULT) -> ResolventPoly:
    """V^(2n) = V_{(0)} ... V_{(n-1)} v_{(n)};  V^(2n+1) = V_{(0)} ... V_{(n)}.

    Subscript (k) abbreviates the transform heads (s0^(k), s1^(k)).
    """
    if not (0 <= m <= seq.kappa):
        raise IndexError(f"resolvent order {m} outside 0..{seq.kappa}")
    n = m // 2
    heads = _heads(seq, n, tol)
    factors = []
    if m % 2 == 0:
        for k in range(n):
            factors.append(ElementaryFactor("V", heads[k][0], heads[k][1]))
        factors.append(ElementaryFactor("v", heads[n][0]))
    else:
        for k in range(n + 1):
            factors.append(ElementaryFactor("V", heads[k][0], heads[k][1]))
    return ResolventPoly(tuple(factors), seq.q, m)


def resolvent_w(seq: seqkit.MatrixSeq, m: int, tol: Tolerances = DEFAULT) -> ResolventPoly:
    """W^(2n) = w_{(n)} W_{(n-1)} ... W_{(0)};  W^(2n+1) = W_{(n)} ... W_{(0)}."""
    if not (0 <= m <= seq.kappa):
        raise IndexError(f"resolvent order {m} outside 0..{seq.kappa}")
    n = m // 2
    heads = _heads(seq, n, tol)
    factors = []
    if m % 2 == 0:
        factors.append(ElementaryFactor("w", heads[n][0]))
        for k in range(n - 1, -1, -1):
            factors.append(ElementaryFactor("W", heads[k][0], heads[k][1]))
    else:
        for k in range(n, -1, -1):
            factors.append(ElementaryFactor("W", heads[k][0], heads[k][1]))
    return ResolventPoly(tuple(factors), seq.q, m)


def schur_plus(F: HerglotzExpr, A, B=None) -> HerglotzExpr:
    """Forward transform node: z -> -A (z I + F(z)^+ A) + B."""
    A = matkit.as_cmatrix(A)
    B = np.zeros_like(A) if B is None else matkit.as_cmatrix(B)
    return SchurPlus(A, B, F)


def schur_minus(F: HerglotzExpr, A, B=None, *, certified: bool = False) -> HerglotzExpr:
    """Backward transform node: z -> -A (z I + A^+ (F(z) - B))^+.

    Pass ``certified=True`` when A is PSD, B Hermitian with ker A inside
    ker B, and F has the matching kernel structure: the pseudoinverse is
    then a true inverse and evaluation uses a linear solve that reports
    singular points instead of silently projecting.
    """
    A = matkit.as_cmatrix(A)
    B = np.zeros_like(A) if B is None else matkit.as_cmatrix(B)
    return SchurMinus(A, B, F, certified)


def _chain_heads(seq: seqkit.MatrixSeq, steps: int, parity: str, tol: Tolerances):
    if parity not in ("even", "odd"):
        raise ValueError(f"parity must be 'even' or 'odd', got {parity!r}")
    need = 2 * steps + (1 if parity == "odd" else 0)
    if need > seq.kappa:
        raise IndexError(
            f"chain with steps={steps}, parity={parity} needs kappa >= {need}, got {seq.kappa}"
        )
    return _heads(seq, steps, tol)


def sn_chain_forward(
    seq: seqkit.MatrixSeq,
    F: HerglotzExpr,
    steps: int,
    parity: str,
    tol: Tolerances = DEFAULT,
) -> HerglotzExpr:
    """Forward transform chain applied to F.

    parity "even" (data 0..2n, steps = n) composes the B = 0 head last and
    produces the (2n+1)-th image; parity "odd" (data 0..2n+1) composes full
    coefficient pairs throughout and produces the 2(n+1)-th image.
    """
    heads = _chain_heads(seq, steps, parity, tol)
    out = F
    for k in range(steps):
        out = schur_plus(out, heads[k][0], heads[k][1])
    if parity == "even":
        out = schur_plus(out, heads[steps][0], None)
    else:
        out = schur_plus(out, heads[steps][0], heads[steps][1])
    return out


def sn_chain_backward(
    seq: seqkit.MatrixSeq,
    G: HerglotzExpr,
    steps: int,
    parity: str,
    tol: Tolerances = DEFAULT,
    *,
    certified: bool = True,
) -> HerglotzExpr:
    """Backward transform chain applied to a parameter G (inverse of the
    forward chain on its natural classes)."""
    heads = _chain_heads(seq, steps, parity, tol)
    if parity == "even":
        out = schur_minus(G, heads[steps][0], None, certified=certified)
    else:
        out = schur_minus(G, heads[steps][0], heads[steps][1], certified=certified)
    for k in range(steps - 1, -1, -1):
        out = schur_minus(out, heads[k][0], heads[k][1], certified=certified)
    return out
