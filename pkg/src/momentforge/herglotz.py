"""Evaluable expression trees for matrix functions holomorphic on the
open upper half-plane, with constructors for the function classes the
solver works in and numeric class diagnostics.

Every node is immutable after construction.  ``eval`` checks Im z > 0,
memoizes shared subexpressions within a single call, and runs either in
double precision or, via ``eval_mp``, in extended precision for
asymptotic work.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import matkit
from ._engine import DOUBLE, mp_engine
from .errors import DomainError, ShapeError
from .measures import MolecularMeasure
from .tolerances import DEFAULT, Tolerances

__all__ = [
    "HerglotzExpr",
    "Zero",
    "Const",
    "Linear",
    "NevTriple",
    "StieltjesOf",
    "GammaMu",
    "Sum",
    "Congruence",
    "NegPinv",
    "SchurPlus",
    "SchurMinus",
    "LFTByResolvent",
    "Compressed",
    "ClassTag",
    "DiagnosticsReport",
    "eval_fn",
    "nevanlinna_alpha_beta",
    "gamma_limit",
    "class_diagnostics",
    "default_y_grid",
    "richardson_limit",
]

_CONSTRUCT_TOL = Tolerances(rank_rtol=1e-10, psd_atol=1e-8, eq_atol=1e-8)


class HerglotzExpr:
    """Base node; subclasses set ``q`` (output size) and implement ``_value``."""

    kind: str = "?"
    q: int = 0

    def eval(self, z: complex) -> np.ndarray:
        """Value at z (Im z > 0), double precision."""
        z = complex(z)
        if z.imag <= 0:
            raise DomainError(f"evaluation point must satisfy Im z > 0, got {z}")
        return self._value(DOUBLE.scalar(z), DOUBLE, {})

    def eval_mp(self, z: complex, dps: int = 40) -> np.ndarray:
        """Value at z computed in extended precision, returned as complex128.

        The function is exactly determined by its double-precision data;
        extended precision removes evaluation roundoff, which matters
        whenever the caller multiplies values by large powers of |z|.
        """
        from mpmath import mp

        z = complex(z)
        if z.imag <= 0:
            raise DomainError(f"evaluation point must satisfy Im z > 0, got {z}")
        eng = mp_engine(dps)
        with mp.workdps(dps):
            return eng.to_numpy(self._value(eng.scalar(z), eng, {}))

    def _value(self, z, eng, cache):
        key = id(self)
        hit = cache.get(key)
        if hit is None:
            hit = self._compute(z, eng, cache)
            cache[key] = hit
        return hit

    def _compute(self, z, eng, cache):  # pragma: no cover - abstract
        raise NotImplementedError

    def children(self):
        return ()


@dataclass(frozen=True, eq=False)
class Zero(HerglotzExpr):
    q: int = 1
    kind = "zero"

    def _compute(self, z, eng, cache):
        return eng.zeros(self.q, self.q)


@dataclass(frozen=True, eq=False)
class Const(HerglotzExpr):
    """Constant A with Im A >= 0."""

    a: np.ndarray = None
    kind = "const"

    def __post_init__(self):
        A = matkit.as_cmatrix(self.a)
        if A.shape[0] != A.shape[1]:
            raise ShapeError("constant must be square")
        im = (A - A.conj().T) / 2j
        if not matkit.is_psd(im, _CONSTRUCT_TOL):
            raise ShapeError("constant must have PSD imaginary part")
        A.setflags(write=False)
        object.__setattr__(self, "a", A)
        object.__setattr__(self, "q", A.shape[0])

    def _compute(self, z, eng, cache):
        return eng.wrap(self.a)


@dataclass(frozen=True, eq=False)
class Linear(HerglotzExpr):
    """z -> z * beta with beta PSD."""

    beta: np.ndarray = None
    kind = "linear"

    def __post_init__(self):
        B = matkit.as_cmatrix(self.beta)
        if not matkit.is_psd(B, _CONSTRUCT_TOL):
            raise ShapeError("slope must be Hermitian PSD")
        B.setflags(write=False)
        object.__setattr__(self, "beta", B)
        object.__setattr__(self, "q", B.shape[0])

    def _compute(self, z, eng, cache):
        return eng.smul(z, eng.wrap(self.beta))


@dataclass(frozen=True, eq=False)
class NevTriple(HerglotzExpr):
    """alpha + z*beta + sum over atoms of (1+t z)/(t-z) * mass."""

    alpha: np.ndarray = None
    beta: np.ndarray = None
    nu: MolecularMeasure = None
    kind = "nev_triple"

    def __post_init__(self):
        A = matkit.as_cmatrix(self.alpha)
        B = matkit.as_cmatrix(self.beta)
        if not matkit.is_hermitian(A, _CONSTRUCT_TOL):
            raise ShapeError("alpha must be Hermitian")
        if not matkit.is_psd(B, _CONSTRUCT_TOL):
            raise ShapeError("beta must be Hermitian PSD")
        if A.shape != B.shape or A.shape[0] != self.nu.q:
            raise ShapeError("alpha, beta and the measure must share one size")
        A.setflags(write=False)
        B.setflags(write=False)
        object.__setattr__(self, "alpha", A)
        object.__setattr__(self, "beta", B)
        object.__setattr__(self, "q", A.shape[0])

    def _compute(self, z, eng, cache):
        out = eng.add(eng.wrap(self.alpha), eng.smul(z, eng.wrap(self.beta)))
        one = eng.scalar(1.0)
        for t, M in self.nu.atoms:
            t = eng.scalar(t)
            out = eng.add(out, eng.smul((one + t * z) / (t - z), eng.wrap(M)))
        return out


@dataclass(frozen=True, eq=False)
class StieltjesOf(HerglotzExpr):
    """Cauchy transform of a molecular measure."""

    sigma: MolecularMeasure = None
    kind = "stieltjes_of"

    def __post_init__(self):
        object.__setattr__(self, "q", self.sigma.q)

    def _compute(self, z, eng, cache):
        out = eng.zeros(self.q, self.q)
        for t, M in self.sigma.atoms:
            out = eng.add(out, eng.smul(1 / (eng.scalar(t) - z), eng.wrap(M)))
        return out


@dataclass(frozen=True, eq=False)
class GammaMu(HerglotzExpr):
    """gamma + sum (|t|+1)/(t-z) * mass, gamma Hermitian."""

    gamma: np.ndarray = None
    mu: MolecularMeasure = None
    kind = "gamma_mu"

    def __post_init__(self):
        G = matkit.as_cmatrix(self.gamma)
        if not matkit.is_hermitian(G, _CONSTRUCT_TOL):
            raise ShapeError("gamma must be Hermitian")
        if G.shape[0] != self.mu.q:
            raise ShapeError("gamma size must match the measure")
        G.setflags(write=False)
        object.__setattr__(self, "gamma", G)
        object.__setattr__(self, "q", G.shape[0])

    def _compute(self, z, eng, cache):
        out = eng.wrap(self.gamma)
        for t, M in self.mu.atoms:
            w = (abs(t) + 1.0) / (eng.scalar(t) - z)
            out = eng.add(out, eng.smul(w, eng.wrap(M)))
        return out


@dataclass(frozen=True, eq=False)
class Sum(HerglotzExpr):
    terms: tuple = ()
    kind = "sum"

    def __post_init__(self):
        terms = tuple(self.terms)
        if not terms:
            raise ShapeError("sum needs at least one term")
        q = terms[0].q
        if any(t.q != q for t in terms):
            raise ShapeError("sum terms must share one size")
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "q", q)

    def _compute(self, z, eng, cache):
        out = self.terms[0]._value(z, eng, cache)
        for t in self.terms[1:]:
            out = eng.add(out, t._value(z, eng, cache))
        return out

    def children(self):
        return self.terms


@dataclass(frozen=True, eq=False)
class Congruence(HerglotzExpr):
    """A* F(z) A for a p x q matrix A and inner function of size p."""

    a: np.ndarray = None
    inner: HerglotzExpr = None
    kind = "congruence"

    def __post_init__(self):
        A = matkit.as_cmatrix(self.a)
        if A.shape[0] != self.inner.q:
            raise ShapeError(
                f"congruence matrix has {A.shape[0]} rows but inner function has size {self.inner.q}"
            )
        A.setflags(write=False)
        object.__setattr__(self, "a", A)
        object.__setattr__(self, "q", A.shape[1])

    def _compute(self, z, eng, cache):
        A = eng.wrap(self.a)
        return eng.mul(eng.mul(eng.adjoint(A), self.inner._value(z, eng, cache)), A)

    def children(self):
        return (self.inner,)


@dataclass(frozen=True, eq=False)
class NegPinv(HerglotzExpr):
    """-F(z)^+ ; stays in the Herglotz class."""

    inner: HerglotzExpr = None
    kind = "neg_pinv"

    def __post_init__(self):
        object.__setattr__(self, "q", self.inner.q)

    def _compute(self, z, eng, cache):
        return eng.neg(eng.pinv(self.inner._value(z, eng, cache)))

    def children(self):
        return (self.inner,)


def _check_pair(A, B, q):
    A = matkit.as_cmatrix(A)
    B = matkit.as_cmatrix(B)
    if A.shape != (q, q) or B.shape != (q, q):
        raise ShapeError(f"coefficients must be {q}x{q}")
    A.setflags(write=False)
    B.setflags(write=False)
    return A, B


@dataclass(frozen=True, eq=False)
class SchurPlus(HerglotzExpr):
    """-A (z I + F(z)^+ A) + B."""

    a: np.ndarray = None
    b: np.ndarray = None
    inner: HerglotzExpr = None
    kind = "schur_plus"

    def __post_init__(self):
        A, B = _check_pair(self.a, self.b, self.inner.q)
        object.__setattr__(self, "a", A)
        object.__setattr__(self, "b", B)
        object.__setattr__(self, "q", self.inner.q)

    def _compute(self, z, eng, cache):
        A = eng.wrap(self.a)
        Fz = self.inner._value(z, eng, cache)
        core = eng.add(eng.smul(z, eng.eye(self.q)), eng.mul(eng.pinv(Fz), A))
        return eng.add(eng.neg(eng.mul(A, core)), eng.wrap(self.b))

    def children(self):
        return (self.inner,)


@dataclass(frozen=True, eq=False)
class SchurMinus(HerglotzExpr):
    """-A (z I + A^+ (F(z) - B))^+.

    With ``certified=True`` the caller asserts the hypotheses under which
    the pseudoinverse is a true inverse; the node then solves the linear
    system and reports a singular denominator loudly instead of silently
    projecting.
    """

    a: np.ndarray = None
    b: np.ndarray = None
    inner: HerglotzExpr = None
    certified: bool = False
    kind = "schur_minus"

    def __post_init__(self):
        A, B = _check_pair(self.a, self.b, self.inner.q)
        object.__setattr__(self, "a", A)
        object.__setattr__(self, "b", B)
        object.__setattr__(self, "q", self.inner.q)

    def _compute(self, z, eng, cache):
        A = eng.wrap(self.a)
        Fz = self.inner._value(z, eng, cache)
        Ap = eng.pinv(A)
        core = eng.add(
            eng.smul(z, eng.eye(self.q)), eng.mul(Ap, eng.sub(Fz, eng.wrap(self.b)))
        )
        if self.certified:
            return eng.neg(eng.solve_right(A, core, z=complex(z)))
        return eng.neg(eng.mul(A, eng.pinv(core)))

    def children(self):
        return (self.inner,)


@dataclass(frozen=True, eq=False)
class LFTByResolvent(HerglotzExpr):
    """Linear-fractional transform of the inner function by a 2q x 2q
    matrix polynomial (see transforms.ResolventPoly)."""

    resolvent: object = None  # transforms.ResolventPoly
    inner: HerglotzExpr = None
    kind = "lft_resolvent"

    def __post_init__(self):
        if self.resolvent.q != self.inner.q:
            raise ShapeError(
                f"resolvent block size {self.resolvent.q} does not match parameter size {self.inner.q}"
            )
        object.__setattr__(self, "q", self.resolvent.q)

    def _compute(self, z, eng, cache):
        E = self.resolvent.eval_at(z, eng)
        X = self.inner._value(z, eng, cache)
        q = self.q
        a, b = E[0:q, 0:q], E[0:q, q : 2 * q]
        c, d = E[q : 2 * q, 0:q], E[q : 2 * q, q : 2 * q]
        num = eng.add(eng.mul(a, X), b)
        den = eng.add(eng.mul(c, X), d)
        return eng.solve_right(num, den, z=complex(z))

    def children(self):
        return (self.inner,)


@dataclass(frozen=True, eq=False)
class Compressed(HerglotzExpr):
    """U f(z) U* for an isometry U (q x r columns, U*U = I_r)."""

    u: np.ndarray = None
    inner: HerglotzExpr = None
    kind = "compressed"

    def __post_init__(self):
        U = matkit.as_cmatrix(self.u)
        r = U.shape[1]
        if self.inner.q != r:
            raise ShapeError(f"isometry has {r} columns but inner function has size {self.inner.q}")
        if r > 0 and matkit.opnorm(U.conj().T @ U - np.eye(r)) > 1e-8:
            raise ShapeError("columns are not orthonormal")
        U.setflags(write=False)
        object.__setattr__(self, "u", U)
        object.__setattr__(self, "q", U.shape[0])

    def _compute(self, z, eng, cache):
        U = eng.wrap(self.u)
        return eng.mul(eng.mul(U, self.inner._value(z, eng, cache)), eng.adjoint(U))

    def children(self):
        return (self.inner,)


def eval_fn(F: HerglotzExpr, z: complex) -> np.ndarray:
    """Functional form of ``F.eval(z)``."""
    return F.eval(z)


# ---------------------------------------------------------------------------
# asymptotics on the positive imaginary axis


def default_y_grid(y0: float = 1e2, ratio: float = 10 ** 0.5, n: int = 9) -> np.ndarray:
    return y0 * ratio ** np.arange(n)


def richardson_limit(values, y_grid):
    """Order-2 Richardson extrapolation in 1/y of matrix samples.

    Assumes the error model ``c1/y + c2/y**2 + O(1/y**3)`` on a geometric
    grid.  Returns (limit, residual) with residual the delta between the
    two entries of the doubly-accelerated sequence with the best mutual
    agreement; on short grids it falls back to lower order.
    """
    vals = [np.asarray(v, dtype=complex) for v in values]
    y = np.asarray(y_grid, dtype=float)
    if len(vals) != len(y) or len(vals) < 2:
        raise ValueError("need matching grids with at least two samples")
    ratio = y[1] / y[0]
    lvl1 = [(ratio * vals[i + 1] - vals[i]) / (ratio - 1) for i in range(len(vals) - 1)]
    if len(lvl1) < 2:
        return lvl1[0], float(np.linalg.norm(lvl1[0] - vals[-1]))
    r2 = ratio ** 2
    lvl2 = [(r2 * lvl1[i + 1] - lvl1[i]) / (r2 - 1) for i in range(len(lvl1) - 1)]
    if len(lvl2) < 2:
        return lvl2[0], float(np.linalg.norm(lvl2[0] - lvl1[-1]))
    deltas = [float(np.linalg.norm(lvl2[i + 1] - lvl2[i])) for i in range(len(lvl2) - 1)]
    i = int(np.argmin(deltas))
    return lvl2[i + 1], deltas[i]


def nevanlinna_alpha_beta(F: HerglotzExpr, y_grid=None):
    """(alpha, beta) estimates: alpha = Re F(i), beta = lim F(iy)/(iy).

    Returns (alpha, beta, residual) with residual the extrapolation delta
    of the beta limit.
    """
    y = np.asarray(default_y_grid() if y_grid is None else y_grid, dtype=float)
    if len(y) < 3:
        raise ValueError("y grid needs at least 3 points")
    alpha = matkit.herm_part(F.eval(1j))
    samples = [F.eval(1j * v) / (1j * v) for v in y]
    beta, resid = richardson_limit(samples, y)
    return alpha, beta, resid


def gamma_limit(F: HerglotzExpr, y_grid=None):
    """Extrapolated limit of F(iy) for functions with a finite boundary value.

    Returns (gamma, residual, converged); convergence is flagged when the
    extrapolation delta stays below 1e-6 * (1 + ||gamma||).
    """
    y = np.asarray(default_y_grid() if y_grid is None else y_grid, dtype=float)
    samples = [F.eval(1j * v) for v in y]
    gamma, resid = richardson_limit(samples, y)
    converged = resid <= 1e-6 * (1 + matkit.opnorm(gamma))
    return gamma, resid, converged


# ---------------------------------------------------------------------------
# class diagnostics


@dataclass(frozen=True)
class ClassTag:
    """Claimed membership; metadata only, always re-verified numerically.

    name: one of R, R[-2], R[-1], R[0], R[kappa], R~0, R_{-1}, R_{kappa},
    P_even, P_odd.  ``ref`` carries the reference matrix for P_even/P_odd,
    ``kappa`` the moment order for the R[kappa]/R_{kappa} families.
    """

    name: str
    ref: Optional[np.ndarray] = None
    kappa: Optional[int] = None


@dataclass(frozen=True)
class DiagnosticsReport:
    tag: ClassTag
    checks: tuple  # (name, value, passed: bool | None)
    verdict: str  # consistent | inconsistent | inconclusive

    def passed(self) -> bool:
        return self.verdict == "consistent"


def _decay_exponent(y, g):
    """Least-squares slope p of g ~ c * y^{-p} on a log-log grid."""
    y = np.asarray(y, dtype=float)
    g = np.asarray(g, dtype=float)
    keep = g > 0
    if keep.sum() < 2:
        return np.inf  # identically zero: decays faster than any power
    c = np.polyfit(np.log(y[keep]), np.log(g[keep]), 1)
    return -float(c[0])


def class_diagnostics(
    F: HerglotzExpr,
    tag: ClassTag,
    y_grid=None,
    tol: Tolerances = DEFAULT,
) -> DiagnosticsReport:
    """Numeric evidence (never proof) for membership in a claimed class.

    Growth and integrability statements over all of [1, oo) are only
    sampled on the grid, so a passing report is evidence, not a
    certificate; failing reports are conclusive up to the tolerances.
    """
    y = np.asarray(default_y_grid(1.0, 10 ** 0.25, 17) if y_grid is None else y_grid, float)
    vals = [F.eval(1j * v) for v in y]
    norms = np.array([matkit.opnorm(V) for V in vals])
    im_norms = np.array([matkit.opnorm((V - V.conj().T) / 2j) for V in vals])
    checks = []

    def add(name, value, passed):
        checks.append((name, value, passed))

    # positivity of the imaginary part on the sampled ray
    im_min = min(
        float(np.linalg.eigvalsh(matkit.herm_part((V - V.conj().T) / 2j)).min()) for V in vals
    )
    scale = 1 + float(norms.max(initial=0.0))
    add("im_psd_on_samples", im_min, im_min >= -tol.psd_atol * scale)

    name = tag.name
    if name in ("R[-2]", "P_even"):
        g = norms / y
        vanished = g[-1] <= max(1e-2 * g[0], 1e-10 * (1 + g[0]))
        add("norm_over_y_vanishes", float(g[-1]), bool(vanished))
    if name in ("R[-1]", "R_{-1}", "P_odd"):
        # integrand ||Im F(iy)||/y is summable iff the norm decays with any
        # strictly positive power; fit the exponent on the asymptotic half
        half = len(y) // 2
        p = _decay_exponent(y[half:], im_norms[half:])
        add("im_norm_decay_exponent", p, p > 0.05 if np.isfinite(p) else True)
        trapezoid = getattr(np, "trapezoid", np.trapz)
        add("integral_estimate", float(trapezoid(im_norms / y, y)), None)
    if name in ("R_{-1}", "R_{kappa}", "P_odd"):
        gamma, resid, conv = gamma_limit(F, default_y_grid())
        vanish = matkit.opnorm(gamma) <= 1e-5 * scale
        add("boundary_value_vanishes", float(matkit.opnorm(gamma)), bool(conv and vanish))
    if name in ("R~0", "R[0]", "R[kappa]", "R_{kappa}"):
        g = y * norms
        add("y_norm_bounded", float(g.max()), bool(g.max() <= 10 * (1 + g[0])))
    if name in ("P_even", "P_odd") and tag.ref is not None:
        ok = matkit.kernel_contained(tag.ref, F.eval(1j), tol)
        add("reference_kernel_contained", float(ok), ok)

    results = [p for (_, _, p) in checks if p is not None]
    if all(results):
        verdict = "consistent"
    elif any(p is False for p in results):
        verdict = "inconsistent"
    else:
        verdict = "inconclusive"
    return DiagnosticsReport(tag=tag, checks=tuple(checks), verdict=verdict)
