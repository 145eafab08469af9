"""Asymptotic verification engine: ray residuals of candidate solutions,
moment extraction from boundary growth, and pointwise comparison.

The residual of order k for data (s_0..s_kappa) is

    R_k(z) = z^(k+1) F(z) + sum_{j=0}^{k+1} z^(k+1-j) s_{j-1},   s_{-1} = 0,

which tends to zero along every ray in the upper half-plane exactly when
F carries the moments s_0..s_k.  Two numerical regimes:

* molecular functions (Cauchy transforms of atomic measures) admit an
  exact rearrangement with no large-|z| cancellation, so residual curves
  are meaningful on the whole default grid;
* general expression trees are evaluated in extended precision, because
  the subtraction above erases ~(k+1) log10|z| digits and double
  precision cannot certify decay past |z| ~ 1e3 for k >= 3.  Even then,
  the expression's own coefficients are double data, so curves bottom
  out at a construction floor ~1e-12 * |z|^(k-1); the verdict logic
  treats points at that floor as resolved zeros.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from mpmath import mp, mpc
from mpmath import matrix as mp_matrix

from . import matkit
from ._engine import mp_engine
from .errors import ShapeError
from .herglotz import GammaMu, HerglotzExpr, StieltjesOf
from .measures import MolecularMeasure
from .seqkit import MatrixSeq
from .tolerances import DEFAULT, Tolerances

__all__ = [
    "hn_transform",
    "hn_check",
    "extract_moments",
    "compare",
    "AsymptoticReport",
    "ExtractionResult",
    "ComparisonReport",
    "default_r_grid",
    "DEFAULT_RAYS",
]

DEFAULT_RAYS = (np.pi / 6, np.pi / 2, 5 * np.pi / 6)

#: decay rule: last residual below DECAY_DROP * first, and the last
#: MONOTONE_TAIL live points each shrink by at least MONOTONE_FACTOR
DECAY_DROP = 1e-2
MONOTONE_TAIL = 4
MONOTONE_FACTOR = 0.9

#: default construction floor for expression trees built from double data
CONSTRUCTION_FLOOR = 1e-12
#: roundoff floor coefficient for the exact molecular path
MOLECULAR_FLOOR = 1e-14


def default_r_grid() -> np.ndarray:
    return 10.0 ** (2 + 0.5 * np.arange(9))


def hn_transform(F: HerglotzExpr, seq: MatrixSeq, k: int, z: complex, s_minus1=None) -> np.ndarray:
    """Residual value R_k(z), evaluated in nested Horner form in 1/z.

    k ranges over -1..kappa; s_minus1 defaults to the zero matrix (the
    convention for problems posed on plain moment data).
    """
    if not (-1 <= k <= seq.kappa):
        raise IndexError(f"order k={k} outside -1..{seq.kappa}")
    z = complex(z)
    q = seq.q
    sm1 = np.zeros((q, q), dtype=complex) if s_minus1 is None else matkit.as_cmatrix(s_minus1)
    Fz = F.eval(z)
    if Fz.shape != (q, q):
        raise ShapeError(f"function size {Fz.shape} does not match data size {q}")
    if k == -1:
        return Fz + sm1
    u = 1.0 / z
    acc = seq[k].astype(complex)
    for j in range(k - 1, -1, -1):
        acc = acc * u + seq[j]
    return z ** (k + 1) * (Fz + (sm1 + u * acc))


# ---------------------------------------------------------------------------
# residual curves


def _molecular_measure(F: HerglotzExpr) -> Optional[MolecularMeasure]:
    """The atomic measure whose Cauchy transform F is, if that is exactly
    what the expression tree says."""
    if isinstance(F, StieltjesOf):
        return F.sigma
    if isinstance(F, GammaMu) and matkit.opnorm(F.gamma) == 0.0:
        atoms = tuple((t, (abs(t) + 1.0) * M) for t, M in F.mu.atoms)
        return MolecularMeasure(F.q, atoms)
    return None


def _molecular_residual(sigma: MolecularMeasure, deltas, k: int, z: complex):
    """Exact rearrangement: sum_m t^(k+1) (t-z)^{-1} M_m plus the moment
    mismatch sum_j z^(k-j) (s_j - s_j^sigma); returns (value, |terms| sum)."""
    q = sigma.q
    val = np.zeros((q, q), dtype=complex)
    gross = 0.0
    for t, M in sigma.atoms:
        c = t ** (k + 1) / (t - z)
        val += c * M
        gross += abs(c) * matkit.opnorm(M)
    for j, D in enumerate(deltas[: k + 1]):
        c = z ** (k - j)
        val += c * D
        gross += abs(c) * matkit.opnorm(D)
    return val, gross


def _mp_residual_curves(F, seq, ks, points, dps):
    """Residual norms for all orders in ``ks`` at each complex point,
    sharing one extended-precision evaluation of F per point."""
    eng = mp_engine(dps)
    q = seq.q
    s_mp = [eng.wrap(seq[j]) for j in range(seq.kappa + 1)]
    out = {k: [] for k in ks}
    with mp.workdps(dps):
        for z in points:
            zm = eng.scalar(z)
            Fz = F._value(zm, eng, {})
            u = 1 / zm
            for k in ks:
                acc = s_mp[k].copy()
                for j in range(k - 1, -1, -1):
                    acc = acc * u + s_mp[j]
                val = (zm ** (k + 1)) * (Fz + u * acc)
                out[k].append(matkit.opnorm(eng.to_numpy(val)))
    return out


@dataclass(frozen=True)
class AsymptoticReport:
    kappa: int
    rays: tuple
    r_grid: tuple
    mode: str  # "molecular-exact" | "extended-precision"
    curves: dict  # k -> tuple over rays -> tuple over r_grid of residual norms
    floors: dict  # k -> tuple over rays -> tuple of floor estimates
    verdicts: dict  # k -> "decaying" | "stagnant" | "diverging"
    thresholds: dict
    extraction: Optional["ExtractionResult"] = None

    def passed(self) -> bool:
        return all(v == "decaying" for v in self.verdicts.values())

    def to_json(self) -> dict:
        return {
            "kappa": self.kappa,
            "rays": list(self.rays),
            "r_grid": list(self.r_grid),
            "mode": self.mode,
            "curves": {str(k): [list(c) for c in v] for k, v in self.curves.items()},
            "floors": {str(k): [list(c) for c in v] for k, v in self.floors.items()},
            "verdicts": {str(k): v for k, v in self.verdicts.items()},
            "thresholds": dict(self.thresholds),
            "passed": self.passed(),
            "extraction": None if self.extraction is None else self.extraction.to_json(),
        }


def _classify(curve, floors):
    """decaying / stagnant / diverging for one residual curve.

    Points at or below 3x their floor estimate are resolved zeros.  A
    curve decays if it satisfies the drop-and-monotone rule on its live
    prefix, or if it sinks into the floor after a prefix that decreased
    strictly from the start (a plateau that merely drifts under a rising
    floor does not count).
    """
    c = np.asarray(curve, dtype=float)
    f = np.asarray(floors, dtype=float)
    live = np.where(c > 3 * f)[0]
    if live.size == 0:
        return "decaying"
    end = live[-1]
    pre = c[: end + 1]
    if pre.size >= 2:
        tail = pre[-(MONOTONE_TAIL + 1) :]
        monotone_strict = all(tail[i + 1] <= MONOTONE_FACTOR * tail[i] for i in range(len(tail) - 1))
        non_increasing = all(pre[i + 1] <= 1.05 * pre[i] for i in range(len(pre) - 1))
        head = pre[: min(4, len(pre))]
        head_strict = all(head[i + 1] <= MONOTONE_FACTOR * head[i] for i in range(len(head) - 1))
    else:
        monotone_strict = True
        non_increasing = True
        head_strict = True
    sank_into_floor = end < len(c) - 1
    if sank_into_floor and non_increasing and head_strict and (pre.size <= 2 or pre[-1] <= 0.8 * pre[0]):
        return "decaying"
    if pre[-1] < DECAY_DROP * pre[0] and monotone_strict:
        return "decaying"
    if pre[-1] > 10 * pre[0]:
        return "diverging"
    return "stagnant"


def hn_check(
    F: HerglotzExpr,
    seq: MatrixSeq,
    rays=None,
    r_grid=None,
    tol: Tolerances = DEFAULT,
    *,
    floor_coeff: float = CONSTRUCTION_FLOOR,
    with_extraction: bool = True,
    mp_dps: Optional[int] = None,
) -> AsymptoticReport:
    """Evaluate residual curves of every order 0..kappa along the rays and
    classify their decay; optionally extract the moments as well."""
    rays = tuple(DEFAULT_RAYS if rays is None else rays)
    if any(not (0.0 < th < np.pi) for th in rays):
        raise ValueError(f"ray angles must lie strictly inside (0, pi), got {rays}")
    r_grid = np.asarray(default_r_grid() if r_grid is None else r_grid, dtype=float)
    ks = list(range(0, seq.kappa + 1))
    scale = 1 + seq.scale()

    sigma = _molecular_measure(F)
    curves = {k: [] for k in ks}
    floors = {k: [] for k in ks}
    if sigma is not None:
        mode = "molecular-exact"
        s_sig = [sigma.moment(j) for j in range(seq.kappa + 1)]
        deltas = [seq[j] - s_sig[j] for j in range(seq.kappa + 1)]
        for theta in rays:
            for k in ks:
                cr, fl = [], []
                for r in r_grid:
                    z = r * np.exp(1j * theta)
                    val, gross = _molecular_residual(sigma, deltas, k, z)
                    cr.append(matkit.opnorm(val))
                    fl.append(MOLECULAR_FLOOR * (1 + gross))
                curves[k].append(tuple(cr))
                floors[k].append(tuple(fl))
    else:
        mode = "extended-precision"
        dps = mp_dps if mp_dps is not None else 30 + int((seq.kappa + 1) * np.log10(r_grid[-1]))
        for theta in rays:
            pts = [r * np.exp(1j * theta) for r in r_grid]
            ray_curves = _mp_residual_curves(F, seq, ks, pts, dps)
            for k in ks:
                curves[k].append(tuple(ray_curves[k]))
                # double-precision coefficient data perturbs the function's
                # true moments s~_j for j >= 1 at relative roundoff level, so
                # residuals bottom out near coeff * scale * r^(k-1)
                floors[k].append(
                    tuple(floor_coeff * scale * max(1.0, r) ** max(k - 1, 0) for r in r_grid)
                )

    verdicts = {}
    for k in ks:
        per_ray = [_classify(curves[k][i], floors[k][i]) for i in range(len(rays))]
        if all(v == "decaying" for v in per_ray):
            verdicts[k] = "decaying"
        elif any(v == "diverging" for v in per_ray):
            verdicts[k] = "diverging"
        else:
            verdicts[k] = "stagnant"

    extraction = None
    if with_extraction:
        extraction = extract_moments(F, seq.kappa, tol=tol)

    return AsymptoticReport(
        kappa=seq.kappa,
        rays=rays,
        r_grid=tuple(float(r) for r in r_grid),
        mode=mode,
        curves={k: tuple(v) for k, v in curves.items()},
        floors={k: tuple(v) for k, v in floors.items()},
        verdicts=verdicts,
        thresholds={
            "decay_drop": DECAY_DROP,
            "monotone_tail": MONOTONE_TAIL,
            "monotone_factor": MONOTONE_FACTOR,
            "floor_coeff": floor_coeff if sigma is None else MOLECULAR_FLOOR,
        },
        extraction=extraction,
    )


# ---------------------------------------------------------------------------
# moment extraction


@dataclass(frozen=True)
class ExtractionResult:
    moments: tuple  # extracted s_0..s_m (possibly truncated at divergence)
    residuals: tuple  # per-k agreement between the two fits
    converged: tuple  # per-k flags
    y_span: tuple

    def seq(self) -> MatrixSeq:
        return MatrixSeq(self.moments)

    def to_json(self) -> dict:
        from .serialize import cmatrix_to_json

        return {
            "moments": [cmatrix_to_json(m) for m in self.moments],
            "residuals": list(self.residuals),
            "converged": list(self.converged),
            "y_span": list(self.y_span),
        }


def _vandermonde_fit(F, q, m, guard, y_lo, y_hi, dps):
    """Coefficients of F(iy) ~ -sum_j s_j (iy)^{-j-1}, j = 0..m+guard,
    from a square Vandermonde solve at extended precision."""
    J = m + guard
    npts = J + 1
    with mp.workdps(dps):
        ys = [mp.mpf(y_lo) * (mp.mpf(y_hi) / y_lo) ** (mp.mpf(i) / (npts - 1)) for i in range(npts)]
        eng = mp_engine(dps)
        A = mp_matrix(npts, npts)
        for i, y in enumerate(ys):
            z = mpc(0, 1) * y
            v = -1 / z
            for j in range(npts):
                A[i, j] = v
                v = v / z
        Ainv = A ** -1
        Fv = []
        for y in ys:
            zm = mpc(0, 1) * y
            Fv.append(F._value(zm, eng, {}))
        out = []
        for jrow in range(m + 1):
            S = np.empty((q, q), dtype=complex)
            for a in range(q):
                for b in range(q):
                    acc = mpc(0)
                    for i in range(npts):
                        acc += Ainv[jrow, i] * Fv[i][a, b]
                    S[a, b] = complex(acc)
            out.append(S)
        return out


def extract_moments(
    F: HerglotzExpr,
    m: int,
    y_grid=None,
    tol: Tolerances = DEFAULT,
    *,
    guard: int = 4,
    dps: Optional[int] = None,
) -> ExtractionResult:
    """Recover the first m+1 moments of F from its imaginary-axis decay.

    All moments are fitted jointly against the truncated asymptotic
    expansion on a geometric grid spanning ``y_grid`` (its min/max; the
    sample count is m + guard + 1, increased as needed).  The residual per
    order is the disagreement with a refit using two more guard terms;
    extraction stops at the first order whose residual exceeds
    0.1 * (1 + ||s_k||).
    """
    if m < 0:
        raise ValueError(f"moment count must be >= 0, got {m}")
    y = np.asarray(default_r_grid() if y_grid is None else y_grid, dtype=float)
    if y.size < 2 or y.min() <= 0:
        raise ValueError("y grid must contain at least two positive points")
    y_lo, y_hi = float(y.min()), float(y.max())
    q = F.q
    if dps is None:
        dps = 40 + 8 * (m + guard)
    first = _vandermonde_fit(F, q, m, guard, y_lo, y_hi, dps)
    second = _vandermonde_fit(F, q, m, guard + 2, y_lo, y_hi, dps + 16)

    moments, residuals, converged = [], [], []
    for k in range(m + 1):
        resid = matkit.opnorm(first[k] - second[k])
        ok = resid <= 0.1 * (1 + matkit.opnorm(second[k]))
        moments.append(second[k])
        residuals.append(float(resid))
        converged.append(bool(ok))
        if not ok:
            break
    return ExtractionResult(
        moments=tuple(moments),
        residuals=tuple(residuals),
        converged=tuple(converged),
        y_span=(y_lo, y_hi),
    )


# ---------------------------------------------------------------------------
# pointwise comparison


@dataclass(frozen=True)
class ComparisonReport:
    max_residual: float
    at_z: complex
    tol: float
    passed: bool
    n_points: int

    def to_json(self) -> dict:
        return {
            "max_residual": self.max_residual,
            "at_z": [self.at_z.real, self.at_z.imag],
            "tol": self.tol,
            "passed": self.passed,
            "n_points": self.n_points,
        }


def compare(
    F: HerglotzExpr, G: HerglotzExpr, z_grid, tol_value: float, *, dps: Optional[int] = None
) -> ComparisonReport:
    """Max over the grid of ||F(z) - G(z)|| with a pass/fail verdict.

    Pass ``dps`` to evaluate both sides in extended precision; pointwise
    values of long transform chains lose ~|z|^2 digits per chain level in
    doubles, which matters when certifying tolerances near 1e-8.
    """
    if F.q != G.q:
        raise ShapeError(f"sizes differ: {F.q} vs {G.q}")
    worst = -1.0
    at = None
    pts = list(z_grid)
    for z in pts:
        if dps is None:
            d = matkit.opnorm(F.eval(z) - G.eval(z))
        else:
            d = matkit.opnorm(F.eval_mp(z, dps) - G.eval_mp(z, dps))
        if d > worst:
            worst, at = d, complex(z)
    return ComparisonReport(
        max_residual=float(worst),
        at_z=at,
        tol=float(tol_value),
        passed=bool(worst <= tol_value),
        n_points=len(pts),
    )
