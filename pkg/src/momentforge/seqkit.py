"""Finite matrix sequences, block Hankel structures, the algebraic
Schur-type algorithm, the canonical Hankel parametrization, and the
membership tests for Hankel nonnegative-definite (extendable) data.

Index conventions: a sequence (s_0, ..., s_kappa) of q x q matrices has
length kappa + 1.  H_n is the block Hankel matrix [s_{j+k}] for
j,k = 0..n and exists whenever 2n <= kappa; K_n shifts every block by
one.  All pseudoinverses inside the recursions use an absolute singular
value floor tied to the scale of the *input* sequence: iterated Schur
transforms of degenerate data produce levels that are zero up to
roundoff, and a purely matrix-relative cutoff would invert that junk.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import matkit
from .errors import ShapeError
from .measures import random_measure
from .tolerances import DEFAULT, Tolerances

__all__ = [
    "MatrixSeq",
    "HankelParam",
    "hankel",
    "k_hankel",
    "reciprocal",
    "schur_transform",
    "canonical_param",
    "is_hnnd",
    "is_hpd",
    "is_hnnd_extendable",
    "is_first_term_dominated",
    "canonical_extension",
    "truncate",
    "random_extendable_seq",
]


@dataclass(frozen=True)
class MatrixSeq:
    """Immutable finite sequence (s_0, ..., s_kappa) of q x q complex matrices."""

    items: tuple = field(default_factory=tuple)

    def __init__(self, items):
        mats = tuple(matkit.as_cmatrix(s) for s in items)
        if not mats:
            raise ShapeError("a matrix sequence needs at least one item")
        q = mats[0].shape[0]
        for s in mats:
            if s.shape != (q, q):
                raise ShapeError(f"all items must be {q}x{q}, got {s.shape}")
            s.setflags(write=False)
        object.__setattr__(self, "items", mats)

    @property
    def q(self) -> int:
        return self.items[0].shape[0]

    @property
    def kappa(self) -> int:
        return len(self.items) - 1

    def __len__(self):
        return len(self.items)

    def __getitem__(self, j):
        return self.items[j]

    def scale(self) -> float:
        return max(matkit.opnorm(s) for s in self.items)

    def y_block(self, l: int, m: int) -> np.ndarray:
        """Column stack (s_l; s_{l+1}; ...; s_m)."""
        self._check_range(l, m)
        return np.vstack(self.items[l : m + 1])

    def z_block(self, l: int, m: int) -> np.ndarray:
        """Row stack (s_l, s_{l+1}, ..., s_m)."""
        self._check_range(l, m)
        return np.hstack(self.items[l : m + 1])

    def _check_range(self, l, m):
        if not (0 <= l <= m <= self.kappa):
            raise IndexError(f"block range [{l},{m}] outside 0..{self.kappa}")


def _atol(seq: MatrixSeq, tol: Tolerances) -> float:
    # absolute singular-value floor tied to the input scale
    return tol.rank_rtol * (1.0 + seq.scale())


def truncate(seq: MatrixSeq, m: int) -> MatrixSeq:
    """Keep items 0..m."""
    if not (0 <= m <= seq.kappa):
        raise IndexError(f"truncation index {m} outside 0..{seq.kappa}")
    return MatrixSeq(seq.items[: m + 1])


def hankel(seq: MatrixSeq, n: int) -> np.ndarray:
    """H_n = [s_{j+k}]_{j,k=0..n}; requires 2n <= kappa."""
    if not (0 <= 2 * n <= seq.kappa):
        raise IndexError(f"H_{n} needs 2n <= kappa = {seq.kappa}")
    return np.block([[seq[j + k] for k in range(n + 1)] for j in range(n + 1)])


def k_hankel(seq: MatrixSeq, n: int) -> np.ndarray:
    """K_n = [s_{j+k+1}]_{j,k=0..n}; requires 2n+1 <= kappa."""
    if not (0 <= 2 * n + 1 <= seq.kappa):
        raise IndexError(f"K_{n} needs 2n+1 <= kappa = {seq.kappa}")
    return np.block([[seq[j + k + 1] for k in range(n + 1)] for j in range(n + 1)])


def reciprocal(seq: MatrixSeq, tol: Tolerances = DEFAULT) -> MatrixSeq:
    """Cauchy-product quasi-inverse: s0# = s0^+, sk# = -s0^+ sum s_{k-j} sj#."""
    return MatrixSeq(_reciprocal_items(list(seq.items), tol, _atol(seq, tol)))


def _reciprocal_items(items, tol, atol):
    s0p = matkit.pinv(items[0], tol, atol=atol)
    out = [s0p]
    for k in range(1, len(items)):
        acc = items[k] @ out[0]
        for j in range(1, k):
            acc = acc + items[k - j] @ out[j]
        out.append(-s0p @ acc)
    return out


def _first_transform_items(items, tol, atol):
    rec = _reciprocal_items(items, tol, atol)
    s0 = items[0]
    return [-s0 @ rec[j + 2] @ s0 for j in range(len(items) - 2)]


def schur_transform(seq: MatrixSeq, k: int, tol: Tolerances = DEFAULT) -> MatrixSeq:
    """k-fold Schur transform s^(k); length drops by 2 per step (2k <= kappa)."""
    if k < 0 or 2 * k > seq.kappa:
        raise IndexError(f"transform order {k} needs 2k <= kappa = {seq.kappa}")
    cur = list(seq.items)
    atol = _atol(seq, tol)
    for _ in range(k):
        cur = _first_transform_items(cur, tol, atol)
    return MatrixSeq(cur)


@dataclass(frozen=True)
class HankelParam:
    """Canonical Hankel parametrization ([C_k], [D_k]) plus the intermediate
    matrices retained per admissible index n."""

    C: tuple  # C_1..C_m   (k-th entry at index k-1)
    D: tuple  # D_0..D_m'
    H: tuple
    K: tuple
    M: tuple
    N: tuple
    Sigma: tuple
    Lam: tuple
    L: tuple


def canonical_param(seq: MatrixSeq, tol: Tolerances = DEFAULT) -> HankelParam:
    """C_k = s_{2k-1} - Lambda_{k-1} (2k-1 <= kappa), D_k = L_k (2k <= kappa)."""
    q = seq.q
    kappa = seq.kappa
    atol = _atol(seq, tol)
    zeros = np.zeros((q, q), dtype=complex)

    n_even = kappa // 2                 # largest n with 2n <= kappa
    Hs = [hankel(seq, n) for n in range(n_even + 1)]
    Hp = [matkit.pinv(H, tol, atol=atol) for H in Hs]
    Ks = [k_hankel(seq, n) for n in range((kappa - 1) // 2 + 1)] if kappa >= 1 else []

    Ms, Ns, Sigmas, Lams, Ls = [zeros.copy()], [zeros.copy()], [zeros.copy()], [], [seq[0]]
    Lams.append(zeros.copy())  # Lambda_0 = 0
    for n in range(1, n_even + 1):
        Hpm = Hp[n - 1]
        Ms.append(seq.z_block(n, 2 * n - 1) @ Hpm @ seq.y_block(n + 1, 2 * n))
        Ns.append(seq.z_block(n + 1, 2 * n) @ Hpm @ seq.y_block(n, 2 * n - 1))
        Sigmas.append(
            seq.z_block(n, 2 * n - 1) @ Hpm @ Ks[n - 1] @ Hpm @ seq.y_block(n, 2 * n - 1)
        )
        Lams.append(Ms[n] + Ns[n] - Sigmas[n])
        Ls.append(seq[2 * n] - seq.z_block(n, 2 * n - 1) @ Hpm @ seq.y_block(n, 2 * n - 1))

    Cs = []
    for k in range(1, kappa + 1):
        if 2 * k - 1 > kappa:
            break
        Cs.append(seq[2 * k - 1] - Lams[k - 1])

    return HankelParam(
        C=tuple(Cs),
        D=tuple(Ls),
        H=tuple(Hs),
        K=tuple(Ks),
        M=tuple(Ms),
        N=tuple(Ns),
        Sigma=tuple(Sigmas),
        Lam=tuple(Lams[: n_even + 1]),
        L=tuple(Ls),
    )


def is_hnnd(seq: MatrixSeq, tol: Tolerances = DEFAULT) -> bool:
    """Every admissible block Hankel matrix H_n is PSD."""
    return all(matkit.is_psd(hankel(seq, n), tol) for n in range(seq.kappa // 2 + 1))


def is_hpd(seq: MatrixSeq, tol: Tolerances = DEFAULT) -> bool:
    """Every admissible block Hankel matrix H_n is positive definite."""
    return all(matkit.is_pd(hankel(seq, n), tol) for n in range(seq.kappa // 2 + 1))


def _all_hermitian(seq: MatrixSeq, tol: Tolerances) -> bool:
    return all(matkit.is_hermitian(s, tol) for s in seq.items)


def is_hnnd_extendable(seq: MatrixSeq, tol: Tolerances = DEFAULT) -> bool:
    """Membership test for Hankel nonnegative-definite extendable data.

    Odd kappa = 2n+1: H_n PSD, all items Hermitian, and the column
    (s_{n+1}; ...; s_{2n+1}) lies in ran(H_n); the extension
    s_{2n+2} = z H_n^+ y then closes a PSD H_{n+1}.

    Even kappa = 2n: decided constructively by appending the canonical
    odd term s_{2n+1} = Lambda_n and applying the odd test.
    """
    if not _all_hermitian(seq, tol):
        return False
    n = seq.kappa // 2
    if not matkit.is_psd(hankel(seq, n), tol):
        return False
    if seq.kappa % 2 == 1:
        y = seq.y_block(n + 1, 2 * n + 1)
        return matkit.range_contained(y, hankel(seq, n), tol)
    lam_n = canonical_param(seq, tol).Lam[n]
    ext = MatrixSeq(list(seq.items) + [lam_n])
    y = ext.y_block(n + 1, 2 * n + 1)
    return matkit.range_contained(y, hankel(seq, n), tol)


def canonical_extension(seq: MatrixSeq, tol: Tolerances = DEFAULT) -> MatrixSeq:
    """Append the canonical next term(s) so the result has even length 2n+2.

    Even input (kappa = 2n): appends s_{2n+1} = Lambda_n and
    s_{2n+2} = z H_n^+ y.  Odd input: appends s_{2n+2} only.  The output
    is Hankel nonnegative definite iff the input was extendable.
    """
    items = list(seq.items)
    if seq.kappa % 2 == 0:
        n = seq.kappa // 2
        items.append(canonical_param(seq, tol).Lam[n])
    ext = MatrixSeq(items)
    n = (ext.kappa - 1) // 2
    H = hankel(ext, n)
    Hp = matkit.pinv(H, tol, atol=_atol(ext, tol))
    y = ext.y_block(n + 1, 2 * n + 1)
    z = ext.z_block(n + 1, 2 * n + 1)
    items.append(z @ Hp @ y)
    return MatrixSeq(items)


def is_first_term_dominated(seq: MatrixSeq, tol: Tolerances = DEFAULT) -> bool:
    """ker(s_0) inside every ker(s_j) and every ran(s_j) inside ran(s_0)."""
    s0 = seq[0]
    for s in seq.items[1:]:
        if not matkit.kernel_contained(s0, s, tol):
            return False
        if not matkit.range_contained(s, s0, tol):
            return False
    return True


def random_extendable_seq(
    q: int,
    kappa: int,
    atom_budget: int = 4,
    rng_seed: int | np.random.Generator = 0,
    **measure_kwargs,
):
    """Draw a molecular measure and return (its moment prefix, the measure).

    The sequence is Hankel nonnegative-definite extendable by
    construction, since it consists of genuine power moments.
    """
    rng = (
        rng_seed
        if isinstance(rng_seed, np.random.Generator)
        else np.random.default_rng(rng_seed)
    )
    sigma = random_measure(q, rng, max_atoms=atom_budget, **measure_kwargs)
    return sigma.moments_prefix(kappa), sigma
