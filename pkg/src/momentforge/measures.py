"""Molecular (finitely atomic) nonnegative-Hermitian matrix measures.

These are the exact oracles of the package: every moment and every value
of the associated Cauchy-kernel transform is a finite sum, so they can be
computed to machine precision and used to cross-check the algebraic and
function-theoretic algorithms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import matkit
from .errors import DomainError, ShapeError
from .tolerances import Tolerances

#: atoms closer than this (absolute) are merged on construction
MERGE_ATOL = 1e-12


@dataclass(frozen=True)
class MolecularMeasure:
    """Finitely atomic q x q matrix measure with PSD Hermitian masses.

    Atoms are normalized on construction: positions sorted, duplicates
    (within ``MERGE_ATOL``) merged by summing masses, zero masses dropped.
    """

    q: int
    atoms: tuple = field(default_factory=tuple)  # tuple[(float, ndarray), ...]

    def __post_init__(self):
        if self.q < 0:
            raise ShapeError(f"q must be nonnegative, got {self.q}")
        cleaned = []
        for t, M in self.atoms:
            t = float(t)
            if not np.isfinite(t):
                raise ShapeError("atom positions must be finite")
            M = matkit.as_cmatrix(M)
            if M.shape != (self.q, self.q):
                raise ShapeError(f"mass must be {self.q}x{self.q}, got {M.shape}")
            if not matkit.is_psd(M, Tolerances(psd_atol=1e-8, eq_atol=1e-8, rank_rtol=1e-10)):
                raise ShapeError(f"mass at t={t} is not Hermitian PSD")
            cleaned.append((t, matkit.herm_part(M)))
        cleaned.sort(key=lambda a: a[0])
        merged: list = []
        for t, M in cleaned:
            if merged and abs(t - merged[-1][0]) <= MERGE_ATOL:
                t0, M0 = merged[-1]
                merged[-1] = (t0, M0 + M)
            else:
                merged.append((t, M))
        merged = [(t, M) for t, M in merged if matkit.opnorm(M) > 0.0]
        for _, M in merged:
            M.setflags(write=False)
        object.__setattr__(self, "atoms", tuple(merged))

    @property
    def n_atoms(self) -> int:
        return len(self.atoms)

    def total_mass(self) -> np.ndarray:
        """The measure of the whole line."""
        return self.moment(0)

    def moment(self, j: int) -> np.ndarray:
        """j-th power moment, an exact finite sum."""
        if j < 0:
            raise ValueError(f"moment index must be >= 0, got {j}")
        out = np.zeros((self.q, self.q), dtype=complex)
        for t, M in self.atoms:
            out += (t ** j) * M
        return out

    def moments_prefix(self, kappa: int):
        """The sequence of moments 0..kappa (imported lazily to avoid a cycle)."""
        from .seqkit import MatrixSeq

        if kappa < 0:
            raise ValueError(f"kappa must be >= 0, got {kappa}")
        return MatrixSeq([self.moment(j) for j in range(kappa + 1)])

    def stieltjes(self, z: complex) -> np.ndarray:
        """Cauchy-kernel transform sum_k (t_k - z)^{-1} M_k, Im z > 0 only."""
        z = complex(z)
        if z.imag <= 0:
            raise DomainError(f"evaluation point must satisfy Im z > 0, got {z}")
        out = np.zeros((self.q, self.q), dtype=complex)
        for t, M in self.atoms:
            out += M / (t - z)
        return out


def moment(sigma: MolecularMeasure, j: int) -> np.ndarray:
    return sigma.moment(j)


def stieltjes_eval(sigma: MolecularMeasure, z: complex) -> np.ndarray:
    return sigma.stieltjes(z)


def moments_prefix(sigma: MolecularMeasure, kappa: int):
    return sigma.moments_prefix(kappa)


def dirac(t: float, mass) -> MolecularMeasure:
    """Point measure at t with the given PSD mass."""
    M = matkit.as_cmatrix(mass)
    return MolecularMeasure(M.shape[0], ((float(t), M),))


def zero_measure(q: int) -> MolecularMeasure:
    return MolecularMeasure(q, ())


def random_measure(
    q: int,
    rng: np.random.Generator,
    *,
    max_atoms: int = 4,
    positions: tuple = (-2.0, 2.0),
    min_separation: float = 0.5,
    eig_range: tuple = (0.3, 1.5),
    p_rank_deficient: float = 0.35,
    n_atoms: int | None = None,
) -> MolecularMeasure:
    """Draw a random molecular measure with well-separated atoms.

    Masses are random PSD matrices whose nonzero eigenvalues stay inside
    ``eig_range``; with probability ``p_rank_deficient`` a mass is made
    rank-deficient by zeroing some eigenvalues.  The separation and
    eigenvalue floors keep every block Hankel matrix built from the
    moments either cleanly rank-deficient or well-conditioned, which the
    verification tolerances rely on.
    """
    if n_atoms is None:
        n_atoms = int(rng.integers(1, max_atoms + 1))
    lo, hi = positions
    span = hi - lo
    if n_atoms > 1 and (n_atoms - 1) * min_separation > span:
        raise ValueError("atom budget incompatible with the separation constraint")
    while True:
        ts = np.sort(rng.uniform(lo, hi, size=n_atoms))
        if n_atoms == 1 or np.diff(ts).min() >= min_separation:
            break
    atoms = []
    for t in ts:
        X = rng.normal(size=(q, q)) + 1j * rng.normal(size=(q, q))
        Q, _ = np.linalg.qr(X)
        w = rng.uniform(eig_range[0], eig_range[1], size=q)
        if q > 1 and rng.random() < p_rank_deficient:
            kill = int(rng.integers(1, q))
            w[rng.choice(q, size=kill, replace=False)] = 0.0
        atoms.append((float(t), (Q * w) @ Q.conj().T))
    return MolecularMeasure(q, tuple(atoms))
