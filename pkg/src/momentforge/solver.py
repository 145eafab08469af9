"""Full parametrization of the truncated moment problem's solution set:
open a problem from moment data, map parameters to solutions through the
resolvent LFT, detect determinacy, and recover the unique parameter of a
given solution through the forward transform chain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import matkit, seqkit, transforms
from .errors import ContractError, NotExtendableError
from .herglotz import Compressed, Congruence, HerglotzExpr, LFTByResolvent, Zero
from .tolerances import DEFAULT, Tolerances

__all__ = ["ParameterSlot", "Problem", "open_problem", "solve", "determinate_solution", "recover_parameter"]

#: L_n counts as zero when ||L_n|| <= DET_RTOL * (1 + ||s_{2n}||)
DET_RTOL = 1e-10


@dataclass(frozen=True)
class ParameterSlot:
    """Where the free parameter lives: an r-dimensional corner carried into
    q x q space by the isometry U (columns spanning ran L_n).  r = 0 marks
    the determinate case."""

    r: int
    u: np.ndarray  # q x r, U*U = I_r
    parameter_class: str  # "vanishing-linear-growth" (even) | "vanishing-boundary-value" (odd)


@dataclass(frozen=True)
class Problem:
    seq: seqkit.MatrixSeq
    parity: str  # "even" | "odd"
    n: int
    l_matrix: np.ndarray  # L_n
    slot: ParameterSlot
    tol: Tolerances

    @property
    def q(self) -> int:
        return self.seq.q

    @property
    def determinate(self) -> bool:
        return self.slot.r == 0

    def provenance(self, path: str) -> dict:
        return {
            "path": path,
            "parity": self.parity,
            "n": self.n,
            "q": self.q,
            "rank": self.slot.r,
        }


def open_problem(seq: seqkit.MatrixSeq, tol: Tolerances = DEFAULT) -> Problem:
    """Validate extendability and fix the parameter slot.

    Raises NotExtendableError when the data admits no nonnegative
    Hankel extension (the solution set is then empty).
    """
    if not seqkit.is_hnnd_extendable(seq, tol):
        raise NotExtendableError(
            "sequence is not Hankel nonnegative definite extendable; no solutions exist"
        )
    parity = "even" if seq.kappa % 2 == 0 else "odd"
    n = seq.kappa // 2
    L = seqkit.canonical_param(seq, tol).L[n]
    scale = 1 + matkit.opnorm(seq[2 * n])
    if matkit.opnorm(L) <= DET_RTOL * scale:
        r = 0
        U = np.zeros((seq.q, 0), dtype=complex)
    else:
        r = matkit.rank(L, tol, atol=tol.rank_rtol * scale)
        U = matkit.orthonormal_range_basis(L, tol)[:, :r]
    klass = "vanishing-linear-growth" if parity == "even" else "vanishing-boundary-value"
    return Problem(
        seq=seq,
        parity=parity,
        n=n,
        l_matrix=L,
        slot=ParameterSlot(r=r, u=U, parameter_class=klass),
        tol=tol,
    )


def solve(p: Problem, f: HerglotzExpr | None) -> HerglotzExpr:
    """Solution attached to the parameter f of size r (None when r = 0).

    The parameter must belong to the slot's class: functions with
    ``||f(iy)||/y -> 0`` for even problems, and additionally
    ``f(iy) -> 0`` for odd problems.  Membership is the caller's
    responsibility (it is not finitely decidable); the verify module
    checks the output against the data regardless.
    """
    if p.slot.r == 0:
        if f is not None and f.q != 0:
            raise ContractError("determinate problem takes no parameter (rank 0 slot)")
        return determinate_solution(p)
    if f is None or f.q != p.slot.r:
        got = None if f is None else f.q
        raise ContractError(f"parameter must have size r={p.slot.r}, got {got}")
    V = transforms.resolvent_v(p.seq, p.seq.kappa, p.tol)
    return LFTByResolvent(V, Compressed(p.slot.u, f))


def determinate_solution(p: Problem) -> HerglotzExpr:
    """The unique solution when L_n = 0: the v12 v22^{-1} corner of the
    resolvent, realized as the LFT at the zero parameter.

    The corner denominator is provably invertible off the real axis for
    determinate data; sample evaluations assert that here so a violation
    (wrongly classified data) surfaces at construction, not downstream.
    """
    if p.slot.r != 0:
        raise ContractError(f"problem is indeterminate (rank {p.slot.r} > 0)")
    V = transforms.resolvent_v(p.seq, p.seq.kappa, p.tol)
    F = LFTByResolvent(V, Zero(p.q))
    for z in (1j, -0.7 + 2j):
        F.eval(z)  # raises SingularLftError if the corner degenerates
    return F


def recover_parameter(p: Problem, F: HerglotzExpr) -> HerglotzExpr:
    """Unique parameter of a solution F: compress the forward transform
    chain image back to the r-dimensional slot.

    Uses the chain rather than a numerical inversion of the LFT: the
    chain is the exact inverse map and avoids 2q x 2q solves at every
    evaluation point.
    """
    if F.q != p.q:
        raise ContractError(f"solution must have size {p.q}, got {F.q}")
    chain = transforms.sn_chain_forward(p.seq, F, p.n, p.parity, p.tol)
    return Congruence(p.slot.u, chain)
