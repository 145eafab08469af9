"""Orchestration of the generate / check / solve / recover / verify
workflows over JSON-shaped payloads.  The service routes and the CLI are
thin wrappers around these functions; no logic lives only in a frontend.
"""

from __future__ import annotations

import numpy as np

from . import matkit, seqkit, solver, transforms, verify
from .errors import ContractError
from .herglotz import Const, HerglotzExpr, StieltjesOf, Zero
from .measures import random_measure
from .seqkit import MatrixSeq
from .serialize import (
    fn_to_json,
    measure_to_json,
    resolvent_to_json,
    seq_to_json,
)
from .tolerances import DEFAULT, Tolerances

__all__ = [
    "run_gen",
    "run_check",
    "run_schur",
    "run_resolvent",
    "run_solve",
    "run_determinate",
    "run_recover",
    "run_verify",
    "run_moments",
    "run_roundtrip",
    "roundtrip_grid",
    "parameter_gallery",
]

#: moderate-|z| grid used for pointwise roundtrip certification; chain
#: evaluations lose ~|z|^(2 levels) digits, so the radii stay small
ROUNDTRIP_RADII = (0.5, 1.2, 2.4, 5.0)
ROUNDTRIP_ANGLES = (np.pi / 6, np.pi / 2, 5 * np.pi / 6)
ROUNDTRIP_TOL = 1e-8
ROUNDTRIP_DPS = 40


def roundtrip_grid():
    return [r * np.exp(1j * th) for r in ROUNDTRIP_RADII for th in ROUNDTRIP_ANGLES]


def run_gen(q: int, kappa: int, atoms: int, seed: int, tol: Tolerances = DEFAULT) -> dict:
    seq, sigma = seqkit.random_extendable_seq(q, kappa, atom_budget=atoms, rng_seed=seed)
    return {"measure": measure_to_json(sigma), "seq": seq_to_json(seq)}


def run_check(seq: MatrixSeq, tol: Tolerances = DEFAULT) -> dict:
    extendable = seqkit.is_hnnd_extendable(seq, tol)
    out = {
        "q": seq.q,
        "kappa": seq.kappa,
        "hankel_nonneg_definite": seqkit.is_hnnd(seq, tol),
        "hankel_pos_definite": seqkit.is_hpd(seq, tol),
        "extendable": extendable,
        "first_term_dominated": seqkit.is_first_term_dominated(seq, tol),
    }
    if extendable:
        p = solver.open_problem(seq, tol)
        out.update(
            parity=p.parity,
            n=p.n,
            rank=p.slot.r,
            determinate=p.determinate,
            l_norm=matkit.opnorm(p.l_matrix),
        )
    return out


def run_schur(seq: MatrixSeq, k: int, tol: Tolerances = DEFAULT) -> dict:
    return {"seq": seq_to_json(seqkit.schur_transform(seq, k, tol))}


def run_resolvent(seq: MatrixSeq, m: int, kind: str, tol: Tolerances = DEFAULT) -> dict:
    if kind == "V":
        rp = transforms.resolvent_v(seq, m, tol)
    elif kind == "W":
        rp = transforms.resolvent_w(seq, m, tol)
    else:
        raise ContractError(f"resolvent kind must be 'V' or 'W', got {kind!r}")
    return {"resolvent": resolvent_to_json(rp)}


def run_solve(seq: MatrixSeq, param: HerglotzExpr | None, tol: Tolerances = DEFAULT) -> dict:
    p = solver.open_problem(seq, tol)
    F = solver.solve(p, param)
    path = "determinate-closed-form" if p.determinate else "resolvent-lft"
    return {"fn": fn_to_json(F), "provenance": p.provenance(path)}


def run_determinate(seq: MatrixSeq, tol: Tolerances = DEFAULT) -> dict:
    p = solver.open_problem(seq, tol)
    F = solver.determinate_solution(p)
    return {"fn": fn_to_json(F), "provenance": p.provenance("determinate-closed-form")}


def run_recover(seq: MatrixSeq, solution: HerglotzExpr, tol: Tolerances = DEFAULT) -> dict:
    p = solver.open_problem(seq, tol)
    f = solver.recover_parameter(p, solution)
    return {"fn": fn_to_json(f), "provenance": p.provenance("forward-chain-compression")}


def run_verify(
    seq: MatrixSeq,
    F: HerglotzExpr,
    rays=None,
    r_grid=None,
    tol: Tolerances = DEFAULT,
) -> dict:
    report = verify.hn_check(F, seq, rays=rays, r_grid=r_grid, tol=tol)
    return report.to_json()


def run_moments(F: HerglotzExpr, m: int, y_grid=None, tol: Tolerances = DEFAULT) -> dict:
    res = verify.extract_moments(F, m, y_grid=y_grid, tol=tol)
    return {
        "q": F.q,
        "seq": seq_to_json(res.seq()),
        "residuals": list(res.residuals),
        "converged": list(res.converged),
        "y_span": list(res.y_span),
    }


def parameter_gallery(r: int, parity: str, rng: np.random.Generator):
    """Certified parameters for the slot: identically zero, a constant
    with PSD imaginary part (even problems only), or a Cauchy transform
    of a small random measure (both parities)."""
    kinds = ["zero", "const", "stieltjes"] if parity == "even" else ["zero", "stieltjes"]
    kind = kinds[int(rng.integers(0, len(kinds)))]
    if kind == "zero" or r == 0:
        return Zero(r)
    if kind == "const":
        c = float(rng.normal())
        d = abs(float(rng.normal()))
        return Const((c + 1j * d) * np.eye(r))
    sigma = random_measure(r, rng, max_atoms=2, p_rank_deficient=0.0)
    return StieltjesOf(sigma)


def _roundtrip_instance(q: int, kappa: int, seed: int, tol: Tolerances) -> dict:
    rng = np.random.default_rng(seed)
    seq, _sigma = seqkit.random_extendable_seq(q, kappa, atom_budget=4, rng_seed=rng)
    p = solver.open_problem(seq, tol)
    f = parameter_gallery(p.slot.r, p.parity, rng)
    F = solver.solve(p, f if p.slot.r > 0 else None)
    if p.determinate:
        return {"seed": seed, "rank": 0, "max_residual": 0.0, "determinate": True}
    fhat = solver.recover_parameter(p, F)
    rep = verify.compare(fhat, f, roundtrip_grid(), ROUNDTRIP_TOL, dps=ROUNDTRIP_DPS)
    return {
        "seed": seed,
        "rank": p.slot.r,
        "parity": p.parity,
        "max_residual": rep.max_residual,
        "determinate": False,
    }


def run_roundtrip(
    q: int, kappa: int, seed: int, n_instances: int = 1, tol: Tolerances = DEFAULT
) -> dict:
    """Solve -> recover roundtrips on generated instances; results are
    keyed by instance index so batch order never matters."""
    instances = [_roundtrip_instance(q, kappa, seed + i, tol) for i in range(n_instances)]
    worst = max(i["max_residual"] for i in instances)
    return {
        "passed": bool(worst <= ROUNDTRIP_TOL),
        "max_residual": worst,
        "tol": ROUNDTRIP_TOL,
        "instances": instances,
    }
