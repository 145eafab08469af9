"""Pydantic request/response models for the HTTP surface.

Matrices, sequences and measures are modeled structurally; expression
trees and resolvents travel as tagged-union dicts validated by the core
codecs (momentforge.serialize), which own the node grammar.
"""

from __future__ import annotations

from typing import Any, Literal, Optional

from pydantic import BaseModel, Field


class MatrixDoc(BaseModel):
    rows: int
    cols: int
    re: list[float]
    im: list[float]


class SeqDoc(BaseModel):
    q: int
    items: list[MatrixDoc]


class AtomDoc(BaseModel):
    t: float
    mass: MatrixDoc


class MeasureDoc(BaseModel):
    q: int
    atoms: list[AtomDoc]


class TolDoc(BaseModel):
    rank_rtol: float = 1e-10
    psd_atol: float = 1e-9
    eq_atol: float = 1e-9


class GenRequest(BaseModel):
    q: int = Field(ge=1, le=8)
    kappa: int = Field(ge=0, le=24)
    atoms: int = Field(default=4, ge=1, le=12)
    seed: int = 0
    tol: Optional[TolDoc] = None


class GenResponse(BaseModel):
    measure: MeasureDoc
    seq: SeqDoc


class CheckRequest(BaseModel):
    seq: SeqDoc
    tol: Optional[TolDoc] = None


class CheckResponse(BaseModel):
    q: int
    kappa: int
    hankel_nonneg_definite: bool
    hankel_pos_definite: bool
    extendable: bool
    first_term_dominated: bool
    parity: Optional[str] = None
    n: Optional[int] = None
    rank: Optional[int] = None
    determinate: Optional[bool] = None
    l_norm: Optional[float] = None


class SchurRequest(BaseModel):
    seq: SeqDoc
    k: int = Field(ge=0)
    tol: Optional[TolDoc] = None


class SchurResponse(BaseModel):
    seq: SeqDoc


class ResolventRequest(BaseModel):
    seq: SeqDoc
    m: int = Field(ge=0)
    kind: Literal["V", "W"] = "V"
    tol: Optional[TolDoc] = None


class ResolventResponse(BaseModel):
    resolvent: dict


class SolveRequest(BaseModel):
    seq: SeqDoc
    param: Optional[dict] = None  # HerglotzExpr document
    tol: Optional[TolDoc] = None


class FnResponse(BaseModel):
    fn: dict
    provenance: dict


class RecoverRequest(BaseModel):
    seq: SeqDoc
    solution: dict  # HerglotzExpr document
    tol: Optional[TolDoc] = None


class VerifyRequest(BaseModel):
    seq: SeqDoc
    fn: dict
    rays: Optional[list[float]] = None
    r_grid: Optional[list[float]] = None
    tol: Optional[TolDoc] = None


class VerifyResponse(BaseModel):
    kappa: int
    rays: list[float]
    r_grid: list[float]
    mode: str
    curves: dict[str, Any]
    floors: dict[str, Any]
    verdicts: dict[str, str]
    thresholds: dict[str, Any]
    passed: bool
    extraction: Optional[dict] = None


class MomentsRequest(BaseModel):
    fn: dict
    m: int = Field(ge=0, le=24)
    y_grid: Optional[list[float]] = None
    tol: Optional[TolDoc] = None


class MomentsResponse(BaseModel):
    q: int
    seq: SeqDoc
    residuals: list[float]
    converged: list[bool]
    y_span: list[float]


class RoundtripRequest(BaseModel):
    q: int = Field(ge=1, le=8)
    kappa: int = Field(ge=0, le=24)
    seed: int = 0
    n: int = Field(default=1, ge=1, le=1000)
    tol: Optional[TolDoc] = None


class RoundtripResponse(BaseModel):
    passed: bool
    max_residual: float
    tol: float
    instances: list[dict]


class ErrorResponse(BaseModel):
    error: str
    kind: str
