"""FastAPI application exposing the solver pipelines over JSON."""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import pipelines
from ..errors import (
    ContractError,
    DomainError,
    MomentForgeError,
    NotExtendableError,
    ShapeError,
    SingularLftError,
)
from ..serialize import fn_from_json, seq_from_json
from ..tolerances import DEFAULT, Tolerances
from . import schemas as S


def _tol(doc) -> Tolerances:
    if doc is None:
        return DEFAULT
    return Tolerances(rank_rtol=doc.rank_rtol, psd_atol=doc.psd_atol, eq_atol=doc.eq_atol)


def _seq(doc: S.SeqDoc):
    return seq_from_json(doc.model_dump())


def create_app() -> FastAPI:
    app = FastAPI(
        title="momentforge",
        description="Truncated matricial Hamburger moment problems: "
        "generate, check, solve, recover, verify.",
        version="0.1.0",
    )

    @app.exception_handler(MomentForgeError)
    async def _domain_error(request: Request, exc: MomentForgeError):
        status = 422 if isinstance(exc, (ShapeError, DomainError, ContractError)) else 409
        if isinstance(exc, (NotExtendableError, SingularLftError)):
            status = 409
        return JSONResponse(
            status_code=status,
            content={"error": str(exc), "kind": type(exc).__name__},
        )

    @app.exception_handler(IndexError)
    async def _index_error(request: Request, exc: IndexError):
        # out-of-range transform orders, block indices, grid shapes
        return JSONResponse(status_code=422, content={"error": str(exc), "kind": "IndexError"})

    @app.exception_handler(ValueError)
    async def _value_error(request: Request, exc: ValueError):
        return JSONResponse(status_code=422, content={"error": str(exc), "kind": "ValueError"})

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.post("/gen", response_model=S.GenResponse)
    def gen(req: S.GenRequest):
        return pipelines.run_gen(req.q, req.kappa, req.atoms, req.seed, _tol(req.tol))

    @app.post("/check", response_model=S.CheckResponse)
    def check(req: S.CheckRequest):
        return pipelines.run_check(_seq(req.seq), _tol(req.tol))

    @app.post("/schur", response_model=S.SchurResponse)
    def schur(req: S.SchurRequest):
        return pipelines.run_schur(_seq(req.seq), req.k, _tol(req.tol))

    @app.post("/resolvent", response_model=S.ResolventResponse)
    def resolvent(req: S.ResolventRequest):
        return pipelines.run_resolvent(_seq(req.seq), req.m, req.kind, _tol(req.tol))

    @app.post("/solve", response_model=S.FnResponse)
    def solve(req: S.SolveRequest):
        param = fn_from_json(req.param) if req.param is not None else None
        return pipelines.run_solve(_seq(req.seq), param, _tol(req.tol))

    @app.post("/determinate", response_model=S.FnResponse)
    def determinate(req: S.CheckRequest):
        return pipelines.run_determinate(_seq(req.seq), _tol(req.tol))

    @app.post("/recover", response_model=S.FnResponse)
    def recover(req: S.RecoverRequest):
        return pipelines.run_recover(_seq(req.seq), fn_from_json(req.solution), _tol(req.tol))

    @app.post("/verify", response_model=S.VerifyResponse)
    def verify_route(req: S.VerifyRequest):
        return pipelines.run_verify(
            _seq(req.seq),
            fn_from_json(req.fn),
            rays=req.rays,
            r_grid=req.r_grid,
            tol=_tol(req.tol),
        )

    @app.post("/moments", response_model=S.MomentsResponse)
    def moments(req: S.MomentsRequest):
        return pipelines.run_moments(fn_from_json(req.fn), req.m, req.y_grid, _tol(req.tol))

    @app.post("/roundtrip", response_model=S.RoundtripResponse)
    def roundtrip(req: S.RoundtripRequest):
        return pipelines.run_roundtrip(req.q, req.kappa, req.seed, req.n, _tol(req.tol))

    return app


app = create_app()
