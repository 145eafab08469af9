"""Command-line front end.

The CLI is a thin client of the HTTP service: every subcommand loads its
JSON inputs, posts one request, and writes the JSON response (plus a run
manifest) to stdout or --out.  By default the service runs in-process
over an ASGI transport, so no server or network is needed; point
--server at a URL to talk to a remote instance instead.

Exit codes: 0 success/pass, 1 verification failure, 2 usage or contract
error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import httpx

from .tolerances import PROFILES

ENV_PROFILE = "MOMENTFORGE_TOL_PROFILE"


def _client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=600.0)
    # in-process mode: drive the ASGI app directly through the sync portal
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from starlette.testclient import TestClient

    from .service import create_app

    return TestClient(create_app(), raise_server_exceptions=False)


def _load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read {path}: {exc}", file=sys.stderr)
        raise SystemExit(2)


def _tol_doc(args) -> dict | None:
    """Resolve tolerances: profile/env/config file first, flags win."""
    base = None
    profile_name = getattr(args, "tol_profile", None) or os.environ.get(ENV_PROFILE)
    if profile_name:
        try:
            p = PROFILES[profile_name]
        except KeyError:
            print(f"error: unknown tolerance profile {profile_name!r}", file=sys.stderr)
            raise SystemExit(2)
        base = {"rank_rtol": p.rank_rtol, "psd_atol": p.psd_atol, "eq_atol": p.eq_atol}
    if getattr(args, "config", None):
        cfg = _load_json(args.config)
        base = {**(base or {}), **{k: cfg[k] for k in ("rank_rtol", "psd_atol", "eq_atol") if k in cfg}}
    overrides = {}
    if getattr(args, "tol_rank", None) is not None:
        overrides["rank_rtol"] = args.tol_rank
    if getattr(args, "tol_psd", None) is not None:
        overrides["psd_atol"] = args.tol_psd
    if getattr(args, "tol_eq", None) is not None:
        overrides["eq_atol"] = args.tol_eq
    if base is None and not overrides:
        return None
    doc = {"rank_rtol": 1e-10, "psd_atol": 1e-9, "eq_atol": 1e-9}
    doc.update(base or {})
    doc.update(overrides)
    return doc


def _emit(args, payload: dict, manifest: dict) -> None:
    doc = dict(payload)
    doc["manifest"] = manifest
    text = json.dumps(doc, indent=2)
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
        print(f"wrote {args.out}", file=sys.stderr)
    else:
        print(text)


def _post(client: httpx.Client, path: str, body: dict):
    resp = client.post(path, json=body)
    if resp.status_code != 200:
        try:
            detail = resp.json()
        except ValueError:
            detail = {"error": resp.text}
        print(f"error ({resp.status_code}): {detail.get('error', detail)}", file=sys.stderr)
        raise SystemExit(2)
    return resp.json()


def _manifest(args, started: float, inputs: dict, tol: dict | None) -> dict:
    return {
        "command": args.command,
        "inputs": inputs,
        "seed": getattr(args, "seed", None),
        "tolerances": tol,
        "out": getattr(args, "out", None),
        "wall_clock_s": round(time.monotonic() - started, 6),
    }


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--out", help="write the JSON result here instead of stdout")
    p.add_argument("--server", help="base URL of a running service (default: in-process)")
    p.add_argument("--tol-rank", type=float, dest="tol_rank", help="rank cutoff rank_rtol")
    p.add_argument("--tol-psd", type=float, dest="tol_psd", help="PSD eigenvalue floor psd_atol")
    p.add_argument("--tol-eq", type=float, dest="tol_eq", help="equality floor eq_atol")
    p.add_argument("--tol-profile", dest="tol_profile", help="named tolerance preset")
    p.add_argument("--config", help="JSON config file with tolerance fields")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="momentforge",
        description="Truncated matricial Hamburger moment problems: "
        "generate, check, solve, recover, verify.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="draw a random measure and emit it with its moments")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--kappa", type=int, required=True)
    p.add_argument("--atoms", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    _add_common(p)

    p = sub.add_parser("check", help="membership tests for a moment sequence")
    p.add_argument("--seq", required=True)
    _add_common(p)

    p = sub.add_parser("schur", help="k-th Schur transform of a sequence")
    p.add_argument("--seq", required=True)
    p.add_argument("--k", type=int, required=True)
    _add_common(p)

    p = sub.add_parser("resolvent", help="resolvent matrix polynomial of a sequence")
    p.add_argument("--seq", required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--kind", choices=("V", "W"), default="V")
    _add_common(p)

    p = sub.add_parser("solve", help="solution attached to a parameter function")
    p.add_argument("--seq", required=True)
    p.add_argument("--param", help="parameter function JSON (omit for determinate data)")
    _add_common(p)

    p = sub.add_parser("determinate", help="the unique solution of determinate data")
    p.add_argument("--seq", required=True)
    _add_common(p)

    p = sub.add_parser("recover", help="recover the parameter of a solution")
    p.add_argument("--seq", required=True)
    p.add_argument("--solution", required=True)
    _add_common(p)

    p = sub.add_parser("verify", help="asymptotic residual check of a candidate solution")
    p.add_argument("--seq", required=True)
    p.add_argument("--fn", required=True)
    p.add_argument("--rays", type=float, nargs="+", help="ray angles in radians, inside (0, pi)")
    p.add_argument("--ygrid", type=float, nargs="+", help="radial grid (geometric recommended)")
    _add_common(p)

    p = sub.add_parser("moments", help="extract moments of a function from its decay")
    p.add_argument("--fn", required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--ygrid", type=float, nargs="+")
    _add_common(p)

    p = sub.add_parser("roundtrip", help="solve/recover roundtrip experiment")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--kappa", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=1)
    _add_common(p)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8321)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "serve":
        import uvicorn

        from .service import create_app

        uvicorn.run(create_app(), host=args.host, port=args.port)
        return 0

    tol = _tol_doc(args)
    started = time.monotonic()
    inputs = {}
    with _client(args.server) as client:
        if args.command == "gen":
            body = {"q": args.q, "kappa": args.kappa, "atoms": args.atoms, "seed": args.seed}
            if tol:
                body["tol"] = tol
            out = _post(client, "/gen", body)
            _emit(args, out, _manifest(args, started, inputs, tol))
            return 0

        if args.command == "check":
            inputs["seq"] = args.seq
            body = {"seq": _load_json(args.seq)}
            if tol:
                body["tol"] = tol
            out = _post(client, "/check", body)
            _emit(args, out, _manifest(args, started, inputs, tol))
            if not out["extendable"]:
                print("not Hankel nonnegative definite extendable", file=sys.stderr)
                return 1
            return 0

        if args.command == "schur":
            inputs["seq"] = args.seq
            body = {"seq": _load_json(args.seq), "k": args.k}
            if tol:
                body["tol"] = tol
            out = _post(client, "/schur", body)
            _emit(args, out, _manifest(args, started, inputs, tol))
            return 0

        if args.command == "resolvent":
            inputs["seq"] = args.seq
            body = {"seq": _load_json(args.seq), "m": args.m, "kind": args.kind}
            if tol:
                body["tol"] = tol
            out = _post(client, "/resolvent", body)
            _emit(args, out, _manifest(args, started, inputs, tol))
            return 0

        if args.command == "solve":
            inputs["seq"] = args.seq
            body = {"seq": _load_json(args.seq)}
            if args.param:
                inputs["param"] = args.param
                body["param"] = _load_json(args.param)
            if tol:
                body["tol"] = tol
            out = _post(client, "/solve", body)
            _emit(args, out, _manifest(args, started, inputs, tol))
            return 0

        if args.command == "determinate":
            inputs["seq"] = args.seq
            body = {"seq": _load_json(args.seq)}
            if tol:
                body["tol"] = tol
            out = _post(client, "/determinate", body)
            _emit(args, out, _manifest(args, started, inputs, tol))
            return 0

        if args.command == "recover":
            inputs.update(seq=args.seq, solution=args.solution)
            body = {"seq": _load_json(args.seq), "solution": _load_json(args.solution)}
            if tol:
                body["tol"] = tol
            out = _post(client, "/recover", body)
            _emit(args, out, _manifest(args, started, inputs, tol))
            return 0

        if args.command == "verify":
            inputs.update(seq=args.seq, fn=args.fn)
            body = {"seq": _load_json(args.seq), "fn": _load_json(args.fn)}
            if args.rays:
                body["rays"] = args.rays
            if args.ygrid:
                body["r_grid"] = args.ygrid
            if tol:
                body["tol"] = tol
            out = _post(client, "/verify", body)
            _emit(args, out, _manifest(args, started, inputs, tol))
            return 0 if out["passed"] else 1

        if args.command == "moments":
            inputs["fn"] = args.fn
            body = {"fn": _load_json(args.fn), "m": args.m}
            if args.ygrid:
                body["y_grid"] = args.ygrid
            if tol:
                body["tol"] = tol
            out = _post(client, "/moments", body)
            _emit(args, out, _manifest(args, started, inputs, tol))
            return 0 if all(out["converged"]) else 1

        if args.command == "roundtrip":
            body = {"q": args.q, "kappa": args.kappa, "seed": args.seed, "n": args.n}
            if tol:
                body["tol"] = tol
            out = _post(client, "/roundtrip", body)
            _emit(args, out, _manifest(args, started, inputs, tol))
            return 0 if out["passed"] else 1

    raise SystemExit(2)  # pragma: no cover


if __name__ == "__main__":
    sys.exit(main())
