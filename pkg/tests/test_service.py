import numpy as np
import pytest
from fastapi.testclient import TestClient

from momentforge.serialize import cmatrix_from_json, seq_from_json, seq_to_json
from momentforge.seqkit import MatrixSeq
from momentforge.service import create_app


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


def scalar_seq_doc(*vals):
    return seq_to_json(MatrixSeq([np.array([[complex(v)]]) for v in vals]))


def test_health(client):
    assert client.get("/health").json() == {"status": "ok"}


def test_gen_deterministic(client):
    a = client.post("/gen", json={"q": 2, "kappa": 3, "atoms": 3, "seed": 5}).json()
    b = client.post("/gen", json={"q": 2, "kappa": 3, "atoms": 3, "seed": 5}).json()
    assert a == b
    c = client.post("/gen", json={"q": 2, "kappa": 3, "atoms": 3, "seed": 6}).json()
    assert c != a


def test_gen_check_solve_verify_flow(client):
    gen = client.post("/gen", json={"q": 2, "kappa": 4, "atoms": 3, "seed": 11}).json()
    chk = client.post("/check", json={"seq": gen["seq"]}).json()
    assert chk["extendable"] and chk["parity"] == "even"
    param = {"kind": "zero", "q": chk["rank"]} if chk["rank"] else None
    body = {"seq": gen["seq"]}
    if param:
        body["param"] = param
    sol = client.post("/solve", json=body)
    assert sol.status_code == 200
    ver = client.post("/verify", json={"seq": gen["seq"], "fn": sol.json()["fn"]}).json()
    assert ver["passed"], ver["verdicts"]
    rec = client.post("/recover", json={"seq": gen["seq"], "solution": sol.json()["fn"]})
    assert rec.status_code == 200
    assert rec.json()["provenance"]["path"] == "forward-chain-compression"


def test_schur_endpoint(client):
    out = client.post("/schur", json={"seq": scalar_seq_doc(1, 0, 1), "k": 1}).json()
    seq = seq_from_json(out["seq"])
    assert np.isclose(seq[0][0, 0], 1.0)


def test_resolvent_endpoint(client):
    out = client.post(
        "/resolvent", json={"seq": scalar_seq_doc(1, 0, 0), "m": 2, "kind": "V"}
    ).json()
    assert out["resolvent"]["m"] == 2
    kinds = [f["kind"] for f in out["resolvent"]["factors"]]
    assert kinds == ["V", "v"]


def test_determinate_endpoint(client):
    out = client.post("/determinate", json={"seq": scalar_seq_doc(1, 0, 0)})
    assert out.status_code == 200
    assert out.json()["provenance"]["rank"] == 0


def test_moments_endpoint(client):
    fn = {
        "kind": "stieltjes_of",
        "sigma": {
            "q": 1,
            "atoms": [{"t": 1.0, "mass": {"rows": 1, "cols": 1, "re": [1.0], "im": [0.0]}}],
        },
    }
    out = client.post("/moments", json={"fn": fn, "m": 2}).json()
    vals = [cmatrix_from_json(m)[0, 0] for m in out["seq"]["items"]]
    assert np.allclose(vals, [1, 1, 1], atol=1e-6)
    assert all(out["converged"])


def test_roundtrip_endpoint(client):
    out = client.post("/roundtrip", json={"q": 1, "kappa": 2, "seed": 3, "n": 4}).json()
    assert out["passed"] and out["max_residual"] <= out["tol"]
    assert len(out["instances"]) == 4


def test_not_extendable_maps_to_409(client):
    resp = client.post("/solve", json={"seq": scalar_seq_doc(0, 1)})
    assert resp.status_code == 409
    assert resp.json()["kind"] == "NotExtendableError"


def test_contract_error_maps_to_422(client):
    resp = client.post(
        "/solve", json={"seq": scalar_seq_doc(1, 0, 0), "param": {"kind": "zero", "q": 1}}
    )
    assert resp.status_code == 422
    assert resp.json()["kind"] == "ContractError"


def test_malformed_document_rejected(client):
    resp = client.post("/check", json={"seq": {"q": 1, "items": []}})
    assert resp.status_code in (409, 422)


def test_range_errors_map_to_422(client):
    resp = client.post("/schur", json={"seq": scalar_seq_doc(1, 0, 1), "k": 4})
    assert resp.status_code == 422 and resp.json()["kind"] == "IndexError"
    resp = client.post("/resolvent", json={"seq": scalar_seq_doc(1, 0, 1), "m": 9})
    assert resp.status_code == 422
    fn = {"kind": "zero", "q": 1}
    resp = client.post(
        "/verify", json={"seq": scalar_seq_doc(0, 0), "fn": fn, "rays": [0.0, 1.0]}
    )
    assert resp.status_code == 422 and "ray" in resp.json()["error"]
    resp = client.post(
        "/check",
        json={"seq": scalar_seq_doc(1), "tol": {"rank_rtol": 2.0, "psd_atol": 1e-9, "eq_atol": 1e-9}},
    )
    assert resp.status_code == 422


def test_tolerance_override(client):
    # absurdly loose PSD floor lets a slightly indefinite sequence pass
    seq = scalar_seq_doc(1, 0, -1e-6)
    strict = client.post("/check", json={"seq": seq}).json()
    loose = client.post(
        "/check",
        json={"seq": seq, "tol": {"rank_rtol": 1e-10, "psd_atol": 1e-3, "eq_atol": 1e-3}},
    ).json()
    assert not strict["extendable"] and loose["extendable"]
