"""JSON codecs for every value that crosses the service or CLI boundary.

Wire formats:
  matrix    {"rows": p, "cols": q, "re": [...], "im": [...]}   row-major doubles
  sequence  {"q": q, "items": [matrix, ...]}
  measure   {"q": q, "atoms": [{"t": t, "mass": matrix}, ...]}
  function  tagged union {"kind": ..., ...} mirroring the expression nodes
  resolvent {"m": m, "q": q, "factors": [{"kind": "V"|"v"|"W"|"w", "A": matrix, "B": matrix?}, ...]}

Every emitted document re-parses to an equal value.
"""

from __future__ import annotations

import numpy as np

from . import herglotz as hg
from . import transforms as tf
from .errors import ShapeError
from .matkit import as_cmatrix
from .measures import MolecularMeasure
from .seqkit import MatrixSeq

__all__ = [
    "cmatrix_to_json",
    "cmatrix_from_json",
    "seq_to_json",
    "seq_from_json",
    "measure_to_json",
    "measure_from_json",
    "fn_to_json",
    "fn_from_json",
    "resolvent_to_json",
    "resolvent_from_json",
]


def cmatrix_to_json(M) -> dict:
    A = as_cmatrix(M)
    return {
        "rows": A.shape[0],
        "cols": A.shape[1],
        "re": [float(v) for v in A.real.ravel()],
        "im": [float(v) for v in A.imag.ravel()],
    }


def cmatrix_from_json(doc: dict) -> np.ndarray:
    try:
        rows, cols = int(doc["rows"]), int(doc["cols"])
        re = np.asarray(doc["re"], dtype=float)
        im = np.asarray(doc["im"], dtype=float)
    except (KeyError, TypeError) as exc:
        raise ShapeError(f"malformed matrix document: {exc}") from exc
    if re.shape != (rows * cols,) or im.shape != (rows * cols,):
        raise ShapeError("matrix entry arrays do not match rows*cols")
    return (re + 1j * im).reshape(rows, cols)


def seq_to_json(seq: MatrixSeq) -> dict:
    return {"q": seq.q, "items": [cmatrix_to_json(s) for s in seq.items]}


def seq_from_json(doc: dict) -> MatrixSeq:
    items = [cmatrix_from_json(d) for d in doc["items"]]
    seq = MatrixSeq(items)
    if "q" in doc and int(doc["q"]) != seq.q:
        raise ShapeError(f"declared q={doc['q']} does not match items of size {seq.q}")
    return seq


def measure_to_json(sigma: MolecularMeasure) -> dict:
    return {
        "q": sigma.q,
        "atoms": [{"t": t, "mass": cmatrix_to_json(M)} for t, M in sigma.atoms],
    }


def measure_from_json(doc: dict) -> MolecularMeasure:
    atoms = tuple((float(a["t"]), cmatrix_from_json(a["mass"])) for a in doc["atoms"])
    return MolecularMeasure(int(doc["q"]), atoms)


def resolvent_to_json(rp: tf.ResolventPoly) -> dict:
    factors = []
    for f in rp.factors:
        entry = {"kind": f.kind, "A": cmatrix_to_json(f.a)}
        if f.b is not None:
            entry["B"] = cmatrix_to_json(f.b)
        factors.append(entry)
    return {"m": rp.m, "q": rp.q, "factors": factors}


def resolvent_from_json(doc: dict) -> tf.ResolventPoly:
    factors = []
    for e in doc["factors"]:
        kind = e["kind"]
        A = cmatrix_from_json(e["A"])
        B = cmatrix_from_json(e["B"]) if "B" in e and e["B"] is not None else None
        factors.append(tf.ElementaryFactor(kind, A, B))
    return tf.ResolventPoly(tuple(factors), int(doc["q"]), int(doc["m"]))


def fn_to_json(F: hg.HerglotzExpr) -> dict:
    k = F.kind
    if k == "zero":
        return {"kind": k, "q": F.q}
    if k == "const":
        return {"kind": k, "a": cmatrix_to_json(F.a)}
    if k == "linear":
        return {"kind": k, "beta": cmatrix_to_json(F.beta)}
    if k == "nev_triple":
        return {
            "kind": k,
            "alpha": cmatrix_to_json(F.alpha),
            "beta": cmatrix_to_json(F.beta),
            "nu": measure_to_json(F.nu),
        }
    if k == "stieltjes_of":
        return {"kind": k, "sigma": measure_to_json(F.sigma)}
    if k == "gamma_mu":
        return {"kind": k, "gamma": cmatrix_to_json(F.gamma), "mu": measure_to_json(F.mu)}
    if k == "sum":
        return {"kind": k, "terms": [fn_to_json(t) for t in F.terms]}
    if k == "congruence":
        return {"kind": k, "a": cmatrix_to_json(F.a), "inner": fn_to_json(F.inner)}
    if k == "neg_pinv":
        return {"kind": k, "inner": fn_to_json(F.inner)}
    if k == "schur_plus":
        return {
            "kind": k,
            "a": cmatrix_to_json(F.a),
            "b": cmatrix_to_json(F.b),
            "inner": fn_to_json(F.inner),
        }
    if k == "schur_minus":
        return {
            "kind": k,
            "a": cmatrix_to_json(F.a),
            "b": cmatrix_to_json(F.b),
            "inner": fn_to_json(F.inner),
            "certified": F.certified,
        }
    if k == "lft_resolvent":
        return {
            "kind": k,
            "resolvent": resolvent_to_json(F.resolvent),
            "inner": fn_to_json(F.inner),
        }
    if k == "compressed":
        return {"kind": k, "u": cmatrix_to_json(F.u), "inner": fn_to_json(F.inner)}
    raise ShapeError(f"cannot serialize node kind {k!r}")


def fn_from_json(doc: dict) -> hg.HerglotzExpr:
    try:
        k = doc["kind"]
    except (KeyError, TypeError) as exc:
        raise ShapeError(f"malformed function document: {exc}") from exc
    if k == "zero":
        return hg.Zero(int(doc["q"]))
    if k == "const":
        return hg.Const(cmatrix_from_json(doc["a"]))
    if k == "linear":
        return hg.Linear(cmatrix_from_json(doc["beta"]))
    if k == "nev_triple":
        return hg.NevTriple(
            cmatrix_from_json(doc["alpha"]),
            cmatrix_from_json(doc["beta"]),
            measure_from_json(doc["nu"]),
        )
    if k == "stieltjes_of":
        return hg.StieltjesOf(measure_from_json(doc["sigma"]))
    if k == "gamma_mu":
        return hg.GammaMu(cmatrix_from_json(doc["gamma"]), measure_from_json(doc["mu"]))
    if k == "sum":
        return hg.Sum(tuple(fn_from_json(t) for t in doc["terms"]))
    if k == "congruence":
        return hg.Congruence(cmatrix_from_json(doc["a"]), fn_from_json(doc["inner"]))
    if k == "neg_pinv":
        return hg.NegPinv(fn_from_json(doc["inner"]))
    if k == "schur_plus":
        return hg.SchurPlus(
            cmatrix_from_json(doc["a"]), cmatrix_from_json(doc["b"]), fn_from_json(doc["inner"])
        )
    if k == "schur_minus":
        return hg.SchurMinus(
            cmatrix_from_json(doc["a"]),
            cmatrix_from_json(doc["b"]),
            fn_from_json(doc["inner"]),
            bool(doc.get("certified", False)),
        )
    if k == "lft_resolvent":
        return hg.LFTByResolvent(
            resolvent_from_json(doc["resolvent"]), fn_from_json(doc["inner"])
        )
    if k == "compressed":
        return hg.Compressed(cmatrix_from_json(doc["u"]), fn_from_json(doc["inner"]))
    raise ShapeError(f"unknown function node kind {k!r}")
