"""Simulated distributed dot products and matrix products over homomorphic ciphers."""

import json

from . import _core
from ._core import Error, FormatError, ParameterError

__all__ = [
    "Error",
    "FormatError",
    "ParameterError",
    "dot_product",
    "matmul",
    "keygen",
    "homomorphic_affine",
    "seq_agg",
    "par_agg",
    "par_invertible",
    "run_attack",
    "breach_probability",
    "breach_closed_form",
    "avg_bound",
    "worst_bound",
    "bench",
]


def _hex(x):
    return None if x is None else int(x, 16)


def _result(text):
    out = json.loads(text)
    out["S"] = _hex(out.get("S"))
    return out


def dot_product(U, V, B, protocol="dsdp", mode="shared", seed=1, d=1, proofs=False,
                signatures=False):
    """Runs one protocol and returns {S, metrics, aborted, abort_reason, ...}."""
    return _result(_core.dot_product(protocol, list(U), list(V), B, mode, seed, d, proofs,
                                     signatures))


def matmul(A, B, bound, mode="shared", seed=1, proofs=False, signatures=False):
    out = json.loads(_core.matmul([list(r) for r in A], [list(r) for r in B], bound, mode, seed,
                                  proofs, signatures))
    if out["C"] is not None:
        out["C"] = [[_hex(x) for x in row] for row in out["C"]]
    return out


def keygen(scheme="paillier", bits=512, seed=1, M=256):
    """Key pair as a dict (hex strings), usable by homomorphic_affine."""
    return json.loads(_core.keygen(scheme, bits, seed, M))


def homomorphic_affine(key, m, u, r, seed=1):
    """D(E(m)^u * E(r)), which should equal (u*m + r) mod N."""
    return _core.homomorphic_affine(json.dumps(key), m, u, r, seed)


def seq_agg(x, y, N):
    return _core.seq_agg(x[0], x[1], y[0], y[1], N)


def par_agg(x, y, N):
    return _core.par_agg(x[0], x[1], y[0], y[1], N)


def par_invertible(x, N):
    return _core.par_invertible(x[0], x[1], N)


def run_attack(scenario):
    out = json.loads(_core.run_attack(json.dumps(scenario)))
    if out.get("recovered") is not None:
        out["recovered"] = _hex(out["recovered"])
    return out


breach_probability = _core.breach_probability
breach_closed_form = _core.breach_closed_form
avg_bound = _core.avg_bound
worst_bound = _core.worst_bound


def bench(sweeps=None, seed=1):
    """Rows of protocol,n,d,messages,bytes,rounds,wall_time_ms,seed as dicts."""
    cols = ["protocol", "n", "d", "messages", "bytes", "rounds", "wall_time_ms", "seed"]
    rows = []
    for line in _core.bench(sweeps or {}, seed):
        vals = line.split(",")
        row = dict(zip(cols, vals))
        for c in ("n", "d", "messages", "bytes", "rounds", "seed"):
            row[c] = int(row[c])
        row["wall_time_ms"] = float(row["wall_time_ms"])
        rows.append(row)
    return rows
