"""Canonical JSON for analysis artifacts.

Keys are sorted; integers are decimal strings, rationals ``{"den": .., "num": ..}``
with string fields, floats ``{"float": repr(x)}``; matrices are row-major
``{"rows", "cols", "data"}``.  ``from_json(to_json(x)) == x`` for every
supported type.
"""
from __future__ import annotations

import csv
import io
import json
from fractions import Fraction
from typing import Sequence

from .cbn import CbEquilibrium, ConditionalDistribution, PartitionTable
from .moments import LinearMomentSystem, MomentBasis, MomentValues
from .network import (
    ConservationBasis,
    FfnCertificate,
    Reaction,
    ReactionNetwork,
    StoichMatrix,
    StructureSummary,
)


class SchemaError(ValueError):
    pass


def encode_number(x) -> object:
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, int):
        return str(x)
    if isinstance(x, Fraction):
        return {"num": str(x.numerator), "den": str(x.denominator)}
    if isinstance(x, float):
        return {"float": repr(x)}
    raise TypeError(f"cannot encode {type(x).__name__} as a number")


def decode_number(v) -> int | Fraction | float:
    try:
        if isinstance(v, str):
            return int(v)
        if isinstance(v, dict) and set(v) == {"num", "den"}:
            return Fraction(int(v["num"]), int(v["den"]))
        if isinstance(v, dict) and set(v) == {"float"}:
            return float(v["float"])
    except (ValueError, ZeroDivisionError) as exc:
        raise SchemaError(f"bad number {v!r}: {exc}") from None
    raise SchemaError(f"bad number {v!r}")


def encode_matrix(rows) -> dict:
    rows = [list(r) for r in rows]
    return {
        "rows": len(rows),
        "cols": len(rows[0]) if rows else 0,
        "data": [[encode_number(x) for x in r] for r in rows],
    }


def decode_matrix(v) -> tuple[tuple, ...]:
    try:
        data = tuple(tuple(decode_number(x) for x in r) for r in v["data"])
        if len(data) != v["rows"] or any(len(r) != v["cols"] for r in data):
            raise SchemaError("matrix shape does not match its data")
        return data
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"bad matrix: {exc}") from None


def _vec(xs):
    return [encode_number(x) for x in xs]


def _unvec(xs):
    return tuple(decode_number(x) for x in xs)


def to_dict(obj) -> dict:
    if isinstance(obj, ReactionNetwork):
        return {
            "type": "ReactionNetwork",
            "species": list(obj.species),
            "reactions": [
                {"source": list(r.source), "target": list(r.target), "rate": encode_number(r.rate)}
                for r in obj.reactions
            ],
        }
    if isinstance(obj, StoichMatrix):
        return {"type": "StoichMatrix", **encode_matrix(obj.entries)}
    if isinstance(obj, ConservationBasis):
        return {
            "type": "ConservationBasis",
            "basis": encode_matrix(obj.rows),
            "rank": obj.rank,
            "exact": obj.exact,
            "n_species": obj.n_species,
        }
    if isinstance(obj, StructureSummary):
        return {"type": "StructureSummary", **obj.__dict__}
    if isinstance(obj, FfnCertificate):
        return {
            "type": "FfnCertificate",
            "species_layer": dict(obj.species_layer),
            "reaction_layer": [[j, layer] for j, layer in sorted(obj.reaction_layer.items())],
            "degradation": list(obj.degradation),
        }
    if isinstance(obj, LinearMomentSystem):
        return {
            "type": "LinearMomentSystem",
            "basis": [list(u) for u in obj.basis.moments],
            "has_constant": obj.basis.has_constant,
            "species": list(obj.species),
            "A": encode_matrix(obj.A),
            "b": _vec(obj.b),
        }
    if isinstance(obj, MomentValues):
        return {
            "type": "MomentValues",
            "basis": [list(u) for u in obj.basis.moments],
            "has_constant": obj.basis.has_constant,
            "values": _vec(obj.values),
            "time": None if obj.time is None else encode_number(obj.time),
            "nullspace": [_vec(v) for v in obj.nullspace],
        }
    if isinstance(obj, PartitionTable):
        return {
            "type": "PartitionTable",
            "basis": encode_matrix(obj.rows) if obj.rows else {"rows": 0, "cols": obj.n, "data": []},
            "lambda": _vec(obj.lam),
            "unconstrained": list(obj.free),
            "memo": [{"beta": list(b), "Z": encode_number(z)} for b, z in sorted(obj.memo.items())],
        }
    if isinstance(obj, ConditionalDistribution):
        return {
            "type": "ConditionalDistribution",
            "species": list(obj.species),
            "beta": list(obj.beta),
            "support": [list(k) for k in obj.support],
            "probabilities": _vec(obj.probabilities),
            "free": list(obj.free),
            "free_lambda": _vec(obj.free_lam),
        }
    if isinstance(obj, CbEquilibrium):
        return {
            "type": "CbEquilibrium",
            "lambda": _vec(obj.lam),
            "residuals": _vec(obj.residuals),
            "tolerance": encode_number(obj.tolerance),
            "complexes": [list(c) for c in obj.complexes],
        }
    raise TypeError(f"no JSON schema for {type(obj).__name__}")


def from_dict(d: dict):
    try:
        kind = d["type"]
        if kind == "ReactionNetwork":
            return ReactionNetwork(
                tuple(d["species"]),
                tuple(
                    Reaction(tuple(r["source"]), tuple(r["target"]), decode_number(r["rate"]))
                    for r in d["reactions"]
                ),
            )
        if kind == "StoichMatrix":
            return StoichMatrix(decode_matrix(d))
        if kind == "ConservationBasis":
            return ConservationBasis(decode_matrix(d["basis"]), d["rank"], d["exact"], d["n_species"])
        if kind == "StructureSummary":
            return StructureSummary(**{k: v for k, v in d.items() if k != "type"})
        if kind == "FfnCertificate":
            return FfnCertificate(
                dict(d["species_layer"]),
                {int(j): int(layer) for j, layer in d["reaction_layer"]},
                tuple(d["degradation"]),
            )
        if kind == "LinearMomentSystem":
            basis = MomentBasis(tuple(tuple(u) for u in d["basis"]), d["has_constant"])
            return LinearMomentSystem(basis, decode_matrix(d["A"]) if basis.moments else (), _unvec(d["b"]), tuple(d["species"]))
        if kind == "MomentValues":
            return MomentValues(
                MomentBasis(tuple(tuple(u) for u in d["basis"]), d["has_constant"]),
                _unvec(d["values"]),
                None if d["time"] is None else decode_number(d["time"]),
                tuple(_unvec(v) for v in d["nullspace"]),
            )
        if kind == "PartitionTable":
            rows = decode_matrix(d["basis"]) if d["basis"]["rows"] else ()
            table = PartitionTable(rows, _unvec(d["lambda"]))
            for entry in d["memo"]:
                table._memo[tuple(entry["beta"])] = decode_number(entry["Z"])
            return table
        if kind == "ConditionalDistribution":
            return ConditionalDistribution(
                tuple(d["species"]),
                tuple(d["beta"]),
                tuple(tuple(k) for k in d["support"]),
                _unvec(d["probabilities"]),
                tuple(d["free"]),
                _unvec(d["free_lambda"]),
            )
        if kind == "CbEquilibrium":
            return CbEquilibrium(
                _unvec(d["lambda"]),
                _unvec(d["residuals"]),
                decode_number(d["tolerance"]),
                tuple(tuple(c) for c in d["complexes"]),
            )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, SchemaError):
            raise
        raise SchemaError(f"schema violation: {exc}") from None
    raise SchemaError(f"unknown artifact type {d.get('type')!r}")


def z_table_csv(table: PartitionTable, names: Sequence[str] | None = None) -> str:
    """Memoized ``Z`` values as CSV: one column per conservation law, then Z exact and float."""
    names = list(names) if names else [f"beta{i + 1}" for i in range(table.m)]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([*names, "Z", "Z_float"])
    for beta, z in sorted(table.memo.items()):
        w.writerow([*beta, str(z), repr(float(z))])
    return buf.getvalue()


def to_json(obj) -> str:
    return json.dumps(to_dict(obj), sort_keys=True, indent=2) + "\n"


def from_json(text: str):
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from None
    if not isinstance(d, dict):
        raise SchemaError("artifact must be a JSON object")
    return from_dict(d)
