"""Built-in product relations among functional invariants.

Each relation is ``prod(lhs) == prod(rhs)`` after an identification of
variables.  Pieces are written in their own variables so the
identification does real work.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

from .invariants import FactoredInvariant, check_relation, series_confirm
from . import toric


@dataclass
class Relation:
    name: str
    lhs: list
    rhs: list
    identification: dict


def _p(*texts) -> list:
    return [FactoredInvariant.parse(t) for t in texts]


def example1() -> Relation:
    return Relation(
        "example1_invariants",
        _p("q1/(x0*(1-y)*(1-q0/y)^3)", "q10/x0"),
        _p("q11/(x0*(1-q01/y1)^3)", "q12/(x0*(1-q02/y2))"),
        {"q10": "q1", "q11": "q1", "q12": "q1", "q01": "q0", "y1": "y", "y2": "q02/y"})


def example2() -> Relation:
    return Relation(
        "example2_invariants",
        _p("q1/(x0*y*(1-y)^3)", "q10/x0"),
        _p("q11/(x0*y1)", "q12*y2/(x0*(1-q02/y2)^3)"),
        {"q10": "q1", "q11": "q1", "q12": "q1/y2", "y1": "y", "y2": "q02/y"})


def normal_cone() -> Relation:
    return Relation(
        "normal_cone_invariants",
        _p("q1/(x0*(y-x0)^3)", "q10/x0"),
        _p("q11/(x0*y1^3)", "q12*y2^3/((y-q22/y2)*q22^3)"),
        {"q10": "q1", "q11": "q1", "q12": "q1*q22^3/y2^3", "y2": "q22/y1", "y1": "y-x0"})


def quintic_step() -> Relation:
    return Relation(
        "quintic_invariants",
        _p("q1/(x0*(1-y)*(y-x0)^3)", "q10/(x0*(1-x0)^3)"),
        _p("q11/(x0*(y-x0)^3)", "q12*y2^4/(x0*(1-x0)^3*(1-q2/y2))"),
        {"q10": "q1", "q11": "q1", "q12": "q1/y2^4", "y2": "q2/y"})


def quintic_iterated() -> Relation:
    """Both pieces of the quintic degeneration degenerated once more."""
    return Relation(
        "quintic_iterated_invariants",
        _p("q1/(x0*(1-y)*(y-x0)^3)", "q10/(x0*(1-x0)^3)", "q110/x0", "q120/x0"),
        _p("q111/(x0*y1^3)", "q112*y2^3/((y-q22/y2)*q22^3)", "q121/(x0*u^3)", "q122/((1-u)*(1-y))"),
        {"q10": "q1", "q110": "q1", "q120": "q1", "q111": "q1", "q121": "q1", "q122": "q1",
         "q112": "q1*q22^3/y2^3", "y2": "q22/y1", "y1": "y-x0", "u": "1-x0"})


def toric_relations(data: toric.ToricCIData, *, d12_family: bool = False) -> list:
    """One relation per Kähler direction of a toric complete intersection."""
    inv = toric.functional_invariants(data, d12_family=d12_family)
    tag = "_d12" if d12_family else ""
    return [Relation(f"{data.name}{tag}_{q}", [inv["X"][i], inv["D0"][i]], [inv["X1"][i], inv["X2"][i]],
                     inv["identification"])
            for i, q in enumerate(data.qvars())]


BUILTIN = {r.__name__: r for r in (example1, example2, normal_cone, quintic_step, quintic_iterated)}


def verify(rel: Relation, order: int = 4) -> dict:
    start = time.perf_counter()
    report = check_relation(rel.lhs, rel.rhs, rel.identification)
    confirmed = series_confirm(rel.lhs, rel.rhs, rel.identification, order)
    return {"instance": rel.name, "order": order, "verdict": report.holds and confirmed,
            "factored": report.holds, "series": confirmed,
            "residual": None if report.holds else str(report.residual),
            "runtime_ms": int((time.perf_counter() - start) * 1000)}
