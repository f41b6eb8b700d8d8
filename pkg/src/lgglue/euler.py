"""Euler-number bookkeeping for smoothings and their glued LG mirrors.

Every relation is homogeneous linear with integer coefficients in the Euler
numbers of named strata.  Mirror-side quantities (relative Euler numbers of
LG models and their fibres) are opaque integers; only linear consistency is
checked.

Stratum names used by the catalogue:

- A side: ``X X1 X2 D0 D D1 D2 D11 D12 D21 D22 D0_D11 D0_D12 D0_D21 D0_D22 D1_D2``
- B side: ``XV_W`` (total space rel. a fibre of W), ``W_fibre``,
  ``X1V X2V`` (pieces rel. their fibres), ``XV_h`` (total space rel. a fibre
  of ``(h1, h2)``), ``X1V_h X2V_h``, ``XV_union`` (rel. the union of the two
  divisor fibres), ``h1_rel h2_rel`` (one fibre rel. its intersection with
  the other), ``h_fibre``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping

from .errors import LgError


@dataclass(frozen=True)
class Relation:
    name: str
    source: str
    coeffs: Callable[[int], dict]  # dim -> {stratum: int}, meaning sum c * chi = 0
    kind: str                      # "smoothing" | "mirror" | "proof"

    def at(self, dim: int) -> dict:
        return {k: v for k, v in self.coeffs(dim).items() if v}


def _sign(k: int) -> int:
    return -1 if k % 2 else 1


def _rel(name, source, kind, fn):
    return Relation(name, source, fn, kind)


CATALOGUE: dict[str, Relation] = {r.name: r for r in [
    _rel("smoothing", "Euler number of a smoothing of a double-point degeneration", "smoothing",
         lambda d: {"X": 1, "X1": -1, "X2": -1, "D0": 2}),
    _rel("smoothing_D1", "smoothing of the first divisor across the double locus", "smoothing",
         lambda d: {"D1": 1, "D11": -1, "D21": -1, "D0_D11": 2}),
    _rel("smoothing_D2", "smoothing of the second divisor across the double locus", "smoothing",
         lambda d: {"D2": 1, "D12": -1, "D22": -1, "D0_D12": 2}),
    _rel("intersection_1", "the two pieces of the first divisor meet the double locus in one subvariety", "proof",
         lambda d: {"D0_D11": 1, "D0_D21": -1}),
    _rel("intersection_2", "the two pieces of the second divisor meet the double locus in one subvariety", "proof",
         lambda d: {"D0_D12": 1, "D0_D22": -1}),
    _rel("mirror_X", "glued LG model: total space relative to a regular fibre", "mirror",
         lambda d: {"X": 1, "XV_W": -_sign(d)}),
    _rel("mirror_D", "regular fibre of the glued potential against the smoothed anticanonical divisor", "mirror",
         lambda d: {"D": 1, "W_fibre": -_sign(d - 1)}),
    _rel("gluing_relative", "relative Mayer-Vietoris for the glued LG model; the overlap contributes zero", "proof",
         lambda d: {"XV_W": 1, "X1V": -1, "X2V": -1}),
    _rel("piece_1", "first rank-2 piece mirrors the complement of the double locus", "proof",
         lambda d: {"X1V": 1, "X1": -_sign(d), "D0": _sign(d)}),
    _rel("piece_2", "second rank-2 piece mirrors the complement of the double locus", "proof",
         lambda d: {"X2V": 1, "X2": -_sign(d), "D0": _sign(d)}),
    _rel("glued_pieces", "the two piece relations summed through the relative gluing", "proof",
         lambda d: {"XV_W": 1, "X1": -_sign(d), "X2": -_sign(d), "D0": 2 * _sign(d)}),
    _rel("rank2_X", "rank-2 LG model: total space relative to the union of both divisor fibres", "mirror",
         lambda d: {"X": 1, "XV_union": -_sign(d)}),
    _rel("rank2_D1", "first divisor against its fibre relative to the other fibre", "mirror",
         lambda d: {"D1": 1, "h1_rel": -_sign(d - 1)}),
    _rel("rank2_D2", "second divisor against its fibre relative to the other fibre", "mirror",
         lambda d: {"D2": 1, "h2_rel": -_sign(d - 1)}),
    _rel("rank2_D1D2", "divisor intersection against a regular fibre of the pair", "mirror",
         lambda d: {"D1_D2": 1, "h_fibre": -_sign(d - 2)}),
    _rel("rank2_gluing_relative", "relative Mayer-Vietoris for two rank-3 pieces glued along one factor", "proof",
         lambda d: {"XV_h": 1, "X1V_h": -1, "X2V_h": -1}),
    _rel("rank2_piece_1", "first rank-3 piece relative to a fibre of its last two components", "proof",
         lambda d: {"X1V_h": 1, "X1": -_sign(d), "D0": _sign(d), "D12": _sign(d), "D0_D12": -_sign(d),
                    "D11": _sign(d), "D0_D11": -_sign(d)}),
    _rel("rank2_piece_2", "second rank-3 piece relative to a fibre of its last two components", "proof",
         lambda d: {"X2V_h": 1, "X2": -_sign(d), "D0": _sign(d), "D22": _sign(d), "D0_D22": -_sign(d),
                    "D21": _sign(d), "D0_D21": -_sign(d)}),
    _rel("rank2_relative", "total space relative to a fibre of the pair, from the smoothed strata", "proof",
         lambda d: {"XV_h": 1, "X": -_sign(d), "D1": _sign(d), "D2": _sign(d)}),
]}

SMOOTHING = ("smoothing", "smoothing_D1", "smoothing_D2")
MIRROR = ("mirror_X", "mirror_D", "rank2_X", "rank2_D1", "rank2_D2", "rank2_D1D2")


@dataclass
class EulerDiagram:
    dim: int
    strata: dict = field(default_factory=dict)   # name -> int | None
    relations: list = field(default_factory=list)

    def __post_init__(self):
        if not isinstance(self.dim, int) or self.dim < 1:
            raise LgError("INVALID_DATA", f"dimension must be a positive integer, got {self.dim!r}")
        for k, v in self.strata.items():
            if v is not None and (isinstance(v, bool) or not isinstance(v, int)):
                raise LgError("INVALID_DATA", f"Euler number of {k} must be an integer")
        for r in self.relations:
            if r not in CATALOGUE:
                raise LgError("INVALID_DATA", f"unknown relation {r!r}")

    @property
    def unknowns(self) -> list:
        return sorted(k for k, v in self.strata.items() if v is None)

    def with_dim(self, dim: int) -> "EulerDiagram":
        return EulerDiagram(dim, dict(self.strata), list(self.relations))

    def to_json(self) -> dict:
        return {"dim": self.dim, "strata": dict(sorted(self.strata.items())), "relations": list(self.relations)}

    @classmethod
    def from_json(cls, obj: Mapping) -> "EulerDiagram":
        try:
            return cls(obj["dim"], dict(obj.get("strata", {})), list(obj.get("relations", [])))
        except (KeyError, TypeError) as exc:
            raise LgError("CONFIG_PARSE", f"bad diagram: {exc}") from None

    @classmethod
    def load(cls, path) -> "EulerDiagram":
        with open(path) as fh:
            try:
                return cls.from_json(json.load(fh))
            except json.JSONDecodeError as exc:
                raise LgError("CONFIG_PARSE", f"{path}: {exc}") from None


def active_relations(diagram: EulerDiagram, names: Iterable[str] | None = None) -> list:
    """Relations to use: the diagram's list, or every catalogue entry whose strata are all named."""
    pool = list(names) if names is not None else list(CATALOGUE)
    if diagram.relations:
        return [CATALOGUE[n] for n in diagram.relations if n in pool]
    return [CATALOGUE[n] for n in pool if set(CATALOGUE[n].at(diagram.dim)) <= set(diagram.strata)]


def _evaluate(diagram: EulerDiagram, rels: list) -> list:
    if not rels:
        raise LgError("MISSING_STRATUM", "no applicable relation: required strata are absent")
    out = []
    for rel in rels:
        coeffs = rel.at(diagram.dim)
        missing = sorted(k for k in coeffs if diagram.strata.get(k) is None)
        if missing:
            raise LgError("MISSING_STRATUM", f"{rel.name} needs {', '.join(missing)}")
        residual = sum(c * diagram.strata[k] for k, c in coeffs.items())
        out.append({"relation": rel.name, "holds": residual == 0, "residual": residual})
    return out


def check_smoothing(diagram: EulerDiagram) -> list:
    return _evaluate(diagram, active_relations(diagram, SMOOTHING))


def check_mirror_relations(diagram: EulerDiagram) -> list:
    return _evaluate(diagram, active_relations(diagram, MIRROR))


def check_all(diagram: EulerDiagram) -> list:
    return _evaluate(diagram, active_relations(diagram))


def populate_mirror(diagram: EulerDiagram) -> EulerDiagram:
    """Fill mirror-side entries from A-side values through the mirror relations."""
    strata = dict(diagram.strata)
    for name in MIRROR:
        coeffs = CATALOGUE[name].at(diagram.dim)
        (a, _), (b, cb) = coeffs.items()
        if strata.get(a) is not None:
            strata[b] = -strata[a] // cb
    return EulerDiagram(diagram.dim, strata, list(diagram.relations))


def solve_unknowns(diagram: EulerDiagram, order: Iterable[str] | None = None) -> EulerDiagram:
    """Fill every unknown stratum, or raise UNDERDETERMINED / INCONSISTENT.

    Exact Gauss-Jordan elimination over the active relations; ``order``
    permutes the relations (the result does not depend on it).
    """
    rels = active_relations(diagram)
    if order is not None:
        by = {r.name: r for r in rels}
        rels = [by[n] for n in order if n in by]
    unknowns = diagram.unknowns
    col = {u: i for i, u in enumerate(unknowns)}
    n = len(unknowns)
    rows = []
    for i, rel in enumerate(rels):
        coeffs = rel.at(diagram.dim)
        row = [Fraction(0)] * n
        rhs = Fraction(0)
        for k, c in coeffs.items():
            if k not in diagram.strata:
                break
            if diagram.strata[k] is None:
                row[col[k]] += c
            else:
                rhs -= c * diagram.strata[k]
        else:
            tag = [Fraction(0)] * len(rels)
            tag[i] = Fraction(1)
            rows.append((row, rhs, tag))
    pivots = []
    r = 0
    for c in range(n):
        p = next((i for i in range(r, len(rows)) if rows[i][0][c]), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        pr, pb, pt = rows[r]
        inv = 1 / pr[c]
        pr, pb, pt = [x * inv for x in pr], pb * inv, [x * inv for x in pt]
        rows[r] = (pr, pb, pt)
        for i in range(len(rows)):
            if i != r and rows[i][0][c]:
                f = rows[i][0][c]
                ri, bi, ti = rows[i]
                rows[i] = ([a - f * b for a, b in zip(ri, pr)], bi - f * pb, [a - f * b for a, b in zip(ti, pt)])
        pivots.append(c)
        r += 1
    for row, rhs, tag in rows[r:]:
        if rhs:
            names = [rels[i].name for i, t in enumerate(tag) if t]
            raise LgError("INCONSISTENT", f"relations {', '.join(names)} disagree")
    free = [unknowns[c] for c in range(n) if c not in pivots]
    if free:
        raise LgError("UNDERDETERMINED", f"no relation pins down {', '.join(free)}")
    strata = dict(diagram.strata)
    for i, c in enumerate(pivots):
        v = rows[i][1]
        if v.denominator != 1:
            raise LgError("INCONSISTENT", f"{unknowns[c]} would be {v}, not an integer")
        strata[unknowns[c]] = int(v)
    return EulerDiagram(diagram.dim, strata, list(diagram.relations))


# ---------------------------------------------------------------------------
# random consistent diagrams

A_SIDE_FREE = ("X1", "X2", "D0", "D11", "D12", "D21", "D22", "D0_D11", "D0_D12", "D", "D1_D2")
B_SIDE = ("XV_W", "W_fibre", "X1V", "X2V", "XV_h", "X1V_h", "X2V_h", "XV_union", "h1_rel", "h2_rel", "h_fibre")


def random_smoothing_diagram(rng, *, low: int = -500, high: int = 500) -> EulerDiagram:
    """Random A-side values satisfying every smoothing relation; B side unknown."""
    dim = rng.randint(1, 6)
    s = {k: rng.randint(low, high) for k in A_SIDE_FREE}
    s["D0_D21"], s["D0_D22"] = s["D0_D11"], s["D0_D12"]
    s["X"] = s["X1"] + s["X2"] - 2 * s["D0"]
    s["D1"] = s["D11"] + s["D21"] - 2 * s["D0_D11"]
    s["D2"] = s["D12"] + s["D22"] - 2 * s["D0_D12"]
    s.update({k: None for k in B_SIDE})
    return EulerDiagram(dim, s)
