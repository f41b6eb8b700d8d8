"""Period series and I-functions generated from toric complete-intersection data.

Conventions: degrees ``d`` live in the nef basis, the Kähler variables are
``q1 .. qr`` (POWER) and the gluing variable is ``y`` (LAURENT).  The
correction piece uses the factorial of the pairing with the second refined
class; see ``period_D0``.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import factorial
from pathlib import Path
from typing import Sequence

from .errors import LgError
from .invariants import BinomialFactor, FactoredInvariant
from .expr import mono
from .nilpotent import (IFunction, LogPrefactor, NilGenSet, NilNumber, NilpotentElement, assemble, rising)
from .series import (LAURENT, POWER, Trunc, TruncatedSeries, VarSet, expand_inverse_binomial, mul, residue,
                     retruncate)



def _pair(v: Sequence[int], d: Sequence[int]) -> int:
    return sum(a * b for a, b in zip(v, d))


@dataclass(frozen=True)
class ToricCIData:
    """Divisor matrix, nef classes ``rho[0..s+1]`` and a refinement of ``rho[0]``.

    ``partition[j]`` is ``"0,1"``, ``"0,2"`` or an integer ``l`` in ``1..s+1``.
    """
    r: int
    M: tuple
    rho: tuple
    refinement: tuple
    partition: tuple = ()
    zero_dirs: tuple = ()
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "M", tuple(tuple(int(x) for x in row) for row in self.M))
        object.__setattr__(self, "rho", tuple(tuple(int(x) for x in v) for v in self.rho))
        object.__setattr__(self, "refinement", tuple(tuple(int(x) for x in v) for v in self.refinement))
        object.__setattr__(self, "partition", tuple(p if isinstance(p, str) else int(p) for p in self.partition))
        object.__setattr__(self, "zero_dirs", tuple(int(i) for i in self.zero_dirs))
        self.validate()

    # -- shape -------------------------------------------------------------
    @property
    def m(self) -> int:
        return len(self.M[0]) if self.M else 0

    @property
    def s(self) -> int:
        return len(self.rho) - 2

    @property
    def rho01(self) -> tuple:
        return self.refinement[0]

    @property
    def rho02(self) -> tuple:
        return self.refinement[1]

    @property
    def rho_last(self) -> tuple:
        return self.rho[-1]

    def column(self, j: int) -> tuple:
        return tuple(row[j] for row in self.M)

    def columns(self) -> list:
        return [self.column(j) for j in range(self.m)]

    def qvars(self) -> tuple:
        return tuple(f"q{i + 1}" for i in range(self.r))

    def gens(self) -> tuple:
        return tuple(f"p{i + 1}" for i in range(self.r))

    def validate(self) -> None:
        bad = lambda msg: LgError("INVALID_DATA", f"{self.name or 'data'}: {msg}")
        if self.r < 1 or len(self.M) != self.r:
            raise bad("M must have r rows")
        if self.m < 1 or any(len(row) != self.m for row in self.M):
            raise bad("M rows must have equal positive length")
        if len(self.rho) < 2:
            raise bad("need at least rho_0 and rho_{s+1}")
        if len(self.refinement) != 2:
            raise bad("refinement needs two classes")
        for v in self.rho + self.refinement:
            if len(v) != self.r:
                raise bad("classes must be r-vectors")
            if any(x < 0 for x in v):
                raise bad("nef classes need nonnegative entries")
        if tuple(a + b for a, b in zip(*self.refinement)) != self.rho[0]:
            raise bad("refinement does not sum to rho_0")
        if any(not 0 <= i < self.r for i in self.zero_dirs):
            raise bad("zero_dirs out of range")
        if self.partition:
            if len(self.partition) != self.m:
                raise bad("partition needs one entry per column")
            target = {"0,1": self.rho01, "0,2": self.rho02}
            for l in range(1, self.s + 2):
                target[l] = self.rho[l]
            sums = {k: [0] * self.r for k in target}
            for j, g in enumerate(self.partition):
                if g not in sums:
                    raise bad(f"unknown group {g!r}")
                for i in range(self.r):
                    sums[g][i] += self.M[i][j]
            for k, v in target.items():
                if tuple(sums[k]) != tuple(v):
                    raise bad(f"columns of group {k} sum to {sums[k]}, expected {list(v)}")
        total = [sum(row) for row in self.M]
        rho_sum = [sum(v[i] for v in self.rho) for i in range(self.r)]
        if total != rho_sum:
            raise bad(f"sum of D_j is {total}, sum of rho_l is {rho_sum}")

    # -- io ------------------------------------------------------------------
    def to_json(self) -> dict:
        return {"r": self.r, "M": [list(r) for r in self.M], "rho": [list(v) for v in self.rho],
                "refinement": [list(v) for v in self.refinement], "partition": list(self.partition),
                "zero_dirs": list(self.zero_dirs), "name": self.name}

    @classmethod
    def from_json(cls, obj) -> "ToricCIData":
        try:
            return cls(int(obj["r"]), obj["M"], obj["rho"], obj["refinement"], tuple(obj.get("partition", ())),
                       tuple(obj.get("zero_dirs", ())), obj.get("name", ""))
        except (KeyError, TypeError, ValueError) as exc:
            raise LgError("CONFIG_PARSE", f"bad toric data: {exc}") from None

    @classmethod
    def load(cls, path) -> "ToricCIData":
        try:
            return cls.from_json(json.loads(Path(path).read_text()))
        except json.JSONDecodeError as exc:
            raise LgError("CONFIG_PARSE", f"{path}: {exc}") from None


# ---------------------------------------------------------------------------
# degree enumeration


@dataclass
class DegreeCursor:
    """Degrees with total at most ``bound`` and every ``<D_j, d>`` nonnegative."""
    data: ToricCIData
    bound: int
    require_effective_columns: bool = True

    def __iter__(self):
        r = self.data.r
        cols = self.data.columns()
        for d in _compositions(r, self.bound):
            if any(d[i] for i in self.data.zero_dirs):
                continue
            if self.require_effective_columns and any(_pair(c, d) < 0 for c in cols):
                continue
            yield d


def _compositions(r: int, bound: int):
    """All ``d`` in ``Z_{>=0}^r`` with ``sum(d) <= bound`` in graded lex order."""
    for total in range(bound + 1):
        yield from _fixed_total(r, total)


def _fixed_total(r: int, total: int):
    if r == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _fixed_total(r - 1, total - first):
            yield (first,) + rest


# ---------------------------------------------------------------------------
# periods


def _common(data: ToricCIData, d, strip: bool) -> Fraction:
    """``prod_{l=1..s} <rho_l,d>! * <rho_{s+1},d>! / prod_j <D_j,d>!``."""
    num = 1
    for l in range(1, data.s + 1):
        num *= factorial(_pair(data.rho[l], d))
    if not strip:
        num *= factorial(_pair(data.rho_last, d))
    den = 1
    for c in data.columns():
        den *= factorial(_pair(c, d))
    return Fraction(num, den)


def default_window(data: ToricCIData, order: int) -> int:
    return max(order, order * max(data.rho02), 1)


def _chart(data: ToricCIData, with_y: bool) -> VarSet:
    names = data.qvars() + (("y",) if with_y else ())
    return VarSet(names, (POWER,) * data.r + ((LAURENT,) if with_y else ()))


def _monomial(vars: VarSet, d, y: int = 0) -> tuple:
    e = list(d) + ([y] if len(vars) > len(d) else [])
    return tuple(e)


def period_D0(data: ToricCIData, order: int, *, strip_rho_factor: bool = False, window: int | None = None,
              with_y: bool = False) -> TruncatedSeries:
    """Relative period of the correction piece.

    The factor attached to the second refined class is a factorial,
    ``<rho_{0,2}, d>!``, symmetric with the first one.
    """
    vars = _chart(data, with_y)
    trunc = Trunc.at(order, window or default_window(data, order))
    terms = {}
    for d in DegreeCursor(data, order):
        c = _common(data, d, strip_rho_factor) * factorial(_pair(data.rho01, d)) * factorial(_pair(data.rho02, d))
        terms[_monomial(vars, d)] = c
    return TruncatedSeries(vars, trunc, terms, strict=True)


def period_X(data: ToricCIData, order: int, *, strip_rho_factor: bool = False, window: int | None = None,
             with_y: bool = False) -> TruncatedSeries:
    vars = _chart(data, with_y)
    trunc = Trunc.at(order, window or default_window(data, order))
    terms = {}
    for d in DegreeCursor(data, order):
        terms[_monomial(vars, d)] = _common(data, d, strip_rho_factor) * factorial(_pair(data.rho[0], d))
    return TruncatedSeries(vars, trunc, terms, strict=True)


def period_X_via_residue(data: ToricCIData, order: int, *, strip_rho_factor: bool = False) -> TruncatedSeries:
    """Second route: residue in ``y`` of ``(1-y)^-1`` times the correction period pulled back.

    Each degree-``d`` term of the correction period is multiplied by
    ``y^{-<rho02,d>} (1-y)^{-1-<rho01,d>}`` using series arithmetic and the
    constant term in ``y`` is extracted.
    """
    window = max(default_window(data, order), order * max(data.rho01) + 1)
    base = period_D0(data, order, strip_rho_factor=strip_rho_factor, window=window)
    vars = _chart(data, True)
    trunc = Trunc.at(order, window)
    total = TruncatedSeries.zero(vars, trunc)
    for exps, c in base.terms().items():
        d = exps[: data.r]
        lead = TruncatedSeries(vars, trunc, {_monomial(vars, d, -_pair(data.rho02, d)): c}, strict=True)
        expansion = expand_inverse_binomial(1, {"y": 1}, _pair(data.rho01, d), vars, trunc)
        total = total + mul(lead, expansion)
    return retruncate(residue(total, "y"), Trunc.at(order, default_window(data, order)))


def period_X1(data: ToricCIData, order: int, *, strip_rho_factor: bool = False,
              window: int | None = None) -> TruncatedSeries:
    vars = _chart(data, True)
    trunc = Trunc.at(order, window or default_window(data, order))
    terms = {}
    for d in DegreeCursor(data, order):
        c = _common(data, d, strip_rho_factor) * factorial(_pair(data.rho01, d)) * factorial(_pair(data.rho02, d))
        terms[_monomial(vars, d, -_pair(data.rho02, d))] = c
    return TruncatedSeries(vars, trunc, terms, strict=True)


def period_X2(data: ToricCIData, order: int, *, strip_rho_factor: bool = False,
              window: int | None = None) -> TruncatedSeries:
    """The ``y``-direction is free, so it is expanded up to the window edge."""
    vars = _chart(data, True)
    trunc = Trunc.at(order, window or default_window(data, order))
    terms = {}
    for d in DegreeCursor(data, order):
        n01, n02 = _pair(data.rho01, d), _pair(data.rho02, d)
        base = _common(data, d, strip_rho_factor) * factorial(n02)
        for d0 in range(trunc.window + 1):
            terms[_monomial(vars, d, d0)] = base * Fraction(factorial(d0 + n01), factorial(d0))
    return TruncatedSeries(vars, trunc, terms, strict=True)


# ---------------------------------------------------------------------------
# I-functions


def _form(data: ToricCIData, v: Sequence[int]) -> dict:
    return {g: c for g, c in zip(data.gens(), v) if c}


def _divisor_factor(form: dict, n: int) -> NilNumber:
    """``prod_{k<=0}(D+k) / prod_{k<=n}(D+k)`` for the pairing ``n``."""
    if n >= 0:
        return rising(form, 1, n).inverse()
    return rising(form, n + 1, 0)


def _body_factor(data: ToricCIData, d, strip: bool) -> NilNumber:
    """Divisor factors, ``rho_1..rho_s`` factors and (unless stripped) the ``rho_{s+1}`` factor."""
    out = NilNumber({frozenset(): Fraction(1)})
    for c in data.columns():
        out = out * _divisor_factor(_form(data, c), _pair(c, d))
    for l in range(1, data.s + 1):
        out = out * rising(_form(data, data.rho[l]), 1, _pair(data.rho[l], d))
    if not strip:
        out = out * rising(_form(data, data.rho_last), 1, _pair(data.rho_last, d))
    return out


def _i_degrees(data: ToricCIData, order: int):
    """Degrees in the nonnegative orthant (the effective cone in a nef basis is contained in it)."""
    for d in _compositions(data.r, order):
        if not any(d[i] for i in data.zero_dirs):
            yield d


def _add_forms(*forms: dict) -> dict:
    out: dict = {}
    for f in forms:
        for g, c in f.items():
            out[g] = out.get(g, 0) + c
    return {g: c for g, c in out.items() if c}


def I_function(which: str, data: ToricCIData, order: int, *, strip_rho_factor: bool = False,
               window: int | None = None, p0: str | dict | None = "generator") -> IFunction:
    """I-function of ``X``, ``D0``, ``X1`` or ``X2``.

    For ``X2`` the extra class ``p0`` is a generator by default.  Passing
    ``p0=<form>`` evaluates every factor at ``p0 = form`` before multiplying.
    """
    which = which.upper()
    gens = list(data.gens())
    if which == "X2" and p0 == "generator":
        gens.append("p0")
    genset = NilGenSet(tuple(gens))
    with_y = which in ("X1", "X2")
    vars = _chart(data, with_y)
    trunc = Trunc.at(order, window or default_window(data, order))
    strip = strip_rho_factor
    q_pref = {q: {g: 1} for q, g in zip(data.qvars(), data.gens())}
    r01, r02 = _form(data, data.rho01), _form(data, data.rho02)
    terms = []
    if which == "X":
        r0 = _form(data, data.rho[0])
        for d in _i_degrees(data, order):
            num = _body_factor(data, d, strip) * rising(r0, 1, _pair(data.rho[0], d))
            terms.append((_monomial(vars, d), num))
        pref = LogPrefactor.of(q_pref)
    elif which in ("D0", "X1"):
        for d in _i_degrees(data, order):
            n02 = _pair(data.rho02, d)
            num = _body_factor(data, d, strip) * rising(r01, 1, _pair(data.rho01, d)) * rising(r02, 1, n02)
            terms.append((_monomial(vars, d, -n02) if with_y else _monomial(vars, d), num))
        spec = dict(q_pref)
        if which == "X1" and r02:
            spec["y"] = {g: -c for g, c in r02.items()}
        pref = LogPrefactor.of(spec)
    elif which == "X2":
        p0_form = {"p0": 1} if p0 == "generator" else dict(p0 or {})
        for d in _i_degrees(data, order):
            n01, n02 = _pair(data.rho01, d), _pair(data.rho02, d)
            head = _body_factor(data, d, strip) * rising(r02, 1, n02)
            for d0 in range(trunc.window + 1):
                num = head * rising(_add_forms(r01, p0_form), 1, n01 + d0) * rising(p0_form, 1, d0).inverse()
                terms.append((_monomial(vars, d, d0), num))
        spec = dict(q_pref)
        if p0_form:
            spec["y"] = p0_form
        pref = LogPrefactor.of(spec)
    else:
        raise LgError("CONFIG_PARSE", f"unknown I-function {which!r}")
    return IFunction(assemble(genset, vars, trunc, terms), pref)


# ---------------------------------------------------------------------------
# root-stack I-function


def _tangency_splits(total: int, max_order: int):
    """All ``(k_1..k_J)`` with ``sum j*k_j == total``."""
    J = max_order

    def rec(j, left):
        if j > J:
            if left == 0:
                yield ()
            return
        for k in range(left // j + 1):
            for rest in rec(j + 1, left - j * k):
                yield (k,) + rest

    yield from rec(1, total)


def root_stack_I0(data: ToricCIData, divisors: Sequence[Sequence[int]], order: int, *,
                  max_contact: int | None = None, strip_divisor_factor: bool = False,
                  track_z: bool = False) -> NilpotentElement:
    """``H^*(X)``-valued part of the extended I-function of an infinite root stack, at ``z = 1``.

    Variables are ``q1..qr`` and ``x{i}_{j}`` (contact order ``j`` along the
    ``i``-th divisor), all POWER kind.  With ``track_z`` an extra LAURENT
    variable ``z`` records the power of ``z`` each term carries, recovered
    from homogeneity.
    """
    divisors = [tuple(int(x) for x in v) for v in divisors]
    for v in divisors:
        if len(v) != data.r or any(x < 0 for x in v):
            raise LgError("INVALID_DATA", "divisor classes must be nonnegative r-vectors")
    J = max_contact or order
    xnames = [f"x{i + 1}_{j}" for i in range(len(divisors)) for j in range(1, J + 1)]
    names = data.qvars() + tuple(xnames) + (("z",) if track_z else ())
    kinds = (POWER,) * (data.r + len(xnames)) + ((LAURENT,) if track_z else ())
    vars = VarSet(names, kinds)
    trunc = Trunc.at(order, max(order, 1) * (2 + data.m + len(data.rho) + len(divisors)))
    genset = NilGenSet(data.gens())
    terms = []
    for d in _i_degrees(data, order):
        base = NilNumber({frozenset(): Fraction(1)})
        for c in data.columns():
            base = base * _divisor_factor(_form(data, c), _pair(c, d))
        for l in range(0, data.s + 1):
            base = base * rising(_form(data, data.rho[l]), 1, _pair(data.rho[l], d))
        degs = [_pair(v, d) for v in divisors]
        if not strip_divisor_factor:
            for v, n in zip(divisors, degs):
                base = base * rising(_form(data, v), 1, n)
        weight = (-sum(_pair(c, d) for c in data.columns()) + sum(_pair(v, d) for v in data.rho[:-1])
                  + (0 if strip_divisor_factor else sum(degs)))
        for ks in product(*[list(_tangency_splits(n, J)) for n in degs]):
            kflat = [k for row in ks for k in row]
            if sum(d) + sum(kflat) > order:
                continue
            coef = Fraction(1)
            for k in kflat:
                coef /= factorial(k)
            num = NilNumber({key: v * coef for key, v in base.c.items()})
            e = list(d) + kflat
            if track_z:
                zdeg = weight - sum(kflat)
                for key, v in num.c.items():
                    terms.append((tuple(e + [zdeg - len(key)]), NilNumber({key: v})))
            else:
                terms.append((tuple(e), num))
    return assemble(genset, vars, trunc, terms)


# ---------------------------------------------------------------------------
# functional invariants of the toric pieces


def functional_invariants(data: ToricCIData, *, d12_family: bool = False) -> dict:
    """Factored invariants, one per Kähler direction, with their own chart variables.

    Returns ``{"X": [...], "X1": [...], "X2": [...], "D0": [...], "identification": {...}}``.
    Variables of the pieces are suffixed ``_1`` and ``_2``; ``y0`` is the extra
    chart variable used when the base family is the anticanonical divisor of
    the correction piece.
    """
    out = {"X": [], "X1": [], "X2": [], "D0": []}
    ident = {"y1": "y", "y2": "q02/y"}
    for i, q in enumerate(data.qvars()):
        a, b, c = data.rho01[i], data.rho02[i], data.rho_last[i]
        shift = {"y0": -c} if d12_family else {}
        facs = [(BinomialFactor.monomial(mono({q: 1, **shift})), 1)]
        if a:
            facs.append((BinomialFactor.from_poly({(): Fraction(1), (("y", 1),): Fraction(-1)}, 1), -a))
        if b:
            facs.append((BinomialFactor.monomial(mono({"y": 1})), -b))
        out["X"].append(FactoredInvariant(Fraction(1), tuple(facs)).normalized())
        out["X1"].append(FactoredInvariant(Fraction(1), (
            (BinomialFactor.monomial(mono({f"{q}_1": 1, "y1": -b, **shift})), 1),)).normalized())
        facs2 = [(BinomialFactor.monomial(mono({f"{q}_2": 1, "y2": b, **shift})), 1)]
        if a:
            facs2.append((BinomialFactor.from_poly({(): Fraction(1), (("q02", 1), ("y2", -1)): Fraction(-1)}, 1),
                          -a))
        out["X2"].append(FactoredInvariant(Fraction(1), tuple(facs2)).normalized())
        out["D0"].append(FactoredInvariant(Fraction(1), (
            (BinomialFactor.monomial(mono({q: 1, "y0": -c} if d12_family else {q: 1})), 1),)).normalized())
        ident[f"{q}_1"] = q
        ident[f"{q}_2"] = f"{q}*y2^{-b}" if b else q
    out["identification"] = ident
    return out


# ---------------------------------------------------------------------------
# built-in datasets


def _builtin() -> dict:
    d = {}
    # P^4 x P^1: five columns (1,0), two columns (0,1)
    d["example1_P4xP1"] = ToricCIData(
        2, [[1, 1, 1, 1, 1, 0, 0], [0, 0, 0, 0, 0, 1, 1]],
        [[3, 1], [1, 1], [1, 0]], [[3, 0], [0, 1]],
        ("0,1", "0,1", "0,1", 1, 2, "0,2", 1), name="example1_P4xP1")
    # quartic threefold in P^4 refined as 3 + 1, anticanonical K3 class 1
    d["example2_quartic"] = ToricCIData(
        1, [[1, 1, 1, 1, 1]], [[4], [1]], [[3], [1]], ("0,1", "0,1", "0,1", "0,2", 1),
        name="example2_quartic")
    # quartic K3 in P^3, class 4 split as 1 + 3 (hyperplane and cubic surface)
    d["normal_cone_P3"] = ToricCIData(
        1, [[1, 1, 1, 1]], [[4], [0]], [[1], [3]], ("0,1", "0,2", "0,2", "0,2"), name="normal_cone_P3")
    # quintic threefold in P^4, degree 5 split as 1 + 4
    d["quintic_step1"] = ToricCIData(
        1, [[1, 1, 1, 1, 1]], [[5], [0]], [[1], [4]], ("0,1", "0,2", "0,2", "0,2", "0,2"),
        name="quintic_step1")
    # second step: the quartic class split again as 1 + 3, with the hyperplane class left over
    d["quintic_step2"] = ToricCIData(
        1, [[1, 1, 1, 1, 1]], [[4], [1]], [[1], [3]], ("0,1", "0,2", "0,2", "0,2", 1), name="quintic_step2")
    return d


BUILTIN_DATASETS = _builtin()


def builtin(name: str) -> ToricCIData:
    try:
        return BUILTIN_DATASETS[name]
    except KeyError:
        raise LgError("UNKNOWN_SUITE", f"no built-in dataset {name!r}") from None


def random_data(rng: random.Random, *, max_r: int = 2, max_m: int = 6, max_s: int = 1) -> ToricCIData:
    """Random valid data: nonnegative columns grouped into a refined nef partition."""
    while True:
        r = rng.randint(1, max_r)
        s = rng.randint(0, max_s)
        m = rng.randint(2 + s, max_m)
        cols = []
        for _ in range(m):
            v = [rng.randint(0, 1) for _ in range(r)]
            if not any(v):
                v[rng.randrange(r)] = 1
            cols.append(v)
        labels = ["0,1", "0,2"] + list(range(1, s + 1))
        groups = labels + [rng.choice(labels + [s + 1]) for _ in range(m - len(labels))]
        rng.shuffle(groups)
        sums = {g: [0] * r for g in ["0,1", "0,2"] + list(range(1, s + 2))}
        for g, c in zip(groups, cols):
            for i in range(r):
                sums[g][i] += c[i]
        rho0 = [a + b for a, b in zip(sums["0,1"], sums["0,2"])]
        rho = [rho0] + [sums[l] for l in range(1, s + 2)]
        M = [[c[i] for c in cols] for i in range(r)]
        if any(not any(row) for row in M):
            continue
        return ToricCIData(r, M, rho, [sums["0,1"], sums["0,2"]], tuple(groups),
                           name=f"random_r{r}_m{m}_s{s}")
