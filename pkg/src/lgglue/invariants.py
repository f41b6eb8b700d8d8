"""Functional invariants as factored products of binomials.

An invariant is ``constant * prod factor**power`` where each factor has one
or two signed monomial terms.  Relation checks work on a canonical factored
form; series appear only through ``pullback_series`` and the graded expansion
used to confirm relations independently.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import comb, factorial
from typing import Iterable, Mapping, Sequence

from .errors import LgError
from .expr import (ONE, mono, mono_mul, mono_pow, mono_str, parse_factored, parse_poly, poly_str,
                   substitute_poly)
from .series import (LAURENT, POWER, Trunc, TruncatedSeries, VarSet, as_rational, expand_inverse_binomial,
                     mul)


def _ratio_key(m: tuple, order: Sequence[str] | None) -> tuple:
    names = list(order) if order else sorted(v for v, _ in m)
    d = dict(m)
    return tuple(d.get(v, 0) for v in names)


@dataclass(frozen=True)
class BinomialFactor:
    terms: tuple          # ((Fraction coef, monomial), ...), one or two entries
    small: int | None = None

    def __post_init__(self):
        if not 1 <= len(self.terms) <= 2:
            raise LgError("NOT_FACTORED", f"factor with {len(self.terms)} terms")
        if any(c == 0 for c, _ in self.terms):
            raise ValueError("zero coefficient in factor")
        if len(self.terms) == 2 and self.terms[0][1] == self.terms[1][1]:
            raise ValueError("binomial with repeated monomial")
        if self.small is not None and self.small not in range(len(self.terms)):
            raise ValueError("small index out of range")

    @classmethod
    def from_poly(cls, p: Mapping, small: int | None = None) -> "BinomialFactor":
        return cls(tuple((Fraction(c), m) for m, c in sorted(p.items())), small)

    @classmethod
    def monomial(cls, m: tuple, c=1) -> "BinomialFactor":
        return cls(((as_rational(c), m),))

    @property
    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def poly(self) -> dict:
        return {m: c for c, m in self.terms}

    def variables(self) -> set:
        return {v for _, m in self.terms for v, _ in m}

    def canonical(self) -> tuple:
        """``(c0, m0, t, r)`` with factor ``= c0*m0*(1 + t*r)`` in a fixed orientation."""
        (ca, ma), (cb, mb) = self.terms
        r = mono_mul(mb, mono_pow(ma, -1))
        first = next((e for _, e in r), 0)
        if first > 0:
            return ca, ma, cb / ca, r
        return cb, mb, ca / cb, mono_pow(r, -1)

    def expansion_form(self) -> tuple:
        """``(c_big, m_big, c, r)`` with factor ``= c_big*m_big*(1 - c*r)`` and ``r`` the small ratio."""
        if self.small is None:
            raise LgError("NOT_EXPANDABLE", f"factor {self} has no designated small term")
        cs, ms = self.terms[self.small]
        cb, mb = self.terms[1 - self.small]
        return cb, mb, -cs / cb, mono_mul(ms, mono_pow(mb, -1))

    def __str__(self):
        return "(" + poly_str(self.poly()) + ")"


def designate_small(p: Mapping, order: Sequence[str] | None) -> int | None:
    """Index of the small term of a two-term polynomial under a smallness order.

    ``order`` lists variables from smallest to largest: a ratio is small when
    its first nonzero exponent along ``order`` is positive.
    """
    if len(p) != 2 or not order:
        return None
    items = sorted(p.items())
    r = mono_mul(items[1][0], mono_pow(items[0][0], -1))
    key = _ratio_key(r, order)
    first = next((e for e in key if e), 0)
    if first > 0:
        return 1
    if first < 0:
        return 0
    return None


@dataclass(frozen=True)
class FactoredInvariant:
    constant: Fraction
    factors: tuple = ()   # ((BinomialFactor, power), ...)

    def __post_init__(self):
        if self.constant == 0:
            raise ValueError("invariants are nonzero")

    @classmethod
    def one(cls) -> "FactoredInvariant":
        return cls(Fraction(1))

    @classmethod
    def parse(cls, text: str, small_order: Sequence[str] | None = None) -> "FactoredInvariant":
        const, facs = parse_factored(text)
        out = []
        for p, k in facs:
            if len(p) > 2:
                raise LgError("NOT_FACTORED", f"factor {poly_str(p)} has more than two terms")
            out.append((BinomialFactor.from_poly(p, designate_small(p, small_order)), k))
        return cls(Fraction(const), tuple(out)).normalized()

    def normalized(self) -> "FactoredInvariant":
        const = Fraction(self.constant)
        monomial = ONE
        merged: dict = {}
        order: list = []
        for f, k in self.factors:
            if k == 0:
                continue
            if f.is_monomial:
                c, m = f.terms[0]
                const *= c ** k
                monomial = mono_mul(monomial, mono_pow(m, k))
                continue
            key = frozenset(f.terms)
            if key not in merged:
                merged[key] = [f, 0]
                order.append(key)
            merged[key][1] += k
        out = []
        if monomial:
            out.append((BinomialFactor.monomial(monomial), 1))
        binos = [(merged[key][0], merged[key][1]) for key in order if merged[key][1]]
        binos.sort(key=lambda fk: (sorted((mono_str(m), str(c)) for c, m in fk[0].terms), fk[1]))
        return FactoredInvariant(const, tuple(out + binos))

    def variables(self) -> set:
        return set().union(*(f.variables() for f, _ in self.factors)) if self.factors else set()

    def monomial_part(self) -> tuple:
        m = ONE
        for f, k in self.factors:
            if f.is_monomial:
                m = mono_mul(m, mono_pow(f.terms[0][1], k))
        return m

    def normal_form(self) -> tuple:
        """Canonical ``(constant, monomial, ((t, r, power), ...))``."""
        const = Fraction(self.constant)
        m = ONE
        binos: dict = {}
        for f, k in self.factors:
            if f.is_monomial:
                c, fm = f.terms[0]
                const *= c ** k
                m = mono_mul(m, mono_pow(fm, k))
            else:
                c0, m0, t, r = f.canonical()
                const *= c0 ** k
                m = mono_mul(m, mono_pow(m0, k))
                binos[(t, r)] = binos.get((t, r), 0) + k
        return const, m, tuple(sorted((t, r, k) for (t, r), k in binos.items() if k))

    def is_one(self) -> bool:
        const, m, binos = self.normal_form()
        return const == 1 and not m and not binos

    def inverse(self) -> "FactoredInvariant":
        return FactoredInvariant(1 / Fraction(self.constant), tuple((f, -k) for f, k in self.factors))

    def __mul__(self, other: "FactoredInvariant") -> "FactoredInvariant":
        return multiply(self, other)

    def __truediv__(self, other: "FactoredInvariant") -> "FactoredInvariant":
        return multiply(self, other.inverse())

    def __str__(self):
        parts = [] if self.constant == 1 else [str(self.constant)]
        for f, k in self.factors:
            base = mono_str(f.terms[0][1]) if f.is_monomial and f.terms[0][0] == 1 else str(f)
            parts.append(base if k == 1 else f"{base}^{k}")
        return "*".join(parts) or "1"

    def to_json(self) -> dict:
        return {
            "constant": str(self.constant),
            "factors": [
                {"terms": [[str(c), dict(m)] for c, m in f.terms], "small": f.small, "power": k}
                for f, k in self.factors
            ],
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "FactoredInvariant":
        try:
            facs = []
            for fj in obj.get("factors", []):
                terms = tuple((Fraction(str(c)), mono(m)) for c, m in fj["terms"])
                facs.append((BinomialFactor(terms, fj.get("small")), int(fj.get("power", 1))))
            return cls(Fraction(str(obj.get("constant", "1"))), tuple(facs))
        except (KeyError, TypeError, ValueError) as exc:
            raise LgError("CONFIG_PARSE", f"bad invariant JSON: {exc}") from None


def multiply(a: FactoredInvariant, b: FactoredInvariant) -> FactoredInvariant:
    return FactoredInvariant(Fraction(a.constant) * b.constant, a.factors + b.factors).normalized()


def product_of(invs: Iterable[FactoredInvariant]) -> FactoredInvariant:
    out = FactoredInvariant.one()
    for inv in invs:
        out = multiply(out, inv)
    return out


# ---------------------------------------------------------------------------
# identification maps


def parse_identification(spec: Mapping[str, object]) -> dict:
    """Map variable -> polynomial image; images must be monomials or binomials."""
    out = {}
    for var, img in spec.items():
        if isinstance(img, Mapping):
            p = {mono(img): Fraction(1)}
        else:
            p = parse_poly(str(img))
        if not p or len(p) > 2:
            raise LgError("BAD_SUBSTITUTION", f"image of {var} must be a monomial or binomial, got {img!r}")
        out[var] = p
    return out


def _as_identification(identification: Mapping | None) -> dict:
    if not identification:
        return {}
    parsed = all(isinstance(v, dict) and all(isinstance(k, tuple) for k in v) for v in identification.values())
    return dict(identification) if parsed else parse_identification(identification)


def substitute(inv: FactoredInvariant, identification: Mapping, small_order: Sequence[str] | None = None,
               max_passes: int = 16) -> FactoredInvariant:
    """Apply an identification map, repeating until no mapped variable remains."""
    ident = _as_identification(identification)
    factors = list(inv.factors)
    const = Fraction(inv.constant)
    for _ in range(max_passes):
        if not any(f.variables() & set(ident) for f, _ in factors):
            break
        nxt = []
        for f, k in factors:
            hit = f.variables() & set(ident)
            if not hit:
                nxt.append((f, k))
                continue
            if f.is_monomial:
                c, m = f.terms[0]
                const *= c ** k
                rest = {}
                for v, e in m:
                    if v in ident:
                        img = ident[v]
                        if len(img) == 1:
                            (im, ic), = img.items()
                            const *= ic ** (e * k)
                            rest_m = mono_pow(im, e)
                            for w, x in rest_m:
                                rest[w] = rest.get(w, 0) + x
                        else:
                            nxt.append((BinomialFactor.from_poly(img, designate_small(img, small_order)), e * k))
                    else:
                        rest[v] = rest.get(v, 0) + e
                if mono(rest):
                    nxt.append((BinomialFactor.monomial(mono(rest)), k))
                continue
            p = f.poly()
            for v in sorted(hit):
                try:
                    p = substitute_poly(p, v, ident[v])
                except LgError:
                    raise LgError("BAD_SUBSTITUTION",
                                  f"substituting {v} into {f} needs a negative power of a binomial") from None
            if not p:
                raise LgError("BAD_SUBSTITUTION", f"factor {f} vanishes after substitution")
            if len(p) > 2:
                raise LgError("BAD_SUBSTITUTION", f"factor {f} becomes {poly_str(p)}, not a binomial")
            small = f.small if p == f.poly() else designate_small(p, small_order)
            nxt.append((BinomialFactor.from_poly(p, small), k))
        factors = nxt
    else:
        raise LgError("BAD_SUBSTITUTION", "identification map does not terminate")
    return FactoredInvariant(const, tuple(factors)).normalized()


@dataclass(frozen=True)
class RelationReport:
    holds: bool
    residual: FactoredInvariant
    lhs: FactoredInvariant
    rhs: FactoredInvariant

    def to_json(self) -> dict:
        return {"holds": self.holds, "residual": str(self.residual), "lhs": str(self.lhs), "rhs": str(self.rhs)}


def check_relation(lhs: Sequence[FactoredInvariant], rhs: Sequence[FactoredInvariant],
                   identification: Mapping | None = None) -> RelationReport:
    """Is ``prod lhs == prod rhs`` after applying the identification map?"""
    ident = identification or {}
    left = product_of(substitute(x, ident) for x in lhs)
    right = product_of(substitute(x, ident) for x in rhs)
    residual = multiply(left, right.inverse())
    return RelationReport(residual.is_one(), residual, left, right)


# ---------------------------------------------------------------------------
# series expansion


BASE_FAMILIES: dict = {
    "unit": lambda d: 1 if d == 0 else 0,
    "geometric": lambda d: 1,
    "mirror_cubic": lambda d: factorial(3 * d) // factorial(d) ** 3,
    "mirror_quartic": lambda d: factorial(4 * d) // factorial(d) ** 4,
    "mirror_quintic": lambda d: factorial(5 * d) // factorial(d) ** 5,
}


def _base_rule(base) -> tuple:
    """Return (rule, support bound or None)."""
    if isinstance(base, str):
        try:
            rule = BASE_FAMILIES[base]
        except KeyError:
            raise LgError("CONFIG_PARSE", f"unknown base family {base!r}") from None
        return rule, (0 if base == "unit" else None)
    if callable(base):
        return base, None
    seq = list(base)
    return (lambda d: seq[d] if d < len(seq) else 0), len(seq) - 1


def _binomial_power(vars: VarSet, trunc: Trunc, c: Fraction, r: tuple, e: int) -> TruncatedSeries:
    """Expansion of ``(1 - c*r)**e`` for any integer ``e``."""
    if e == 0:
        return TruncatedSeries.const(vars, trunc, 1)
    m = vars.monomial(dict(r))
    if e < 0:
        return expand_inverse_binomial(c, m, -e - 1, vars, trunc)
    terms = {}
    for j in range(e + 1):
        terms[tuple(j * x for x in m)] = comb(e, j) * (-c) ** j
    return TruncatedSeries(vars, trunc, terms, strict=True)


def _expansion_data(inv: FactoredInvariant) -> tuple:
    """``(constant, monomial, {(c, r): power})`` with the invariant ``= C*M*prod (1 - c r)**k``."""
    const = Fraction(inv.constant)
    m = ONE
    ratios: dict = {}
    for f, k in inv.factors:
        if f.is_monomial:
            c, fm = f.terms[0]
            const *= c ** k
            m = mono_mul(m, mono_pow(fm, k))
            continue
        cb, mb, c, r = f.expansion_form()
        const *= cb ** k
        m = mono_mul(m, mono_pow(mb, k))
        ratios[(c, r)] = ratios.get((c, r), 0) + k
    return const, m, ratios


def pullback_series(base, invariant: FactoredInvariant, prefactor: FactoredInvariant | None,
                    vars: VarSet, trunc: Trunc) -> TruncatedSeries:
    """``prefactor * sum_d c_d * invariant**d`` expanded in the given chart."""
    prefactor = prefactor or FactoredInvariant.one()
    for v in invariant.variables() | prefactor.variables():
        vars.index(v)
    rule, bound = _base_rule(base)
    ic, im, iratios = _expansion_data(invariant)
    pc, pm, pratios = _expansion_data(prefactor)
    for (c, r) in list(iratios) + list(pratios):
        if any(vars.kind(v) == POWER and e < 0 for v, e in r):
            raise LgError("NOT_EXPANDABLE", f"ratio {mono_str(r)} is not small in this chart")
    deg = vars.degree(vars.monomial(dict(im)))
    if deg <= 0 and bound is None:
        raise LgError("NOT_EXPANDABLE", "invariant has no positive POWER degree")
    top = trunc.order // deg if deg > 0 else bound
    if bound is not None:
        top = min(top, bound)
    total: dict = {}
    for d in range(top + 1):
        cd = as_rational(rule(d))
        if not cd:
            continue
        lead = TruncatedSeries(vars, trunc, {vars.monomial(dict(mono_mul(mono_pow(im, d), pm))): cd * ic ** d * pc},
                               strict=True)
        if lead.is_zero():
            continue
        keys = set(iratios) | set(pratios)
        s = lead
        for key in sorted(keys, key=lambda k: (str(k[0]), k[1])):
            e = d * iratios.get(key, 0) + pratios.get(key, 0)
            s = mul(s, _binomial_power(vars, trunc, key[0], key[1], e))
        for ex, c in s.terms().items():
            total[ex] = total.get(ex, 0) + c
    return TruncatedSeries(vars, trunc, total)


def _find_weights(names: list, ratios: list) -> dict:
    for top in range(1, 6):
        for w in product(range(1, top + 1), repeat=len(names)):
            if top > 1 and max(w) < top:
                continue
            wd = dict(zip(names, w))
            if all(sum(wd[v] * e for v, e in r) != 0 for r in ratios):
                return wd
    raise LgError("NOT_EXPANDABLE", "no grading separates the terms of every factor")


def graded_expansion(invs: Sequence[FactoredInvariant], order: int, weights: Mapping[str, int],
                     names: Sequence[str]) -> tuple:
    """Expand a product of invariants around the grading given by ``weights``.

    Returns ``(constant, monomial, series)``; the series is in the extra POWER
    variable ``eps`` plus every name as a LAURENT variable.
    """
    const = Fraction(1)
    m = ONE
    pieces = []
    for inv in invs:
        const *= inv.constant
        for f, k in inv.factors:
            if f.is_monomial:
                c, fm = f.terms[0]
                const *= c ** k
                m = mono_mul(m, mono_pow(fm, k))
                continue
            (c0, m0), (c1, m1) = f.terms
            w0 = sum(weights[v] * e for v, e in m0)
            w1 = sum(weights[v] * e for v, e in m1)
            if w0 == w1:
                raise LgError("NOT_EXPANDABLE", f"grading does not separate {f}")
            (cb, mb), (cs, ms) = ((c0, m0), (c1, m1)) if w1 > w0 else ((c1, m1), (c0, m0))
            const *= cb ** k
            m = mono_mul(m, mono_pow(mb, k))
            r = mono_mul(ms, mono_pow(mb, -1))
            pieces.append((-cs / cb, r, abs(w1 - w0), k))
    window = order
    for v in names:
        tot = sum((order // w + abs(k)) * abs(dict(r).get(v, 0)) * max(1, abs(k)) for _, r, w, k in pieces)
        window = max(window, tot)
    vars = VarSet(("eps",) + tuple(names), (POWER,) + (LAURENT,) * len(names))
    trunc = Trunc(order, window)
    s = TruncatedSeries.const(vars, trunc, 1)
    for c, r, w, k in pieces:
        rr = mono_mul(r, (("eps", w),))
        s = mul(s, _binomial_power(vars, trunc, c, rr, k))
    return const, m, s


def series_confirm(lhs: Sequence[FactoredInvariant], rhs: Sequence[FactoredInvariant],
                   identification: Mapping | None = None, order: int = 4) -> bool:
    """Independent confirmation of a relation by expanding both sides as series."""
    ident = identification or {}
    left = [substitute(x, ident) for x in lhs]
    right = [substitute(x, ident) for x in rhs]
    names = sorted(set().union(*(x.variables() for x in left + right)))
    ratios = []
    for inv in left + right:
        for f, _ in inv.factors:
            if not f.is_monomial:
                (_, m0), (_, m1) = f.terms
                ratios.append(mono_mul(m1, mono_pow(m0, -1)))
    weights = _find_weights(names, ratios)
    cl, ml, sl = graded_expansion(left, order, weights, names)
    cr, mr, sr = graded_expansion(right, order, weights, names)
    if sl.trunc != sr.trunc:
        trunc = Trunc(order, max(sl.trunc.window, sr.trunc.window))
        sl = TruncatedSeries(sl.vars, trunc, sl.terms())
        sr = TruncatedSeries(sr.vars, trunc, sr.terms())
    return cl == cr and ml == mr and sl == sr
