"""Square-free nilpotent coefficient rings over truncated series.

Every generator squares to zero while products of distinct generators
survive, so an element is a map from generator subsets to series.  I-functions
are carried as such an element plus a ``LogPrefactor``: the formal factor
``prod_v v**(linear form in generators)`` kept as exponent data only.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping

from .errors import LgError
from .series import (Trunc, TruncatedSeries, VarSet, as_rational, coefficient_in, hadamard, mul, residue,
                     substitute_monomials)


@dataclass(frozen=True)
class NilGenSet:
    generators: tuple

    def __post_init__(self):
        if len(set(self.generators)) != len(self.generators):
            raise ValueError("duplicate generators")

    @classmethod
    def of(cls, *names: str) -> "NilGenSet":
        return cls(tuple(names))

    def sort_key(self, subset: frozenset) -> tuple:
        order = {g: i for i, g in enumerate(self.generators)}
        return (len(subset), sorted(order[g] for g in subset))

    def ordered(self, subset: frozenset) -> list:
        order = {g: i for i, g in enumerate(self.generators)}
        return sorted(subset, key=order.__getitem__)

    def basis(self, max_degree: int | None = None):
        top = len(self.generators) if max_degree is None else min(max_degree, len(self.generators))
        for k in range(top + 1):
            for c in combinations(self.generators, k):
                yield frozenset(c)


class NilpotentElement:
    __slots__ = ("gens", "vars", "trunc", "_coeffs")

    def __init__(self, gens: NilGenSet, vars: VarSet, trunc: Trunc, coeffs: Mapping = ()):
        self.gens, self.vars, self.trunc = gens, vars, trunc
        clean = {}
        for key, s in dict(coeffs).items():
            key = frozenset(key)
            if not key <= set(gens.generators):
                raise LgError("GEN_MISMATCH", f"{sorted(key)} not within {gens.generators}")
            if s.vars != vars or s.trunc != trunc:
                raise LgError("VAR_MISMATCH", "component series disagree on vars/trunc")
            if not s.is_zero():
                clean[key] = s
        self._coeffs = clean

    @classmethod
    def scalar(cls, gens: NilGenSet, series: TruncatedSeries) -> "NilpotentElement":
        return cls(gens, series.vars, series.trunc, {frozenset(): series})

    @classmethod
    def linear(cls, gens: NilGenSet, vars: VarSet, trunc: Trunc, form: Mapping[str, object], const=0):
        """``const + sum c_g * g`` with rational coefficients."""
        coeffs = {}
        if as_rational(const):
            coeffs[frozenset()] = TruncatedSeries.const(vars, trunc, const)
        for g, c in form.items():
            if as_rational(c):
                coeffs[frozenset([g])] = TruncatedSeries.const(vars, trunc, c)
        return cls(gens, vars, trunc, coeffs)

    def component(self, subset: Iterable[str] = ()) -> TruncatedSeries:
        return self._coeffs.get(frozenset(subset), TruncatedSeries.zero(self.vars, self.trunc))

    def components(self) -> dict:
        return dict(self._coeffs)

    def support(self) -> list:
        return sorted(self._coeffs, key=self.gens.sort_key)

    def truncate_degree(self, max_degree: int) -> "NilpotentElement":
        return NilpotentElement(self.gens, self.vars, self.trunc,
                                {k: v for k, v in self._coeffs.items() if len(k) <= max_degree})

    def is_zero(self) -> bool:
        return not self._coeffs

    def __eq__(self, other):
        if not isinstance(other, NilpotentElement):
            return NotImplemented
        return (self.gens, self.vars, self.trunc, self._coeffs) == (other.gens, other.vars, other.trunc, other._coeffs)

    def __hash__(self):
        return hash((self.gens, self.vars, self.trunc, frozenset(self._coeffs.items())))

    def __repr__(self):
        parts = [f"[{''.join(self.gens.ordered(k)) or '1'}] {len(v)} terms" for k, v in
                 ((k, self._coeffs[k]) for k in self.support())]
        return f"NilpotentElement({self.gens.generators}; {', '.join(parts) or '0'})"

    def __add__(self, other):
        return nil_add(self, other)

    def __sub__(self, other):
        return nil_add(self, nil_scale(other, -1))

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return nil_scale(self, other)
        return nil_mul(self, other)

    __rmul__ = __mul__

    def to_text(self) -> str:
        """Each basis monomial as a header line followed by its series text."""
        chunks = []
        for key in self.support():
            chunks.append("[" + " ".join(self.gens.ordered(key)) + "]\n" + self._coeffs[key].to_text())
        return "".join(chunks)

    @classmethod
    def from_text(cls, text: str, gens: NilGenSet, vars: VarSet, trunc: Trunc) -> "NilpotentElement":
        coeffs, key, buf = {}, None, []

        def flush():
            if key is not None:
                coeffs[key] = TruncatedSeries.from_text("\n".join(buf), vars, trunc)

        for line in text.splitlines():
            s = line.strip()
            if s.startswith("["):
                flush()
                key, buf = frozenset(s.strip("[]").split()), []
            elif s:
                if key is None:
                    raise LgError("CONFIG_PARSE", "series text before any basis header")
                buf.append(s)
        flush()
        return cls(gens, vars, trunc, coeffs)


def _check(a: NilpotentElement, b: NilpotentElement):
    if a.vars != b.vars or a.trunc != b.trunc:
        raise LgError("VAR_MISMATCH", f"{a.vars.names} vs {b.vars.names}")
    if a.gens != b.gens:
        raise LgError("GEN_MISMATCH", f"{a.gens.generators} vs {b.gens.generators}")


def nil_add(a: NilpotentElement, b: NilpotentElement) -> NilpotentElement:
    _check(a, b)
    out = dict(a._coeffs)
    for k, s in b._coeffs.items():
        out[k] = out[k] + s if k in out else s
    return NilpotentElement(a.gens, a.vars, a.trunc, out)


def nil_scale(a: NilpotentElement, c) -> NilpotentElement:
    return NilpotentElement(a.gens, a.vars, a.trunc, {k: s * as_rational(c) for k, s in a._coeffs.items()})


def _combine(a: NilpotentElement, b: NilpotentElement, op) -> dict:
    out: dict = {}
    for ka, sa in a._coeffs.items():
        for kb, sb in b._coeffs.items():
            if ka & kb:
                continue  # repeated generator
            k = ka | kb
            prod = op(sa, sb)
            out[k] = out[k] + prod if k in out else prod
    return out


def nil_mul(a: NilpotentElement, b: NilpotentElement) -> NilpotentElement:
    _check(a, b)
    return NilpotentElement(a.gens, a.vars, a.trunc, _combine(a, b, mul))


def nil_invert_unit(a: NilpotentElement) -> NilpotentElement:
    """Inverse via the finite geometric series: ``a = c(1 - u)`` gives ``(1/c) sum u**n``."""
    base = a.component(())
    zero = (0,) * len(a.vars)
    c = base.coeff(zero)
    if c == 0:
        raise LgError("NOT_UNIT", "constant part is zero")
    for e in base.terms():
        if e != zero and a.vars.degree(e) == 0:
            raise LgError("NOT_UNIT", f"degree-zero term {e} is not nilpotent")
    one = NilpotentElement.linear(a.gens, a.vars, a.trunc, {}, 1)
    u = nil_scale(a - nil_scale(one, c), -1 / c)  # a = c(1 - u)
    total, p = one, one
    limit = len(a.gens.generators) + a.trunc.order + 1
    for _ in range(limit):
        p = nil_mul(p, u)
        if p.is_zero():
            break
        total = total + p
    else:
        if not p.is_zero():
            raise LgError("NOT_UNIT", "geometric series did not terminate")
    return nil_scale(total, 1 / c)


def substitute_generator(a: NilpotentElement, g: str, expr: NilpotentElement) -> NilpotentElement:
    """Replace generator ``g`` by the degree-1 element ``expr``."""
    _check(a, expr)
    if g not in a.gens.generators:
        raise LgError("GEN_MISMATCH", f"{g} is not a generator")
    for k in expr._coeffs:
        if len(k) != 1:
            raise ValueError("substitution must be linear in the generators")
        if g in k:
            raise LgError("SELF_REFERENCE", f"expression for {g} mentions {g}")
    out = NilpotentElement(a.gens, a.vars, a.trunc, {k: s for k, s in a._coeffs.items() if g not in k})
    moved = NilpotentElement(a.gens, a.vars, a.trunc, {k - {g}: s for k, s in a._coeffs.items() if g in k})
    return out + nil_mul(moved, expr)


def regenerate(a: NilpotentElement, gens: NilGenSet) -> NilpotentElement:
    """Move ``a`` to another generator set containing every generator it uses."""
    return NilpotentElement(gens, a.vars, a.trunc, a._coeffs)


def nil_residue(a: NilpotentElement, var: str) -> NilpotentElement:
    vars = a.vars.without(var)
    return NilpotentElement(a.gens, vars, a.trunc, {k: residue(s, var) for k, s in a._coeffs.items()})


def nil_coefficient_in(a: NilpotentElement, var: str, k: int) -> NilpotentElement:
    vars = a.vars.without(var)
    return NilpotentElement(a.gens, vars, a.trunc, {key: coefficient_in(s, var, k) for key, s in a._coeffs.items()})


def nil_substitute_monomials(a: NilpotentElement, target: VarSet, images, trunc: Trunc | None = None):
    trunc = trunc or a.trunc
    return NilpotentElement(a.gens, target, trunc,
                            {k: substitute_monomials(s, target, images, trunc) for k, s in a._coeffs.items()})


# --------------------------------------------------------------------------
# log prefactors


def _clean_form(form: Mapping) -> tuple:
    return tuple(sorted((g, as_rational(c)) for g, c in form.items() if as_rational(c)))


@dataclass(frozen=True)
class LogPrefactor:
    """``prod_v v**e_v`` with each ``e_v`` a linear form in the generators."""

    exponents: tuple = ()  # sorted ((var, ((gen, coef), ...)), ...)

    @classmethod
    def of(cls, spec: Mapping[str, Mapping[str, object]]) -> "LogPrefactor":
        items = []
        for v, form in spec.items():
            f = _clean_form(form)
            if f:
                items.append((v, f))
        return cls(tuple(sorted(items)))

    def as_dict(self) -> dict:
        return {v: dict(f) for v, f in self.exponents}

    def exponent(self, var: str) -> dict:
        return self.as_dict().get(var, {})

    def __add__(self, other: "LogPrefactor") -> "LogPrefactor":
        d = self.as_dict()
        for v, f in other.as_dict().items():
            cur = d.setdefault(v, {})
            for g, c in f.items():
                cur[g] = cur.get(g, 0) + c
        return LogPrefactor.of(d)

    def remap(self, images: Mapping[str, Mapping[str, int]]) -> "LogPrefactor":
        """Change of chart: ``var -> prod w**k``, so ``var**e -> prod w**(k e)``."""
        d: dict = {}
        for v, f in self.as_dict().items():
            for w, k in images.get(v, {v: 1}).items():
                cur = d.setdefault(w, {})
                for g, c in f.items():
                    cur[g] = cur.get(g, 0) + k * c
        return LogPrefactor.of(d)

    def substitute(self, g: str, form: Mapping[str, object]) -> "LogPrefactor":
        if g in form:
            raise LgError("SELF_REFERENCE", f"expression for {g} mentions {g}")
        d = {}
        for v, f in self.as_dict().items():
            new = {h: c for h, c in f.items() if h != g}
            if g in f:
                for h, c in form.items():
                    new[h] = new.get(h, 0) + f[g] * as_rational(c)
            d[v] = new
        return LogPrefactor.of(d)

    def to_json(self) -> dict:
        return {v: {g: str(c) for g, c in f} for v, f in self.exponents}


@dataclass(frozen=True)
class IFunction:
    body: NilpotentElement
    prefactor: LogPrefactor = field(default_factory=LogPrefactor)

    def specialize(self) -> TruncatedSeries:
        """Generators to zero and prefactor to one."""
        return self.body.component(())


def nil_hadamard(a, b, star_vars: Iterable[str]):
    """Componentwise Hadamard over the nilpotent basis; prefactor exponents add.

    Accepts bare ``NilpotentElement`` values or ``IFunction`` pairs.
    """
    star_vars = tuple(star_vars)
    if isinstance(a, IFunction) or isinstance(b, IFunction):
        a = a if isinstance(a, IFunction) else IFunction(a)
        b = b if isinstance(b, IFunction) else IFunction(b)
        return IFunction(nil_hadamard(a.body, b.body, star_vars), a.prefactor + b.prefactor)
    _check(a, b)
    return NilpotentElement(a.gens, a.vars, a.trunc, _combine(a, b, lambda x, y: hadamard(x, y, star_vars)))


# --------------------------------------------------------------------------
# nilpotent numbers: rational coefficients, used to assemble factor products


class NilNumber:
    """Element of the square-free ring with rational coefficients."""

    __slots__ = ("c",)

    def __init__(self, c: Mapping | None = None):
        self.c = {frozenset(k): v for k, v in (c or {}).items() if v}

    @classmethod
    def linear(cls, form: Mapping[str, object], const=0) -> "NilNumber":
        d = {frozenset(): as_rational(const)}
        for g, v in form.items():
            d[frozenset([g])] = d.get(frozenset([g]), 0) + as_rational(v)
        return cls(d)

    def __mul__(self, other: "NilNumber") -> "NilNumber":
        out: dict = {}
        for ka, va in self.c.items():
            for kb, vb in other.c.items():
                if ka & kb:
                    continue
                k = ka | kb
                out[k] = out.get(k, 0) + va * vb
        return NilNumber(out)

    def inverse(self) -> "NilNumber":
        c0 = self.c.get(frozenset(), 0)
        if not c0:
            raise LgError("NOT_UNIT", "constant part is zero")
        u = NilNumber({k: -v / c0 for k, v in self.c.items() if k})
        total = NilNumber({frozenset(): Fraction(1)})
        p = total
        while True:
            p = p * u
            if not p.c:
                break
            total = NilNumber({k: total.c.get(k, 0) + p.c.get(k, 0) for k in set(total.c) | set(p.c)})
        return NilNumber({k: v / c0 for k, v in total.c.items()})

    def substitute(self, g: str, form: Mapping[str, object]) -> "NilNumber":
        keep = NilNumber({k: v for k, v in self.c.items() if g not in k})
        moved = NilNumber({k - {g}: v for k, v in self.c.items() if g in k})
        prod = moved * NilNumber.linear(form)
        return NilNumber({k: keep.c.get(k, 0) + prod.c.get(k, 0) for k in set(keep.c) | set(prod.c)})

    def __eq__(self, other):
        return isinstance(other, NilNumber) and self.c == other.c

    def __repr__(self):
        return f"NilNumber({ {''.join(sorted(k)) or '1': str(v) for k, v in self.c.items()} })"


def rising(form: Mapping[str, object], start: int, stop: int) -> NilNumber:
    """``prod_{k=start}^{stop} (form + k)``; empty product is 1."""
    out = NilNumber({frozenset(): Fraction(1)})
    for k in range(start, stop + 1):
        out = out * NilNumber.linear(form, k)
    return out


def assemble(gens: NilGenSet, vars: VarSet, trunc: Trunc, terms: Iterable) -> NilpotentElement:
    """Build an element from ``(exponents, NilNumber)`` pairs."""
    per: dict = {}
    for e, num in terms:
        for k, v in num.c.items():
            slot = per.setdefault(k, {})
            slot[tuple(e)] = slot.get(tuple(e), 0) + v
    return NilpotentElement(gens, vars, trunc,
                            {k: TruncatedSeries(vars, trunc, t, strict=True) for k, t in per.items()})
