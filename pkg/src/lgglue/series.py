"""Exact multivariate truncated power/Laurent series over the rationals.

A series lives on a ``VarSet`` (ordered names, each POWER or LAURENT) and a
``Trunc`` (total degree bound over POWER variables, symmetric exponent window
for LAURENT variables).  Terms are stored in a dict keyed by exponent tuples.
Values are immutable; every operation returns a new series.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Iterable, Mapping

from .errors import LgError

POWER = "power"
LAURENT = "laurent"

Exponents = tuple


def as_rational(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"not an exact rational: {x!r}")


def _shrink(x):
    # integers multiply much faster than Fractions
    if isinstance(x, Fraction) and x.denominator == 1:
        return x.numerator
    return x


@dataclass(frozen=True)
class VarSet:
    names: tuple
    kinds: tuple

    def __post_init__(self):
        if len(self.names) != len(self.kinds):
            raise ValueError("names and kinds differ in length")
        if len(set(self.names)) != len(self.names):
            raise ValueError(f"duplicate variable names in {self.names}")
        for k in self.kinds:
            if k not in (POWER, LAURENT):
                raise ValueError(f"unknown variable kind {k!r}")

    @classmethod
    def of(cls, *specs: str) -> "VarSet":
        """Build from specs like ``"q1"`` (POWER) or ``"y:laurent"``."""
        names, kinds = [], []
        for s in specs:
            name, _, kind = s.partition(":")
            names.append(name)
            kinds.append(LAURENT if kind.startswith("l") else POWER)
        return cls(tuple(names), tuple(kinds))

    def __len__(self):
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise LgError("UNKNOWN_VAR", f"{name!r} not in {self.names}") from None

    def kind(self, name: str) -> str:
        return self.kinds[self.index(name)]

    @property
    def power_idx(self) -> tuple:
        return tuple(i for i, k in enumerate(self.kinds) if k == POWER)

    @property
    def laurent_idx(self) -> tuple:
        return tuple(i for i, k in enumerate(self.kinds) if k == LAURENT)

    def without(self, name: str) -> "VarSet":
        i = self.index(name)
        return VarSet(self.names[:i] + self.names[i + 1:], self.kinds[:i] + self.kinds[i + 1:])

    def degree(self, exps) -> int:
        return sum(exps[i] for i in self.power_idx)

    def monomial(self, spec: Mapping[str, int]) -> tuple:
        e = [0] * len(self.names)
        for name, k in spec.items():
            e[self.index(name)] += int(k)
        return tuple(e)

    def to_json(self):
        return [[n, k] for n, k in zip(self.names, self.kinds)]


@dataclass(frozen=True)
class Trunc:
    order: int
    window: int

    def __post_init__(self):
        if self.order < 0:
            raise ValueError("truncation order must be >= 0")
        if self.window < self.order:
            raise ValueError(f"Laurent window {self.window} smaller than order {self.order}")

    @classmethod
    def at(cls, order: int, window: int | None = None) -> "Trunc":
        return cls(order, order if window is None else window)


class TruncatedSeries:
    """Immutable truncated series; see module docstring."""

    __slots__ = ("vars", "trunc", "_terms", "_hash")

    def __init__(self, vars: VarSet, trunc: Trunc, terms: Mapping | Iterable = (), *, strict: bool = False):
        self.vars = vars
        self.trunc = trunc
        if isinstance(terms, Mapping):
            terms = terms.items()
        pidx, lidx = vars.power_idx, vars.laurent_idx
        n, w = trunc.order, trunc.window
        out = {}
        for e, c in terms:
            e = tuple(int(v) for v in e)
            if len(e) != len(vars):
                raise ValueError(f"exponent {e} does not match {vars.names}")
            for i in pidx:
                if e[i] < 0:
                    raise ValueError(f"negative exponent on POWER variable {vars.names[i]}")
            if sum(e[i] for i in pidx) > n:
                continue
            if any(abs(e[i]) > w for i in lidx):
                if strict:
                    raise LgError("WINDOW_OVERFLOW",
                                  f"term {e} leaves the Laurent window {w}; increase the window")
                continue
            c = _shrink(as_rational(c) if not isinstance(c, int) else c)
            if c:
                out[e] = out.get(e, 0) + c
                if not out[e]:
                    del out[e]
        self._terms = out
        self._hash = None

    # construction helpers -------------------------------------------------
    @classmethod
    def _raw(cls, vars: VarSet, trunc: Trunc, terms: dict) -> "TruncatedSeries":
        s = cls.__new__(cls)
        s.vars, s.trunc, s._terms, s._hash = vars, trunc, terms, None
        return s

    @classmethod
    def zero(cls, vars: VarSet, trunc: Trunc) -> "TruncatedSeries":
        return cls._raw(vars, trunc, {})

    @classmethod
    def const(cls, vars: VarSet, trunc: Trunc, c=1) -> "TruncatedSeries":
        return cls(vars, trunc, {(0,) * len(vars): c})

    @classmethod
    def mono(cls, vars: VarSet, trunc: Trunc, spec: Mapping[str, int], c=1, *, strict=False):
        return cls(vars, trunc, {vars.monomial(spec): c}, strict=strict)

    @classmethod
    def all_ones(cls, vars: VarSet, trunc: Trunc) -> "TruncatedSeries":
        """Sum of every monomial allowed by the truncation (Hadamard unit)."""
        from itertools import product

        ranges = []
        for k in vars.kinds:
            if k == POWER:
                ranges.append(range(0, trunc.order + 1))
            else:
                ranges.append(range(-trunc.window, trunc.window + 1))
        return cls(vars, trunc, ((e, 1) for e in product(*ranges)))

    # access -----------------------------------------------------------------
    def terms(self) -> dict:
        return {e: Fraction(c) for e, c in self._terms.items()}

    def items(self):
        """Terms as (exponents, Fraction) pairs in canonical order."""
        return [(e, Fraction(self._terms[e])) for e in sorted(self._terms)]

    def coeff(self, exps) -> Fraction:
        if isinstance(exps, Mapping):
            exps = self.vars.monomial(exps)
        return Fraction(self._terms.get(tuple(exps), 0))

    def __len__(self):
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def max_order(self) -> int:
        return max((self.vars.degree(e) for e in self._terms), default=0)

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return self.vars == other.vars and self.trunc == other.trunc and self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.vars, self.trunc, frozenset(self._terms.items())))
        return self._hash

    def __repr__(self):
        body = " + ".join(f"{c}*{e}" for e, c in self.items()[:6])
        more = " + ..." if len(self) > 6 else ""
        return f"TruncatedSeries({self.vars.names}, N={self.trunc.order}, W={self.trunc.window}: {body or '0'}{more})"

    # arithmetic sugar -------------------------------------------------------
    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, scale(other, -1))

    def __neg__(self):
        return scale(self, -1)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return scale(self, other)
        return mul(self, other)

    __rmul__ = __mul__

    # serialization ------------------------------------------------------------
    def to_text(self) -> str:
        lines = []
        for e, c in self.items():
            lines.append(" ".join([*(str(v) for v in e), str(c)]))
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_text(cls, text: str, vars: VarSet, trunc: Trunc) -> "TruncatedSeries":
        terms = {}
        k = len(vars)
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != k + 1:
                raise LgError("CONFIG_PARSE", f"line {lineno}: expected {k} exponents and a coefficient")
            e = tuple(int(p) for p in parts[:k])
            if e in terms:
                raise LgError("CONFIG_PARSE", f"line {lineno}: repeated exponent {e}")
            terms[e] = Fraction(parts[k])
        return cls(vars, trunc, terms, strict=True)

    def to_json(self) -> dict:
        return {
            "vars": self.vars.to_json(),
            "order": self.trunc.order,
            "window": self.trunc.window,
            "terms": [[list(e), str(c)] for e, c in self.items()],
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "TruncatedSeries":
        vars = VarSet(tuple(n for n, _ in obj["vars"]), tuple(k for _, k in obj["vars"]))
        trunc = Trunc(int(obj["order"]), int(obj["window"]))
        return cls(vars, trunc, ((tuple(e), Fraction(c)) for e, c in obj["terms"]), strict=True)


def _check_same(a: TruncatedSeries, b: TruncatedSeries):
    if a.vars != b.vars or a.trunc != b.trunc:
        raise LgError("VAR_MISMATCH", f"{a.vars.names}/{a.trunc} vs {b.vars.names}/{b.trunc}")


def add(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    _check_same(a, b)
    out = dict(a._terms)
    for e, c in b._terms.items():
        v = out.get(e, 0) + c
        if v:
            out[e] = v
        else:
            out.pop(e, None)
    return TruncatedSeries._raw(a.vars, a.trunc, out)


def scale(a: TruncatedSeries, c) -> TruncatedSeries:
    c = _shrink(as_rational(c))
    if not c:
        return TruncatedSeries.zero(a.vars, a.trunc)
    return TruncatedSeries._raw(a.vars, a.trunc, {e: _shrink(v * c) for e, v in a._terms.items()})


def _by_degree(s: TruncatedSeries):
    deg = s.vars.degree
    return sorted(((deg(e), e, c) for e, c in s._terms.items()), key=lambda t: t[0])


def _accumulate(out: dict, e: tuple, c):
    v = out.get(e, 0) + c
    if v:
        out[e] = v
    else:
        out.pop(e, None)


def mul(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    """Cauchy product, truncated; products leaving the Laurent window are dropped."""
    _check_same(a, b)
    n, w = a.trunc.order, a.trunc.window
    lidx = a.vars.laurent_idx
    bs = _by_degree(b)
    out: dict = {}
    for da, ea, ca in _by_degree(a):
        room = n - da
        for db, eb, cb in bs:
            if db > room:
                break
            e = tuple(x + y for x, y in zip(ea, eb))
            if lidx and any(abs(e[i]) > w for i in lidx):
                continue
            _accumulate(out, e, ca * cb)
    return TruncatedSeries._raw(a.vars, a.trunc, {e: _shrink(c) for e, c in out.items()})


def power(a: TruncatedSeries, k: int) -> TruncatedSeries:
    if k < 0:
        raise ValueError("negative power; use expand_inverse_binomial or a unit inverse")
    result = TruncatedSeries.const(a.vars, a.trunc, 1)
    base = a
    while k:
        if k & 1:
            result = mul(result, base)
        k >>= 1
        if k:
            base = mul(base, base)
    return result


def hadamard(a: TruncatedSeries, b: TruncatedSeries, star_vars: Iterable[str]) -> TruncatedSeries:
    """Coefficientwise product in ``star_vars``, convolution in the other variables."""
    _check_same(a, b)
    star = sorted({a.vars.index(v) for v in star_vars})
    if not star:
        raise ValueError("star_vars must be nonempty")
    n, w = a.trunc.order, a.trunc.window
    vars = a.vars
    pidx, lidx = vars.power_idx, vars.laurent_idx
    rest = [i for i in range(len(vars)) if i not in star]
    buckets: dict = {}
    for e, c in b._terms.items():
        buckets.setdefault(tuple(e[i] for i in star), []).append((e, c))
    out: dict = {}
    for ea, ca in a._terms.items():
        group = buckets.get(tuple(ea[i] for i in star))
        if not group:
            continue
        for eb, cb in group:
            e = list(ea)
            for i in rest:
                e[i] += eb[i]
            if sum(e[i] for i in pidx) > n:
                continue
            if lidx and any(abs(e[i]) > w for i in lidx):
                continue
            _accumulate(out, tuple(e), ca * cb)
    return TruncatedSeries._raw(vars, a.trunc, {e: _shrink(c) for e, c in out.items()})


def coefficient_in(a: TruncatedSeries, var: str, k: int) -> TruncatedSeries:
    """Coefficient of ``var**k`` as a series with ``var`` removed."""
    i = a.vars.index(var)
    out = {e[:i] + e[i + 1:]: c for e, c in a._terms.items() if e[i] == k}
    return TruncatedSeries._raw(a.vars.without(var), a.trunc, out)


def residue(a: TruncatedSeries, var: str) -> TruncatedSeries:
    """Formal constant term in the LAURENT variable ``var``; ``var`` is removed."""
    if a.vars.kind(var) != LAURENT:
        raise LgError("NOT_LAURENT", f"{var} is a POWER variable")
    return coefficient_in(a, var, 0)


def expand_inverse_binomial(c, m: Mapping[str, int] | tuple, k: int, vars: VarSet, trunc: Trunc) -> TruncatedSeries:
    """Expansion of ``1/(1 - c*m)**(k+1)`` with coefficients ``C(d+k, k) c**d``.

    Directions tied to POWER degree must fit in the Laurent window (else
    WINDOW_OVERFLOW); a pure Laurent monomial is expanded up to the window edge.
    """
    c = as_rational(c)
    if c == 0:
        raise ValueError("c must be nonzero")
    if k < 0:
        raise ValueError("k must be >= 0")
    e = vars.monomial(m) if isinstance(m, Mapping) else tuple(m)
    if not any(e):
        raise LgError("NOT_SMALL", "cannot expand around the unit monomial")
    pidx, lidx = vars.power_idx, vars.laurent_idx
    if any(e[i] < 0 for i in pidx):
        raise LgError("NOT_SMALL", f"monomial {e} has a negative POWER exponent")
    deg = sum(e[i] for i in pidx)
    n, w = trunc.order, trunc.window
    terms = {}
    d = 0
    cd = Fraction(1)
    while True:
        if deg * d > n:
            break
        ed = tuple(d * v for v in e)
        if any(abs(ed[i]) > w for i in lidx):
            if deg > 0:
                raise LgError("WINDOW_OVERFLOW",
                              f"expansion of 1/(1-{c}*{e}) needs exponent {ed} beyond window {w}")
            break
        terms[ed] = comb(d + k, k) * cd
        d += 1
        cd *= c
    return TruncatedSeries(vars, trunc, terms)


def substitute_monomials(a: TruncatedSeries, target: VarSet, images: Mapping[str, Mapping[str, int]],
                         trunc: Trunc | None = None, *, strict: bool = True) -> TruncatedSeries:
    """Send each variable of ``a`` to a monomial in ``target``.

    Variables missing from ``images`` map to the same-named target variable.
    """
    trunc = trunc or a.trunc
    cols = []
    for name in a.vars.names:
        img = images.get(name, {name: 1})
        cols.append(target.monomial(img))
    width = len(target)
    out = {}
    for e, c in a._terms.items():
        t = [0] * width
        for v, col in zip(e, cols):
            if v:
                for j in range(width):
                    t[j] += v * col[j]
        t = tuple(t)
        out[t] = out.get(t, 0) + c
    return TruncatedSeries(target, trunc, out, strict=strict)


def embed(a: TruncatedSeries, target: VarSet, trunc: Trunc | None = None) -> TruncatedSeries:
    """Reinterpret ``a`` in a larger VarSet (missing variables get exponent 0)."""
    return substitute_monomials(a, target, {}, trunc)


def restrict_zero(a: TruncatedSeries, var: str) -> TruncatedSeries:
    """Set a POWER variable to zero (keeps the VarSet)."""
    i = a.vars.index(var)
    return TruncatedSeries._raw(a.vars, a.trunc, {e: c for e, c in a._terms.items() if e[i] == 0})


def retruncate(a: TruncatedSeries, trunc: Trunc) -> TruncatedSeries:
    return TruncatedSeries(a.vars, trunc, a._terms)


def first_difference(a: TruncatedSeries, b: TruncatedSeries):
    """Lowest-degree exponent where ``a`` and ``b`` differ, or None."""
    _check_same(a, b)
    keys = set(a._terms) | set(b._terms)
    bad = [e for e in keys if a._terms.get(e, 0) != b._terms.get(e, 0)]
    if not bad:
        return None
    return min(bad, key=lambda e: (a.vars.degree(e), e))
