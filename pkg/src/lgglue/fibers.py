"""Singular-fibre tables for invariants pulled back from the mirror cubic family.

The base family has fibres I3, I1, IV* over 0, 1/27 and infinity.  An
invariant is cleared of denominators and read factor by factor: a factor
``f`` entering with power ``k`` contributes ``{f^k = 0}`` to one preimage and
``{f^k = inf}`` to the other.  Only factors involving a declared chart
variable give components; the Kähler parameters do not.
"""
from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import LgError
from .expr import ONE, mono, mono_mul, mono_pow, parse_poly, poly_add, poly_mul, poly_pow, poly_str
from .invariants import FactoredInvariant

BASE_FIBRES = ((Fraction(0), "I3"), (Fraction(1, 27), "I1"), (None, "IV*"))
INF = "inf"


def zero_type(k: int) -> str:
    return f"I{3 * k}"


def pole_type(k: int) -> str:
    """Pullback of IV* by a map with pole order ``k``: IV*, IV or smooth by ``k mod 3``."""
    return {1: "IV*", 2: "IV", 0: "smooth"}[k % 3]


def _monic(p: Mapping) -> tuple:
    """Polynomial up to a nonzero scalar, as a hashable key."""
    items = sorted(p.items())
    lead = items[0][1]
    return tuple((m, Fraction(c) / lead) for m, c in items)


def _clear(p: Mapping) -> tuple:
    """Split ``p`` into a monomial and a polynomial with no monomial factor."""
    names = {v for m in p for v, _ in m}
    low = {v: min(dict(m).get(v, 0) for m in p) for v in names}
    shift = mono({v: -e for v, e in low.items()})
    return mono(low), {mono_mul(m, shift): c for m, c in p.items()}


@dataclass(frozen=True)
class LocusComponent:
    factor: tuple      # monic polynomial key
    text: str          # factor as displayed
    power: int         # k >= 1
    value: str         # "0" or "inf": where the factor sits
    fibre: str

    @property
    def key(self) -> tuple:
        return (self.factor, self.power, self.value)

    def __str__(self):
        base = self.text if self.power == 1 else f"{self.text}^{self.power}"
        return f"{{{base}={self.value}}}"


@dataclass
class FiberTable:
    zero: list
    infty: list
    one_27: list

    def to_json(self) -> dict:
        return {"zero": [[str(c), c.fibre] for c in self.zero],
                "infty": [[str(c), c.fibre] for c in self.infty],
                "one_27": [list(x) for x in self.one_27]}


def factor_orders(inv: FactoredInvariant, chart: Sequence[str]) -> tuple:
    """``({key: (text, order)}, numerator, denominator)`` of the invariant with denominators cleared.

    Binomial factors keep their sign, so ``numerator / denominator`` equals
    the invariant exactly.
    """
    chart = set(chart)
    const = Fraction(inv.constant)
    monomial = ONE
    polys: dict = {}
    for f, k in inv.factors:
        p = f.poly()
        if f.is_monomial:
            (m, c), = p.items()
            const *= Fraction(c) ** k
            monomial = mono_mul(monomial, mono_pow(m, k))
            continue
        low, rest = _clear(p)
        monomial = mono_mul(monomial, mono_pow(low, k))
        key = _monic(rest)
        text, poly, order = polys.get(key, (f"({poly_str(rest)})", rest, 0))
        polys[key] = (text, poly, order + k)
    orders = {}
    num, den = {ONE: const}, {ONE: Fraction(1)}
    for v, e in monomial:
        if v in chart:
            orders[_monic({((v, 1),): 1})] = (v, e)
        if e > 0:
            num = poly_mul(num, {((v, e),): Fraction(1)})
        else:
            den = poly_mul(den, {((v, -e),): Fraction(1)})
    for key, (text, p, k) in polys.items():
        if not k:
            continue
        if any(v in chart for m in p for v, _ in m):
            orders[key] = (text, k)
        if k > 0:
            num = poly_mul(num, poly_pow(p, k))
        else:
            den = poly_mul(den, poly_pow(p, -k))
    return {k: v for k, v in orders.items() if v[1]}, num, den


def _sort(components: list) -> list:
    return sorted(components, key=lambda c: (c.text, c.power, c.value))


def classify(inv: FactoredInvariant, chart: Sequence[str]) -> FiberTable:
    orders, num, den = factor_orders(inv, chart)
    zero, infty = [], []
    for key, (text, k) in orders.items():
        n = abs(k)
        zero.append(LocusComponent(key, text, n, "0" if k > 0 else INF, zero_type(n)))
        infty.append(LocusComponent(key, text, n, INF if k > 0 else "0", pole_type(n)))
    one = []
    if orders:
        one.append([equation_text(num, den), "I1"])
    return FiberTable(_sort(zero), _sort(infty), one)


def equation_text(num: Mapping, den: Mapping) -> str:
    return f"{poly_str(den)} = 27*({poly_str(num)})"


def equation_key(text: str) -> tuple:
    """``lhs - rhs`` up to scalar, for equations such as ``x0(1-y) = 27q1``."""
    lhs, sep, rhs = text.partition("=")
    if not sep:
        raise LgError("CONFIG_PARSE", f"not an equation: {text!r}")
    p = poly_add(parse_poly(_implicit(lhs)), parse_poly(_implicit(rhs)), -1)
    if not p:
        raise LgError("CONFIG_PARSE", f"trivial equation {text!r}")
    return _monic(p)


# ---------------------------------------------------------------------------
# printed component notation

_TOKEN = re.compile(r"\s*(?:([A-Za-z]+\d*)|(\d+)|(\*\*|[-+*/^()=]))")


def _implicit(text: str) -> str:
    """TeX-flavoured input to Python syntax: strip markup, insert implicit products."""
    t = text.replace("\\infty", "inf").replace("\\{", "").replace("\\}", "")
    t = t.replace("{", "").replace("}", "").replace("_", "").replace(" ", "")
    out, prev, pos = [], None, 0
    while pos < len(t):
        m = _TOKEN.match(t, pos)
        if not m or m.end() == pos:
            raise LgError("CONFIG_PARSE", f"cannot read {text!r}")
        pos = m.end()
        kind = "name" if m.group(1) else "num" if m.group(2) else m.group(3)
        if prev in ("name", "num", ")") and kind in ("name", "num", "("):
            out.append("*")
        out.append(m.group(0).strip())
        prev = kind
    return "".join(out)


def parse_component(text: str) -> tuple:
    """``{(y-q0)^3=\\infty}`` -> ``(factor key, power, value)``."""
    body = _implicit(text)
    lhs, sep, rhs = body.partition("=")
    if not sep:
        raise LgError("CONFIG_PARSE", f"component without '=': {text!r}")
    power = 1
    m = re.fullmatch(r"(.*)\^(\d+)", lhs)
    if m and (m.group(1).endswith(")") or re.fullmatch(r"[A-Za-z]\d*", m.group(1))):
        lhs, power = m.group(1), int(m.group(2))
    if rhs in ("inf", "0"):
        p = parse_poly(lhs)
        value = "0" if rhs == "0" else INF
    else:
        p = poly_add(parse_poly(lhs), parse_poly(rhs), -1)
        value = "0"
    if not p:
        raise LgError("CONFIG_PARSE", f"empty factor in {text!r}")
    _, rest = _clear(p) if len(p) > 1 else (None, p)
    if len(p) == 1:
        (mm, _), = p.items()
        if len(mm) != 1:
            raise LgError("CONFIG_PARSE", f"component {text!r} is not a single variable")
        (v, e), = mm
        rest, power = {((v, 1),): 1}, power * e
    return _monic(rest), power, value


# ---------------------------------------------------------------------------
# golden tables


def golden_dir() -> Path:
    env = os.environ.get("LGGLUE_GOLDEN_DIR")
    return Path(env) if env else Path(__file__).parent / "tables"


def load_golden(name: str, directory: Path | None = None) -> dict:
    path = (directory or golden_dir()) / f"{name}.json"
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise LgError("UNKNOWN_SUITE", f"no golden table {path}") from None
    except json.JSONDecodeError as exc:
        raise LgError("CONFIG_PARSE", f"{path}: {exc}") from None


def load_errata(name: str, directory: Path | None = None) -> list:
    path = (directory or golden_dir()) / f"{name}.errata.json"
    if not path.exists():
        return []
    with open(path) as fh:
        return json.load(fh)["corrections"]


def golden_names(directory: Path | None = None) -> list:
    d = directory or golden_dir()
    return sorted(p.stem for p in d.glob("*.json") if not p.stem.endswith(".errata"))


SECTIONS = ("zero", "infty", "one_27")


def _entry_key(section: str, text: str, fibre: str) -> tuple:
    if section == "one_27":
        return (section, equation_key(text), fibre)
    return (section, parse_component(text), fibre)


def _safe_key(section, text, fibre):
    try:
        return _entry_key(section, text, fibre)
    except LgError:
        return (section, ("unreadable", text), fibre)


def table_keys(table: Mapping) -> set:
    """Set of comparable ``(section, component, fibre)`` entries of a JSON table."""
    return {_safe_key(s, t, f) for s in SECTIONS for t, f in table.get(s, [])}


def apply_errata(table: Mapping, errata: Iterable[Mapping]) -> dict:
    out = {s: [list(x) for x in table.get(s, [])] for s in SECTIONS}
    for e in errata:
        rows = out[e["section"]]
        if e.get("printed") is not None:
            target = list(e["printed"])
            if target not in rows:
                raise LgError("INVALID_DATA", f"erratum refers to missing entry {target}")
            rows.remove(target)
        if e.get("corrected") is not None:
            rows.append(list(e["corrected"]))
    return out


def compare_tables(computed: Mapping, expected: Mapping) -> dict:
    """Set comparison of ``(component, fibre)`` pairs per section."""
    a, b = table_keys(computed), table_keys(expected)
    only_computed = sorted(_describe(computed, a - b))
    only_expected = sorted(_describe(expected, b - a))
    return {"match": a == b, "only_computed": only_computed, "only_expected": only_expected}


def _describe(table: Mapping, keys: set) -> list:
    out = []
    for s in SECTIONS:
        for t, f in table.get(s, []):
            if _safe_key(s, t, f) in keys:
                out.append(f"{s}: {t} [{f}]")
    return out


def verify_golden(name: str, directory: Path | None = None) -> dict:
    """Classify the golden file's invariant; compare with the printed table after errata.

    Also checks that the raw difference between computation and the printed
    table is exactly what the errata account for.
    """
    g = load_golden(name, directory)
    inv = FactoredInvariant.parse(g["invariant"])
    computed = classify(inv, g["chart"]).to_json()
    errata = load_errata(name, directory)
    corrected = apply_errata(g["table"], errata)
    cmp = compare_tables(computed, corrected)
    raw = compare_tables(computed, g["table"])
    printed_keys, computed_keys = table_keys(g["table"]), table_keys(computed)
    expected_missing = {_safe_key(e["section"], *e["printed"]) for e in errata if e.get("printed") is not None}
    expected_extra = {_safe_key(e["section"], *e["corrected"]) for e in errata if e.get("corrected") is not None}
    errata_exact = (printed_keys - computed_keys == expected_missing
                    and computed_keys - printed_keys == expected_extra)
    return {"name": name, "match": cmp["match"], "errata_exact": errata_exact, "errata": len(errata),
            "only_computed": cmp["only_computed"], "only_expected": cmp["only_expected"],
            "raw_only_computed": raw["only_computed"], "raw_only_printed": raw["only_expected"],
            "computed": computed}
