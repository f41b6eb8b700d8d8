"""Hadamard-product gluing checks for periods and I-functions.

An instance compares ``outer * corr (* extra ...)`` against
``Res_v(a * b)`` where ``*`` is the Hadamard product in the Kähler
variables.  ``a`` and ``b`` may themselves be residues of Hadamard products,
which is how iterated degenerations are expressed.  Constituents are built
from functional invariants by pullback, never from the other side's
intermediates.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Sequence

from .errors import LgError
from .invariants import FactoredInvariant, pullback_series, substitute
from .nilpotent import (IFunction, LogPrefactor, NilGenSet, NilNumber, NilpotentElement, assemble, nil_hadamard,
                        nil_residue, regenerate, rising, substitute_generator)
from .series import (LAURENT, POWER, Trunc, TruncatedSeries, VarSet, embed, first_difference, hadamard, residue,
                     retruncate)
from . import toric


@dataclass(frozen=True)
class Glued:
    """``Res_{residue_var}(a * b)``, a node on the glued side of an instance."""
    a: object
    b: object
    residue_var: str


@dataclass
class GluingInstance:
    name: str
    order: int
    lhs_outer: object
    lhs_corr: object
    rhs_a: object
    rhs_b: object
    star_vars: tuple
    residue_var: str
    extra_lhs: tuple = ()
    identification: dict = field(default_factory=dict)
    substitutions: tuple = ()        # (generator, linear form) applied to the glued side first
    rebuild: Callable | None = None  # window -> GluingInstance, used by the stability guard

    def constituents(self) -> dict:
        out = {"lhs_outer": self.lhs_outer, "lhs_corr": self.lhs_corr}
        for i, e in enumerate(self.extra_lhs):
            out[f"lhs_extra{i}"] = e

        def walk(prefix, node):
            if isinstance(node, Glued):
                walk(prefix + ".a", node.a)
                walk(prefix + ".b", node.b)
            else:
                out[prefix] = node

        walk("rhs_a", self.rhs_a)
        walk("rhs_b", self.rhs_b)
        return out

    def with_constituent(self, path: str, value) -> "GluingInstance":
        """Copy with one leaf replaced (used for failure injection)."""
        if path in ("lhs_outer", "lhs_corr", "rhs_a", "rhs_b"):
            return replace(self, **{path: value}, rebuild=None)
        if path.startswith("lhs_extra"):
            extra = list(self.extra_lhs)
            extra[int(path[len("lhs_extra"):])] = value
            return replace(self, extra_lhs=tuple(extra), rebuild=None)
        head, *rest = path.split(".")

        def put(node, steps):
            if not steps:
                return value
            step, *more = steps
            if step == "a":
                return Glued(put(node.a, more), node.b, node.residue_var)
            return Glued(node.a, put(node.b, more), node.residue_var)

        return replace(self, **{head: put(getattr(self, head), rest)}, rebuild=None)


@dataclass
class GluingReport:
    instance: str
    order: int
    verdict: bool
    first_mismatch: dict | None
    runtime_ms: int
    details: dict = field(default_factory=dict)
    table: list | None = None

    def to_json(self, stable: bool = False) -> dict:
        out = {"instance": self.instance, "order": self.order, "verdict": self.verdict,
               "first_mismatch": self.first_mismatch, "runtime_ms": 0 if stable else self.runtime_ms}
        if self.details:
            out["details"] = self.details
        if self.table is not None:
            out["table"] = self.table
        return out


# ---------------------------------------------------------------------------
# evaluation


def _eval_series(node, star_vars) -> TruncatedSeries:
    if isinstance(node, Glued):
        return residue(hadamard(_eval_series(node.a, star_vars), _eval_series(node.b, star_vars), star_vars),
                       node.residue_var)
    return node


def _chain(parts, op):
    out = parts[0]
    for p in parts[1:]:
        out = op(out, p)
    return out


def _common(a: TruncatedSeries, b: TruncatedSeries) -> tuple:
    if a.vars != b.vars:
        raise LgError("VAR_MISMATCH", f"{a.vars.names} vs {b.vars.names}")
    trunc = Trunc(min(a.trunc.order, b.trunc.order), min(a.trunc.window, b.trunc.window))
    return retruncate(a, trunc), retruncate(b, trunc)


def _mismatch(lhs: TruncatedSeries, rhs: TruncatedSeries) -> dict | None:
    exps = first_difference(lhs, rhs)
    if exps is None:
        return None
    return {"exponents": dict(zip(lhs.vars.names, exps)), "degree": lhs.vars.degree(exps),
            "lhs": str(lhs.coeff(exps)), "rhs": str(rhs.coeff(exps))}


def _table(lhs: TruncatedSeries, rhs: TruncatedSeries) -> list:
    keys = sorted(set(lhs.terms()) | set(rhs.terms()), key=lambda e: (lhs.vars.degree(e), e))
    return [{"exponents": list(k), "lhs": str(lhs.coeff(k)), "rhs": str(rhs.coeff(k))} for k in keys]


def glue_sides(g: GluingInstance) -> tuple:
    """``(lhs, rhs)`` series of a period instance, on a common truncation."""
    lhs = _chain([g.lhs_outer, g.lhs_corr, *g.extra_lhs], lambda x, y: hadamard(x, y, g.star_vars))
    rhs = _eval_series(Glued(g.rhs_a, g.rhs_b, g.residue_var), g.star_vars)
    return _common(lhs, rhs)


def verify_period_gluing(g: GluingInstance, *, emit_table: bool = False, stability: bool = True) -> GluingReport:
    start = time.perf_counter()
    lhs, rhs = glue_sides(g)
    mismatch = _mismatch(lhs, rhs)
    details = {}
    verdict = mismatch is None
    if stability and g.rebuild is not None:
        stable = window_stable(g, lhs, rhs)
        details["window_stable"] = stable
        verdict = verdict and stable
    ms = int((time.perf_counter() - start) * 1000)
    return GluingReport(g.name, g.order, verdict, mismatch, ms, details,
                        _table(lhs, rhs) if emit_table else None)


def window_stable(g: GluingInstance, lhs: TruncatedSeries, rhs: TruncatedSeries) -> bool:
    """Rebuild with a wider Laurent window; both sides must not change inside the old one."""
    wide = g.rebuild(lhs.trunc.window + max(g.order, 1))
    wl, wr = glue_sides(wide)
    return retruncate(wl, lhs.trunc) == lhs and retruncate(wr, rhs.trunc) == rhs


# ---------------------------------------------------------------------------
# I-functions


def _as_ifunction(x) -> IFunction:
    return x if isinstance(x, IFunction) else IFunction(x)


def _apply_substitutions(f: IFunction, subs) -> IFunction:
    body, pref = f.body, f.prefactor
    for g, form in subs:
        if g in body.gens.generators:
            body = substitute_generator(body, g, NilpotentElement.linear(body.gens, body.vars, body.trunc, form))
            body = regenerate(body, NilGenSet(tuple(x for x in body.gens.generators if x != g)))
        pref = pref.substitute(g, form)
    return IFunction(body, pref)


def verify_I_gluing(g: GluingInstance, *, max_degree: int = 2, emit_table: bool = False) -> GluingReport:
    """Per-basis-monomial comparison up to ``max_degree``; prefactors must agree.

    Raises ``PREFACTOR_MISMATCH`` when the glued side keeps a net power of
    the residue variable or its Kähler exponents differ from the other side.
    """
    start = time.perf_counter()
    outer, corr = _as_ifunction(g.lhs_outer), _as_ifunction(g.lhs_corr)
    a = _apply_substitutions(_as_ifunction(g.rhs_a), g.substitutions)
    b = _apply_substitutions(_as_ifunction(g.rhs_b), g.substitutions)
    lhs = nil_hadamard(outer, corr, g.star_vars)
    glued = nil_hadamard(a, b, g.star_vars)
    rhs_pref = glued.prefactor
    if rhs_pref.exponent(g.residue_var):
        raise LgError("PREFACTOR_MISMATCH",
                      f"{g.name}: net {g.residue_var} exponent {rhs_pref.exponent(g.residue_var)}")
    if rhs_pref != lhs.prefactor:
        raise LgError("PREFACTOR_MISMATCH", f"{g.name}: {lhs.prefactor.to_json()} vs {rhs_pref.to_json()}")
    rbody = nil_residue(glued.body, g.residue_var)
    lbody = lhs.body
    if lbody.gens != rbody.gens:
        raise LgError("GEN_MISMATCH", f"{lbody.gens.generators} vs {rbody.gens.generators}")
    first = None
    higher_equal = True
    for key in lbody.gens.basis():
        ls, rs = lbody.component(key), rbody.component(key)
        ls, rs = _common(ls, rs)
        diff = _mismatch(ls, rs)
        if len(key) > max_degree:
            higher_equal = higher_equal and diff is None
            continue
        if diff is not None and first is None:
            first = diff
            first["generators"] = lbody.gens.ordered(key)
    ms = int((time.perf_counter() - start) * 1000)
    details = {"prefactor": lhs.prefactor.to_json(), "higher_degree_equal": higher_equal}
    table = None
    if emit_table:
        table = []
        for key in lbody.gens.basis(max_degree):
            ls, rs = _common(lbody.component(key), rbody.component(key))
            for row in _table(ls, rs):
                row["generators"] = lbody.gens.ordered(key)
                table.append(row)
    return GluingReport(g.name, g.order, first is None, first, ms, details, table)


# ---------------------------------------------------------------------------
# built-in period instances

CUBIC = "mirror_cubic"


def _parse(text: str, order: Sequence[str]) -> FactoredInvariant:
    return FactoredInvariant.parse(text, order)


def _pull(inv: str, pref: str, vars: VarSet, trunc: Trunc, small: Sequence[str], ident=None,
          base=CUBIC) -> TruncatedSeries:
    i = _parse(inv, small)
    p = _parse(pref, small)
    if ident:
        i, p = substitute(i, ident, small), substitute(p, ident, small)
    return pullback_series(base, i, p, vars, trunc)


def example1_instance(order: int, window: int | None = None) -> GluingInstance:
    """Conifold-transition example: two Kähler parameters, gluing variable ``y``."""
    W = window or 2 * max(order, 1)
    small = ["q1", "q0", "x0", "y", "y1", "y2", "q01", "q02"]
    ident = {"q10": "q1", "q11": "q1", "q12": "q1", "q01": "q0", "y1": "y", "y2": "q02/y"}
    full = VarSet(("q1", "q0", "x0", "y"), (POWER, POWER, LAURENT, LAURENT))
    base = full.without("y")
    t = Trunc.at(order, W)
    outer = residue(_pull("q1/(x0*(1-y)*(1-q0/y)^3)", "1/((1-y)*(1-q0/y))", full, t, small), "y")
    corr = _pull("q10/x0", "1", base, t, small, ident)
    a = _pull("q11/(x0*(1-q01/y1)^3)", "1/(1-q01/y1)", full, t, small, ident)
    b = _pull("q12/(x0*(1-q02/y2))", "1/(1-q02/y2)", full, t, small, ident)
    return GluingInstance("example1", order, outer, corr, a, b, ("q1",), "y", identification=ident,
                          rebuild=lambda w: example1_instance(order, w))


def example2_instance(order: int, window: int | None = None) -> GluingInstance:
    """Quartic threefold example; the outer period uses the prefactor ``1/(1-y)``."""
    W = window or 2 * max(order, 1)
    small = ["q1", "x0", "y", "y1", "y2", "q02"]
    ident = {"q10": "q1", "q11": "q1", "q12": "q1/y2", "y1": "y", "y2": "q02/y"}
    full = VarSet(("q1", "x0", "y"), (POWER, LAURENT, LAURENT))
    base = full.without("y")
    t = Trunc.at(order, W)
    outer = residue(_pull("q1/(x0*y*(1-y)^3)", "1/(1-y)", full, t, small), "y")
    corr = _pull("q10/x0", "1", base, t, small, ident)
    a = _pull("q11/(x0*y1)", "1", full, t, small, ident)
    b = _pull("q12*y2/(x0*(1-q02/y2)^3)", "1/(1-q02/y2)", full, t, small, ident)
    return GluingInstance("example2", order, outer, corr, a, b, ("q1",), "y", identification=ident,
                          rebuild=lambda w: example2_instance(order, w))


NORMAL_CONE_IDENT = {"q10": "q1", "q11": "q1", "q12": "q1*q22^3/y2^3", "y2": "q22/y1"}


def normal_cone_pieces(order: int, W: int, vars: VarSet, y1: str = "y1") -> tuple:
    """``(X1, X2)`` of the degeneration to the normal cone, glued along ``y1``."""
    small = ["q1", "x0", y1, "y", "q22", "y2"]
    t = Trunc.at(order, W)
    ident = dict(NORMAL_CONE_IDENT)
    ident["y2"] = f"q22/{y1}"
    a = _pull(f"q11/(x0*{y1}^3)", "1", vars, t, small, ident)
    b = _pull("q12*y2^3/((y-q22/y2)*q22^3)", "1/(1-q22/(y2*y))", vars, t, small, ident)
    return a, b


def normal_cone_instance(order: int, window: int | None = None) -> GluingInstance:
    W = window or 4 * max(order, 1)
    full = VarSet(("q1", "x0", "y", "y1"), (POWER, LAURENT, LAURENT, LAURENT))
    base = full.without("y1")
    t = Trunc.at(order, W)
    outer = residue(_pull("q1/(x0*(y-x0)^3)", "1/(1-x0/y)", base, t, ["q1", "x0", "y"]), "x0")
    outer = embed(outer, base)
    corr = _pull("q10/x0", "1", base, t, ["q1", "x0"], {"q10": "q1"})
    a, b = normal_cone_pieces(order, W, full)
    return GluingInstance("normal_cone", order, outer, corr, a, b, ("q1",), "y1",
                          identification=dict(NORMAL_CONE_IDENT, y1="y-x0"),
                          rebuild=lambda w: normal_cone_instance(order, w))


QUINTIC_SMALL = ["q1", "x0", "y", "u"]


def double_residue_quintic(order: int, window: int | None = None) -> TruncatedSeries:
    """Quintic period as a double residue of the cubic pullback."""
    W = window or 4 * max(order, 1)
    vars = VarSet(("q1", "x0", "y"), (POWER, LAURENT, LAURENT))
    t = Trunc.at(order, W)
    s = _pull("q1/(x0*(1-y)*(y-x0)^3)", "1/((1-y)*(1-x0/y))", vars, t, QUINTIC_SMALL)
    return residue(residue(s, "y"), "x0")


def _quintic_pieces(order: int, W: int) -> dict:
    vars = VarSet(("q1", "x0", "y"), (POWER, LAURENT, LAURENT))
    t = Trunc.at(order, W)
    out = {}
    out["X"] = double_residue_quintic(order, W)
    d_vars = VarSet(("q1", "x0"), (POWER, LAURENT))
    out["D"] = residue(_pull("q1/(x0*(1-x0)^3)", "1/(1-x0)", d_vars, t, QUINTIC_SMALL), "x0")
    out["X1"] = residue(_pull("q1/(x0*(y-x0)^3)", "1/(1-x0/y)", vars, t, QUINTIC_SMALL), "x0")
    out["X2"] = residue(_pull("q1/(x0*(1-x0)^3*(1-y))", "1/((1-y)*(1-x0))", vars, t, QUINTIC_SMALL), "x0")
    return out


def quintic_instance(order: int, window: int | None = None) -> GluingInstance:
    """Quintic period times the quartic K3 period against the two-piece residue."""
    W = window or 4 * max(order, 1)
    p = _quintic_pieces(order, W)
    return GluingInstance("quintic", order, p["X"], p["D"], p["X1"], p["X2"], ("q1",), "y",
                          identification={"q11": "q1", "q12": "q1/y2^4", "q10": "q1", "y2": "q2/y"},
                          rebuild=lambda w: quintic_instance(order, w))


def quintic_four_factor_instance(order: int, window: int | None = None) -> GluingInstance:
    """Two-step degeneration: four rank-2 pieces, two corrections, three residues.

    The first piece degenerates to the normal cone (glued along ``y1``); the
    second splits along ``u = 1 - x0`` into a cubic-type piece and a piece
    with invariant ``q1/((1-u)(1-y))``.
    """
    W = window or 4 * max(order, 1)
    p = _quintic_pieces(order, W)
    t = Trunc.at(order, W)
    base = VarSet(("q1", "x0"), (POWER, LAURENT))
    corr1 = _pull("q1/x0", "1", base, t, ["q1", "x0"])
    corr2 = _pull("q1/x0", "1", base, t, ["q1", "x0"])
    v1 = VarSet(("q1", "x0", "y", "y1"), (POWER, LAURENT, LAURENT, LAURENT))
    x11, x12 = normal_cone_pieces(order, W, v1)
    v2 = VarSet(("q1", "x0", "y", "u"), (POWER, LAURENT, LAURENT, LAURENT))
    x21 = _pull("q1/(x0*u^3)", "1", v2, t, QUINTIC_SMALL)
    x22 = _pull("q1/((1-u)*(1-y))", "1/((1-u)*(1-y))", v2, t, QUINTIC_SMALL)
    outer = embed(p["X"], base)
    corr = embed(p["D"], base)
    return GluingInstance("quintic_four_factor", order, outer, corr, Glued(x11, x12, "y1"), Glued(x21, x22, "u"),
                          ("q1",), "y", extra_lhs=(corr1, corr2),
                          rebuild=lambda w: quintic_four_factor_instance(order, w))


def toric_instance(data: toric.ToricCIData, order: int, *, strip_rho_factor: bool = False,
                   window: int | None = None, name: str | None = None) -> GluingInstance:
    W = window or toric.default_window(data, order)
    kw = {"strip_rho_factor": strip_rho_factor, "window": W}
    outer = toric.period_X(data, order, **kw)
    corr = toric.period_D0(data, order, **kw)
    a = toric.period_X1(data, order, **kw)
    b = toric.period_X2(data, order, **kw)
    label = name or (data.name + ("_stripped" if strip_rho_factor else ""))
    return GluingInstance(label, order, outer, corr, a, b, data.qvars(), "y",
                          rebuild=lambda w: toric_instance(data, order, strip_rho_factor=strip_rho_factor,
                                                           window=w, name=label))


# ---------------------------------------------------------------------------
# built-in I-function instances


def _rising_ratio(num: list, den: list) -> NilNumber:
    """``prod rising(num) / prod rising(den)`` with entries ``(form, n)``."""
    out = NilNumber({frozenset(): Fraction(1)})
    for form, n in num:
        out = out * rising(form, 1, n)
    for form, n in den:
        out = out * rising(form, 1, n).inverse()
    return out


def example1_I_instance(order: int, window: int | None = None) -> GluingInstance:
    """Generators ``H, P``; ``1/x0`` absorbed into ``q1``."""
    W = window or max(order, 1)
    gens = NilGenSet(("H", "P"))
    full = VarSet(("q1", "q0", "y"), (POWER, POWER, LAURENT))
    base = full.without("y")
    t = Trunc.at(order, W)
    H, P = {"H": 1}, {"P": 1}
    HP3, HP = {"H": 3, "P": 1}, {"H": 1, "P": 1}
    H3 = {"H": 3}
    outer, corr, a, b = [], [], [], []
    for d1 in range(order + 1):
        corr.append(((d1, 0), _rising_ratio([(H3, 3 * d1)], [(H, d1)] * 3)))
        for d0 in range(order + 1 - d1):
            outer.append(((d1, d0), _rising_ratio([(HP3, 3 * d1 + d0), (HP, d1 + d0)], [(H, d1)] * 4 + [(P, d0)] * 2)))
            # x = q0/y
            a.append(((d1, d0, -d0), _rising_ratio([(HP3, 3 * d1 + d0)], [(H, d1)] * 3 + [(P, d0)])))
        for d0 in range(W + 1):
            b.append(((d1, 0, d0), _rising_ratio([(H3, 3 * d1), (HP, d1 + d0)], [(H, d1)] * 4 + [(P, d0)])))
    I = lambda terms, vars, pref: IFunction(assemble(gens, vars, t, terms), LogPrefactor.of(pref))
    return GluingInstance(
        "example1_I", order,
        I(outer, base, {"q1": H, "q0": P}), I(corr, base, {"q1": H}),
        I(a, full, {"q1": H, "q0": P, "y": {"P": -1}}), I(b, full, {"q1": H, "y": P}),
        ("q1",), "y")


def example2_I_instance(order: int, window: int | None = None) -> GluingInstance:
    """Generators ``H, P`` on the glued side; ``P`` is set to ``H`` before gluing."""
    W = window or max(order, 1)
    g1 = NilGenSet(("H",))
    g2 = NilGenSet(("H", "P"))
    full = VarSet(("q1", "y"), (POWER, LAURENT))
    base = full.without("y")
    t = Trunc.at(order, W)
    H, P, H3, H4, H3P = {"H": 1}, {"P": 1}, {"H": 3}, {"H": 4}, {"H": 3, "P": 1}
    outer, corr, a, b = [], [], [], []
    for d in range(order + 1):
        outer.append(((d,), _rising_ratio([(H4, 4 * d)], [(H, d)] * 4)))
        corr.append(((d,), _rising_ratio([(H3, 3 * d)], [(H, d)] * 3)))
        a.append(((d, -d), _rising_ratio([(H3, 3 * d)], [(H, d)] * 3)))
        for d0 in range(W + 1):
            b.append(((d, d0), _rising_ratio([(H3P, 3 * d + d0)], [(H, d)] * 3 + [(P, d0)])))
    return GluingInstance(
        "example2_I", order,
        IFunction(assemble(g1, base, t, outer), LogPrefactor.of({"q1": H})),
        IFunction(assemble(g1, base, t, corr), LogPrefactor.of({"q1": H})),
        IFunction(assemble(g1, full, t, a), LogPrefactor.of({"q1": H, "y": {"H": -1}})),
        IFunction(assemble(g2, full, t, b), LogPrefactor.of({"q1": H, "y": P})),
        ("q1",), "y", substitutions=(("P", H),))


def toric_I_instance(data: toric.ToricCIData, order: int, *, strip_rho_factor: bool = False,
                     substitute_after: bool = False, name: str | None = None) -> GluingInstance:
    """Toric I-functions with ``p0`` set to the second refined class.

    By default every factor is evaluated at ``p0 = rho02`` before the product
    is formed.  ``substitute_after`` instead builds the ``p0`` generator and
    substitutes at the end, which only agrees up to nilpotent degree 1 when
    ``rho02`` involves two or more generators.
    """
    kw = {"strip_rho_factor": strip_rho_factor}
    rho02 = {g: c for g, c in zip(data.gens(), data.rho02) if c}
    outer = toric.I_function("X", data, order, **kw)
    corr = toric.I_function("D0", data, order, **kw)
    a = toric.I_function("X1", data, order, **kw)
    if substitute_after:
        b = toric.I_function("X2", data, order, **kw)
        subs = (("p0", rho02),)
    else:
        b = toric.I_function("X2", data, order, p0=rho02, **kw)
        subs = ()
    label = name or (data.name + "_I" + ("_stripped" if strip_rho_factor else ""))
    return GluingInstance(label, order, outer, corr, a, b, data.qvars(), "y", substitutions=subs)


PERIOD_BUILDERS = {
    "example1": example1_instance,
    "example2": example2_instance,
    "normal_cone": normal_cone_instance,
    "quintic": quintic_instance,
    "quintic_four_factor": quintic_four_factor_instance,
}

I_BUILDERS = {
    "example1_I": example1_I_instance,
    "example2_I": example2_I_instance,
}
