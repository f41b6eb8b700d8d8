from fractions import Fraction
from math import comb, factorial

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lgglue import relations, toric
from lgglue.errors import LgError
from lgglue.invariants import FactoredInvariant, check_relation, pullback_series, series_confirm, substitute
from lgglue.series import POWER, Trunc, VarSet

BINOMIALS = ["(1-y)", "(1-q0/y)", "(y-x0)", "(1-x0)", "(1+2*y)", "(3-q1)"]


@st.composite
def invariants(draw):
    const = draw(st.fractions(min_value=-9, max_value=9, max_denominator=5).filter(bool))
    parts = [f"({const})"]
    for v in ("q1", "x0", "y"):
        k = draw(st.integers(-3, 3))
        if k:
            parts.append(f"{v}^({k})")
    for b in draw(st.lists(st.sampled_from(BINOMIALS), max_size=3)):
        parts.append(f"{b}^({draw(st.sampled_from([-3, -2, -1, 1, 2, 3]))})")
    return FactoredInvariant.parse("*".join(parts))


@given(invariants(), invariants())
def test_product_relation_holds(a, b):
    assert check_relation([a, b], [a * b]).holds


@given(invariants())
def test_inverse(a):
    assert (a * a.inverse()).is_one()


@given(invariants(), invariants())
def test_perturbed_relation_fails(a, b):
    bad = a * FactoredInvariant.parse("(1-y)")
    report = check_relation([bad, b], [a * b])
    assert not report.holds
    assert report.residual.normal_form() == FactoredInvariant.parse("1-y", ["y"]).normal_form()


@given(invariants())
def test_json_round_trip(a):
    assert FactoredInvariant.from_json(a.to_json()).normal_form() == a.normal_form()


def test_parse_rejects_three_term_factor():
    with pytest.raises(LgError) as e:
        FactoredInvariant.parse("q1/(1-x-y)")
    assert e.value.code == "NOT_FACTORED"


def test_substitution_of_binomial_image():
    inv = FactoredInvariant.parse("q/(x*u^3)")
    out = substitute(inv, {"u": "1-x"})
    assert out.normal_form() == FactoredInvariant.parse("q/(x*(1-x)^3)").normal_form()


def test_geometric_pullback_matches_closed_form():
    # 1/(1 - q/(1-x)) = (1-x)/(1-x-q); coefficient of q^a x^b is C(a+b,a) - C(a+b-1,a)
    vars = VarSet(("q", "x"), (POWER, POWER))
    s = pullback_series("geometric", FactoredInvariant.parse("q/(1-x)", ["q", "x"]), None, vars, Trunc.at(7))
    for a in range(8):
        for b in range(8 - a):
            expected = comb(a + b, a) - (comb(a + b - 1, a) if a + b >= 1 else 0)
            assert s.coeff((a, b)) == expected


def test_mirror_cubic_pullback_leading_terms():
    vars = VarSet(("q",), (POWER,))
    s = pullback_series("mirror_cubic", FactoredInvariant.parse("q"), None, vars, Trunc.at(5))
    assert [s.coeff((d,)) for d in range(6)] == [factorial(3 * d) // factorial(d) ** 3 for d in range(6)]


def test_non_small_ratio_rejected():
    vars = VarSet(("q",), (POWER,))
    with pytest.raises(LgError) as e:
        pullback_series("mirror_cubic", FactoredInvariant.parse("q/(1-1/q)"), None, vars, Trunc.at(3))
    assert e.value.code == "NOT_EXPANDABLE"


@pytest.mark.parametrize("name", sorted(relations.BUILTIN))
def test_builtin_relations(name):
    rep = relations.verify(relations.BUILTIN[name](), order=4)
    assert rep["factored"] and rep["series"], rep


def test_wrong_relation_is_caught_with_residual():
    rel = relations.example1()
    rel.lhs[0] = FactoredInvariant.parse("q1/(x0*(1-y)^2*(1-q0/y)^3)")
    rep = relations.verify(rel)
    assert not rep["verdict"] and not rep["factored"] and not rep["series"]
    assert rep["residual"] == "(1 - y)^-1"


@pytest.mark.parametrize("name", sorted(toric.BUILTIN_DATASETS))
@pytest.mark.parametrize("d12", [False, True])
def test_toric_relations_builtin(name, d12):
    for rel in relations.toric_relations(toric.builtin(name), d12_family=d12):
        rep = relations.verify(rel)
        assert rep["verdict"], rep


def test_series_confirm_detects_constant_change():
    a = FactoredInvariant.parse("q1/(1-y)")
    b = FactoredInvariant.parse("2*q1/(1-y)")
    assert not series_confirm([a], [b])
