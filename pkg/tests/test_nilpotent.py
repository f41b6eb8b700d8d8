from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lgglue.errors import LgError
from lgglue.nilpotent import (IFunction, LogPrefactor, NilGenSet, NilNumber, NilpotentElement, nil_invert_unit,
                              nil_mul, nil_residue, rising, substitute_generator)
from lgglue.series import Trunc, TruncatedSeries
from strategies import MIXED_VARS, POWER_VARS, rationals, series

GENS = NilGenSet(("g", "h", "k"))
TRUNC = Trunc(3, 9)
SUBSETS = list(GENS.basis())


def elements(vars=POWER_VARS):
    return st.dictionaries(st.sampled_from(SUBSETS), series(vars), max_size=4).map(
        lambda d: NilpotentElement(GENS, vars, TRUNC, d))


def linear_forms(gens=("h", "k")):
    return st.dictionaries(st.sampled_from(gens), rationals.filter(bool), min_size=1)


ELEM = elements()


def one():
    return NilpotentElement.linear(GENS, POWER_VARS, TRUNC, {}, 1)


@given(ELEM, ELEM, ELEM)
def test_ring_axioms(a, b, c):
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * one() == a


@given(ELEM)
def test_generators_square_to_zero(a):
    g = NilpotentElement.linear(GENS, POWER_VARS, TRUNC, {"g": 1})
    assert (g * g).is_zero()
    assert all("g" not in key for key in nil_mul(nil_mul(a, g), g).components())


@given(ELEM, ELEM, rationals.filter(bool), st.sampled_from(["h", "k"]))
def test_substitution_by_square_zero_element_is_a_homomorphism(a, b, c, target):
    expr = NilpotentElement.linear(GENS, POWER_VARS, TRUNC, {target: c})
    sub = lambda x: substitute_generator(x, "g", expr)
    assert sub(a * b) == sub(a) * sub(b)
    assert sub(a + b) == sub(a) + sub(b)


def test_substitution_by_sum_of_two_generators_is_not_multiplicative():
    expr = NilpotentElement.linear(GENS, POWER_VARS, TRUNC, {"h": 1, "k": 1})
    g = NilpotentElement.linear(GENS, POWER_VARS, TRUNC, {"g": 1})
    lhs = substitute_generator(g * g, "g", expr)
    rhs = substitute_generator(g, "g", expr) * substitute_generator(g, "g", expr)
    assert lhs.is_zero()
    assert rhs.component({"h", "k"}).coeff((0, 0)) == 2


@given(ELEM, rationals.filter(bool))
def test_unit_inverse(a, c):
    # c + (anything with positive degree or a generator) is a unit
    a_pos = NilpotentElement(GENS, POWER_VARS, TRUNC,
                             {k: TruncatedSeries(POWER_VARS, TRUNC, {e: v for e, v in s.items() if k or any(e)})
                              for k, s in a.components().items()})
    u = a_pos + NilpotentElement.linear(GENS, POWER_VARS, TRUNC, {}, c)
    assert nil_mul(u, nil_invert_unit(u)) == one()


def test_non_unit_rejected():
    g = NilpotentElement.linear(GENS, POWER_VARS, TRUNC, {"g": 1})
    with pytest.raises(LgError) as e:
        nil_invert_unit(g)
    assert e.value.code == "NOT_UNIT"


@given(st.dictionaries(st.sampled_from(SUBSETS), rationals, max_size=5), rationals.filter(bool))
def test_nil_number_inverse(d, c):
    n = NilNumber({**d, frozenset(): c})
    assert n * n.inverse() == NilNumber({frozenset(): Fraction(1)})


@given(linear_forms(("g", "h")), st.integers(0, 4), st.integers(0, 4))
def test_rising_splits(form, m, n):
    assert rising(form, 1, m) * rising(form, m + 1, m + n) == rising(form, 1, m + n)


def test_rising_is_pochhammer_at_zero():
    assert rising({"g": 1}, 1, 4).c[frozenset()] == 24
    assert rising({"g": 1}, 1, 4).c[frozenset({"g"})] == 50  # d/dg (g+1)..(g+4) at 0


@given(elements(MIXED_VARS))
def test_residue_commutes_with_components(a):
    r = nil_residue(a, "y")
    for key in SUBSETS:
        assert r.component(key) == TruncatedSeries(r.vars, r.trunc,
                                                   {(e[0],): c for e, c in a.component(key).items() if e[1] == 0})


@given(ELEM)
def test_text_round_trip(a):
    assert NilpotentElement.from_text(a.to_text(), GENS, POWER_VARS, TRUNC) == a


def test_generator_mismatch():
    s = TruncatedSeries.const(POWER_VARS, TRUNC)
    with pytest.raises(LgError) as e:
        NilpotentElement(GENS, POWER_VARS, TRUNC, {frozenset({"z"}): s})
    assert e.value.code == "GEN_MISMATCH"


def test_self_reference_rejected():
    expr = NilpotentElement.linear(GENS, POWER_VARS, TRUNC, {"g": 1})
    with pytest.raises(LgError) as e:
        substitute_generator(expr, "g", expr)
    assert e.value.code == "SELF_REFERENCE"


def test_log_prefactor_addition_and_substitution():
    a = LogPrefactor.of({"q": {"g": 1}})
    b = LogPrefactor.of({"q": {"h": 2}, "y": {"g": -1}})
    s = a + b
    assert s.exponent("q") == {"g": 1, "h": 2}
    assert s.substitute("g", {"h": 1}).exponent("q") == {"h": 3}


def test_ifunction_holds_body_and_prefactor():
    body = NilpotentElement.linear(GENS, POWER_VARS, TRUNC, {}, 1)
    f = IFunction(body, LogPrefactor.of({"q": {"g": 1}}))
    assert f.body == body and f.prefactor.exponent("q") == {"g": 1}
