import random
from fractions import Fraction
from math import factorial

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lgglue import toric
from lgglue.errors import LgError


def harmonic(n):
    return sum(Fraction(1, k) for k in range(1, n + 1))


def test_quintic_periods_closed_form():
    d = toric.builtin("quintic_step1")
    s = toric.period_X(d, 5)
    assert [s.coeff((k,)) for k in range(6)] == [factorial(5 * k) // factorial(k) ** 5 for k in range(6)]


def test_quintic_I_function_first_derivative():
    # d/dp of prod (5p+j) / prod (p+j)^5 at p = 0, degree 1
    body = toric.I_function("X", toric.builtin("quintic_step1"), 2).body
    assert body.component(("p1",)).coeff((1,)) == 120 * (5 * harmonic(5) - 5 * harmonic(1))


@pytest.mark.parametrize("name", sorted(toric.BUILTIN_DATASETS))
@pytest.mark.parametrize("strip", [False, True])
def test_period_X_two_routes_builtin(name, strip):
    d = toric.builtin(name)
    assert toric.period_X(d, 4, strip_rho_factor=strip) == toric.period_X_via_residue(d, 4, strip_rho_factor=strip)


@settings(max_examples=60)
@given(st.integers(0, 10 ** 6), st.booleans())
def test_period_X_two_routes_random(seed, strip):
    d = toric.random_data(random.Random(seed))
    assert toric.period_X(d, 3, strip_rho_factor=strip) == toric.period_X_via_residue(d, 3, strip_rho_factor=strip)


@given(st.integers(0, 10 ** 6))
def test_random_data_is_valid_and_round_trips(seed):
    d = toric.random_data(random.Random(seed))
    assert d.r <= 2 and d.m <= 6 and d.s <= 1
    assert toric.ToricCIData.from_json(d.to_json()) == d


def test_invalid_data_rejected():
    with pytest.raises(LgError) as e:
        toric.ToricCIData(1, [[1, 1]], [[1], [0]], [[1], [1]])
    assert e.value.code == "INVALID_DATA"
    with pytest.raises(LgError) as e:
        toric.ToricCIData.from_json({"r": 1})
    assert e.value.code == "CONFIG_PARSE"


def test_unknown_builtin():
    with pytest.raises(LgError) as e:
        toric.builtin("nope")
    assert e.value.code == "UNKNOWN_SUITE"


def test_root_stack_without_divisors_is_the_I_function():
    d = toric.builtin("quintic_step1")
    a, b = toric.root_stack_I0(d, [], 3), toric.I_function("X", d, 3).body
    assert {k: v.items() for k, v in a.components().items()} == {k: v.items() for k, v in b.components().items()}


def test_root_stack_contact_variables():
    d = toric.builtin("quintic_step1")
    r = toric.root_stack_I0(d, [[1]], 2)
    assert r.vars.names == ("q1", "x1_1", "x1_2")
    assert r.component(()).coeff((0, 0, 0)) == 1
    assert r.component(()).coeff((1, 1, 0)) == 120


def test_root_stack_tracks_z():
    d = toric.builtin("quintic_step1")
    r = toric.root_stack_I0(d, [[1]], 2, track_z=True)
    assert "z" in r.vars.names


def test_root_stack_rejects_negative_divisor():
    with pytest.raises(LgError) as e:
        toric.root_stack_I0(toric.builtin("quintic_step1"), [[-1]], 2)
    assert e.value.code == "INVALID_DATA"


def test_correction_period_of_quartic_split():
    d = toric.builtin("example2_quartic")
    s = toric.period_D0(d, 5)
    assert [s.coeff((k,)) for k in range(6)] == [factorial(3 * k) // factorial(k) ** 3 for k in range(6)]
