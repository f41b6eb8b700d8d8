"""Hypothesis strategies for small exact series."""
from fractions import Fraction

from hypothesis import strategies as st

from lgglue.series import LAURENT, POWER, Trunc, TruncatedSeries, VarSet

POWER_VARS = VarSet(("q", "t"), (POWER, POWER))
MIXED_VARS = VarSet(("q", "y"), (POWER, LAURENT))

rationals = st.fractions(min_value=-20, max_value=20, max_denominator=12)


def series(vars: VarSet, order: int = 3, window: int = 9, spread: int = 3, max_terms: int = 6):
    """Series whose Laurent exponents stay within ``spread`` so products of three never clip."""
    def exps():
        parts = [st.integers(0, order) if k == POWER else st.integers(-spread, spread) for k in vars.kinds]
        return st.tuples(*parts)

    return st.dictionaries(exps(), rationals, max_size=max_terms).map(
        lambda d: TruncatedSeries(vars, Trunc(order, window), d))


power_series = series(POWER_VARS)
mixed_series = series(MIXED_VARS)
