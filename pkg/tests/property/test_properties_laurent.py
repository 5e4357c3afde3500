"""Property-based tests for z-Laurent arithmetic and truncated series."""

from fractions import Fraction

from hypothesis import given, settings, strategies as st

from src.coh_ring import CohClass, ring_projective
from src.laurent import ZLaurent, zl_invert_unit, zl_mul
from src.multiseries import MultiSeries, Truncation, series_exp, series_mul

P2 = ring_projective(2)
P1 = ring_projective(1)

rational_strategy = st.fractions(min_value=-4, max_value=4, max_denominator=3)
nonzero_strategy = rational_strategy.filter(lambda x: x != 0)


def _nilpotent(h, h2):
    return CohClass(P2, [Fraction(0), h, h2])


# Feature: quasimap-mirror-engine, Property 5: Exact Laurent inverse
# For any c*z^d plus a nilpotent class at an exponent e <= d, the inverse
# SHALL be a finite Laurent polynomial whose product with the input is 1.
@settings(max_examples=80)
@given(
    c=nonzero_strategy,
    d=st.integers(min_value=-3, max_value=3),
    gap=st.integers(min_value=0, max_value=3),
    h=rational_strategy,
    h2=rational_strategy,
)
def test_inverse_is_exact(c, d, gap, h, h2):
    """Property 5: Units with nilpotent corrections invert exactly."""
    value = ZLaurent.z_power(P2, d, c) + ZLaurent.monomial(_nilpotent(h, h2), d - gap)
    inverse = zl_invert_unit(value)
    assert zl_mul(value, inverse) == ZLaurent.one(P2)
    assert inverse.max_exponent() == -d


# Feature: quasimap-mirror-engine, Property 6: Laurent product laws
# For any three Laurent polynomials the product SHALL be commutative and
# associative, and z-shifts SHALL commute with multiplication.
@settings(max_examples=60)
@given(
    data=st.lists(
        st.dictionaries(
            st.integers(min_value=-3, max_value=2),
            st.tuples(rational_strategy, rational_strategy, rational_strategy),
            max_size=3,
        ),
        min_size=3,
        max_size=3,
    ),
    k=st.integers(min_value=-2, max_value=2),
)
def test_product_laws(data, k):
    """Property 6: Laurent multiplication is commutative and associative."""
    a, b, c = (ZLaurent(P2, {e: CohClass(P2, list(v)) for e, v in terms.items()}) for terms in data)
    assert zl_mul(a, b) == zl_mul(b, a)
    assert zl_mul(zl_mul(a, b), c) == zl_mul(a, zl_mul(b, c))
    assert zl_mul(a.shift(k), b) == zl_mul(a, b).shift(k)


# Indices of a two-variable series over P1 with no constant term
_INDICES = [((0,), (1, 0)), ((0,), (0, 1)), ((1,), (0, 0)), ((1,), (1, 0)), ((0,), (1, 1))]


@st.composite
def exponent_series(draw):
    chosen = draw(st.lists(st.sampled_from(_INDICES), min_size=1, max_size=3, unique=True))
    terms = {}
    for index in chosen:
        coeffs = [draw(rational_strategy), draw(rational_strategy)]
        exponent = draw(st.integers(min_value=-2, max_value=1))
        terms[index] = ZLaurent.monomial(CohClass(P1, coeffs), exponent)
    return MultiSeries(P1, (1,), (0, 1), Truncation(1, 3), terms)


# Feature: quasimap-mirror-engine, Property 7: Truncated exponential law
# For any two series without constant term, exp(a + b) SHALL equal
# exp(a) * exp(b) within the truncation window, and exp(a) * exp(-a) = 1.
@settings(max_examples=30, deadline=None)
@given(a=exponent_series(), b=exponent_series())
def test_exponential_law(a, b):
    """Property 7: The truncated exponential turns sums into products."""
    assert series_exp(a + b).equals(series_mul(series_exp(a), series_exp(b)))
    assert series_mul(series_exp(a), series_exp(-a)).equals(a.one())
