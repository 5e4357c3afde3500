"""Unit tests for small and big I-functions."""

from dataclasses import replace
from fractions import Fraction

import pytest

from src.errors import InvalidArgumentError, NoDivisorLiftError
from src.ifunction import (
    DivisorOperator,
    big_I,
    big_I_operator,
    derivative_family,
    divisor_identity_rhs,
    shift_class,
    small_I,
    small_I_term,
    twist_factor,
)
from src.laurent import ZLaurent, zl_mul
from src.models import ConstructionPath, SeriesKind
from src.target import hirzebruch_target, product_target, projective_target


@pytest.fixture(scope="module")
def p1():
    return projective_target(1)


@pytest.fixture(scope="module")
def p2():
    return projective_target(2)


@pytest.fixture(scope="module")
def quintic():
    return projective_target(4, twist=[5])


@pytest.fixture(scope="module")
def f1():
    return hirzebruch_target(1)


@pytest.fixture(scope="module")
def f2():
    return hirzebruch_target(2)


class TestSmallTerms:

    def test_p1_degree_one(self, p1):
        ring = p1.ring
        expected = ZLaurent(ring, {-2: ring.unit(), -3: ring.basis_class(1) * -2})
        assert small_I_term(p1, (1,)) == expected

    def test_p2_degree_one(self, p2):
        ring = p2.ring
        expected = ZLaurent(
            ring, {-3: ring.unit(), -4: ring.basis_class(1) * -3, -5: ring.basis_class(2) * 6}
        )
        assert small_I_term(p2, (1,)) == expected

    def test_degree_zero(self, p2):
        assert small_I_term(p2, (0,)) == ZLaurent.one(p2.ring)

    def test_window(self, p2):
        assert small_I_term(p2, (1,), low=-4).exponents() == [-4, -3]

    def test_not_effective(self, p2):
        with pytest.raises(InvalidArgumentError):
            small_I_term(p2, (-1,))

    def test_wrong_rank(self, p2):
        with pytest.raises(InvalidArgumentError):
            small_I_term(p2, (1, 0))


class TestTwist:

    def test_quintic_degree_one(self, quintic):
        ring = quintic.ring
        H = ring.basis_class(1)
        factor = twist_factor(quintic, (1,))
        assert factor.max_exponent() == 5
        assert factor.coeff(5) == H * 600
        assert factor.coeff(4) == ring.basis_class(2) * 6850

    def test_degree_zero_is_euler_class(self, quintic):
        assert twist_factor(quintic, (0,)) == ZLaurent.monomial(quintic.euler_class())
        assert twist_factor(quintic, (0,), include_euler=False) == ZLaurent.one(quintic.ring)

    def test_untwisted(self, p2):
        assert twist_factor(p2, (3,)) == ZLaurent.one(p2.ring)

    def test_hyperplane_coefficient(self, quintic):
        H = quintic.ring.basis_class(1)
        value = zl_mul(small_I_term(quintic, (1,)), twist_factor(quintic, (1,)))
        assert value.coeff(0) == H * 600

    def test_ambient_coefficients(self, quintic):
        ring = quintic.ring
        ambient = zl_mul(small_I_term(quintic, (1,)), twist_factor(quintic, (1,), include_euler=False))
        assert ambient.coeff(0) == ring.unit() * 120
        assert ambient.coeff(-1) == ring.basis_class(1) * 770
        assert ambient.coeff(-2) == ring.basis_class(2) * 575


class TestShiftClass:

    def test_square_of_hyperplane(self, p2):
        ring = p2.ring
        for d in range(4):
            expected = ZLaurent(
                ring, {0: ring.basis_class(2), 1: ring.basis_class(1) * (2 * d), 2: ring.scalar(d * d)}
            )
            assert shift_class(p2, "H**2", (d,)) == expected

    def test_linear(self, p2):
        H = p2.ring.basis_class(1)
        assert shift_class(p2, "H", (1,)) == ZLaurent.linear(H, 1)

    def test_missing_lift(self, p2):
        with pytest.raises(NoDivisorLiftError):
            shift_class(p2, None, (1,))
        with pytest.raises(NoDivisorLiftError):
            DivisorOperator(p2, None)

    def test_foreign_symbol(self, p2):
        with pytest.raises(NoDivisorLiftError):
            shift_class(p2, "K", (1,))


class TestSmallI:

    def test_terms_match_small_terms(self, p2):
        ifun = small_I(p2, 2)
        assert ifun.kind is SeriesKind.SMALL
        assert ifun.series.variables == ()
        for d in range(3):
            assert ifun.series.coefficient((d,), ()) == small_I_term(p2, (d,))

    def test_euler_factor_flag(self, quintic):
        assert small_I(quintic, 1).includes_euler_factor
        ambient = small_I(quintic, 1, include_euler=False)
        assert not ambient.includes_euler_factor
        assert ambient.series.coefficient((1,), ()).coeff(0) == quintic.ring.unit() * 120


class TestBigI:

    def test_first_order_in_insertions(self, p2):
        ring = p2.ring
        series = big_I(p2, 0, 1).series
        assert series.variables == (0, 1, 2)
        assert series.coefficient((0,), (0, 0, 0)) == ZLaurent.one(ring)
        for i, m in enumerate([(1, 0, 0), (0, 1, 0), (0, 0, 1)]):
            assert series.coefficient((0,), m) == ZLaurent.monomial(ring.basis_class(i), -1)
        assert len(series.terms) == 4

    def test_shift_rule_matches_operator_form(self, p1):
        shift = big_I(p1, 2, 2)
        operator = big_I_operator(p1, 2, 2)
        assert shift.construction_path is ConstructionPath.SHIFT_RULE
        assert operator.construction_path is ConstructionPath.OPERATOR_FORM
        assert shift.series.equals(operator.series)

    def test_shift_rule_matches_operator_form_on_slice(self, p2):
        assert big_I(p2, 2, 2, insertions=(2,)).series.equals(
            big_I_operator(p2, 2, 2, insertions=(2,)).series
        )

    def test_hyperplane_direction_by_hand(self, p1):
        ring = p1.ring
        series = big_I(p1, 1, 1, insertions=(1,)).series
        expected = ZLaurent(ring, {-2: ring.unit(), -3: ring.basis_class(1) * -1})
        assert series.coefficient((1,), (1,)) == expected

    def test_divisor_identity(self, p2):
        lhs = big_I(p2, 3, 3, insertions=(1,)).series
        assert lhs.equals(divisor_identity_rhs(p2, 3, 3, 1))

    def test_divisor_identity_needs_generator(self, p2):
        with pytest.raises(InvalidArgumentError):
            divisor_identity_rhs(p2, 1, 1, 2)

    def test_repeated_slice_index(self, p2):
        with pytest.raises(InvalidArgumentError):
            big_I(p2, 1, 1, insertions=(1, 1))

    def test_empty_slice_is_small(self, p2):
        ifun = big_I(p2, 2, 0, insertions=())
        assert ifun.kind is SeriesKind.SMALL
        assert ifun.series.equals(small_I(p2, 2).series)


class TestDerivativeFamily:

    def test_leading_terms_are_basis_classes(self, p2):
        family = derivative_family(p2, 1, 1, (1,))
        assert len(family) == 3
        for i, member in enumerate(family):
            assert member.coefficient((0,), (0,)) == ZLaurent.monomial(p2.ring.basis_class(i))

    def test_unit_direction_is_the_function(self, p2):
        family = derivative_family(p2, 2, 1, (1,))
        assert family[0].equals(big_I(p2, 2, 1, insertions=(1,)).series)

    def test_quintic_ambient_scalar(self, quintic):
        family = derivative_family(quintic, 1, 0, ())
        assert family[0].coefficient((1,), ()).coeff(0) == quintic.ring.unit() * Fraction(120)


class TestNegativePairings:
    """F_a has a coordinate of weight (-a, 1), so I_(1,0) picks up a polynomial numerator."""

    def test_f1_exceptional_curve(self, f1):
        ring = f1.ring
        f, h, pt = (ring.basis_class(ring.index_of(lab)) for lab in ("f", "h", "pt"))
        expected = ZLaurent(ring, {-2: h - f, -3: pt * -2})
        assert small_I_term(f1, (1, 0)) == expected

    def test_f2_exceptional_curve_has_a_z_inverse_term(self, f2):
        ring = f2.ring
        f, h = (ring.basis_class(ring.index_of(lab)) for lab in ("f", "h"))
        assert small_I_term(f2, (1, 0)) == ZLaurent.monomial(f * 2 - h, -1)

    def test_fibre_class(self, f2):
        ring = f2.ring
        f, h = (ring.basis_class(ring.index_of(lab)) for lab in ("f", "h"))
        # 1/((h+z)(h-2f+z)); the z^-4 term cancels since h(h-2f) = 0
        assert small_I_term(f2, (0, 1)) == ZLaurent(ring, {-2: ring.unit(), -3: f * 2 - h * 2})

    def test_shift_rule_matches_operator_form(self, f2):
        assert big_I(f2, 2, 1).series.equals(big_I_operator(f2, 2, 1).series)

    def test_dual_cone_is_the_quadrant(self, f2):
        assert f2.chamber.full_dimensional
        assert sorted(f2.chamber.chamber_rays) == [(0, 1), (1, 0)]
        with pytest.raises(InvalidArgumentError):
            small_I_term(f2, (-1, 2))


class TestLiftCharacters:

    def test_lower_dimensional_chamber_refuses_other_characters(self):
        target = product_target(projective_target(1), projective_target(1, label="G"))
        narrowed = replace(target, chamber=replace(target.chamber, chamber_dimension=1))
        assert not narrowed.chamber.full_dimensional
        with pytest.raises(NoDivisorLiftError):
            shift_class(narrowed, "H", (1, 0))
        with pytest.raises(NoDivisorLiftError):
            big_I(narrowed, 1, 1)
        assert shift_class(narrowed, "1", (1, 0)) == ZLaurent.one(target.ring)

    def test_characters_along_theta_are_allowed(self, p2):
        narrowed = replace(p2, chamber=replace(p2.chamber, chamber_dimension=0))
        assert not narrowed.chamber.full_dimensional
        H = p2.ring.basis_class(1)
        assert shift_class(narrowed, "H", (2,)) == ZLaurent.linear(H, 2)
