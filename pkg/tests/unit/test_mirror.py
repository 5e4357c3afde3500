"""Unit tests for Birkhoff factorization, Novikov changes and invariant extraction."""

from fractions import Fraction

import pytest

from src.errors import (
    InsufficientTruncationError,
    InvalidArgumentError,
    NotInvertibleError,
    SaturatedTruncationError,
)
from src.ifunction import big_I, small_I
from src.mirror import (
    birkhoff,
    change_novikov,
    check_birkhoff_contract,
    extract_invariant,
    invert_mirror,
    p2_counts,
    query_invariant,
    quintic_one_point,
    to_flat_coordinates,
)
from src.models import InvariantQuery
from src.multiseries import Truncation
from src.target import hirzebruch_target, product_target, projective_target


@pytest.fixture(scope="module")
def p2():
    return projective_target(2)


@pytest.fixture(scope="module")
def quintic():
    return projective_target(4, twist=[5])


@pytest.fixture(scope="module")
def p2_point_slice(p2):
    """Flat J of P2 in the point-class direction, through degree 1."""
    return to_flat_coordinates(birkhoff(big_I(p2, 1, 2, insertions=(2,))))


class TestInvertMirror:

    def test_identity(self):
        assert invert_mirror([0], 3) == [0, 1, 0, 0]

    def test_exponential_change(self):
        # Q = q exp(2q)  =>  q = Q - 2Q^2 + 6Q^3 + ...
        assert invert_mirror([0, 2], 3) == [0, 1, -2, 6]

    def test_rational_coefficients(self):
        c = Fraction(1, 3)
        assert invert_mirror([0, c], 3) == [0, 1, -c, Fraction(3, 2) * c * c]

    def test_constant_term_rejected(self):
        with pytest.raises(NotInvertibleError):
            invert_mirror([1], 2)

    def test_negative_order(self):
        with pytest.raises(InvalidArgumentError):
            invert_mirror([0], -1)


class TestChangeNovikov:

    def test_identity_substitution(self, p2):
        series = small_I(p2, 2).series
        assert change_novikov(series, [0, 1]).equals(series)

    def test_rescaling(self, p2):
        series = small_I(p2, 2).series
        changed = change_novikov(series, [0, 2])
        assert changed.coefficient((2,), ()) == series.coefficient((2,), ()).scale(4)

    def test_needs_single_variable(self):
        target = product_target(projective_target(1), projective_target(1, label="G"))
        with pytest.raises(InvalidArgumentError):
            change_novikov(small_I(target, 1).series, [0, 1])


class TestBirkhoff:

    def test_contract_on_plane(self, p2):
        out = birkhoff(big_I(p2, 2, 2))
        assert check_birkhoff_contract(out) == []
        H = p2.ring.basis_class(1)
        assert out.tau.coefficient((0,), (0, 1, 0)).coeff(0) == H

    def test_fano_small_I_equals_J(self, p2):
        ifun = small_I(p2, 3)
        out = birkhoff(ifun)
        assert out.J.equals(ifun.series)
        assert out.tau.is_zero()

    def test_quintic_mirror_map(self, quintic):
        ring = quintic.ring
        out = birkhoff(big_I(quintic, 1, 0, insertions=()))
        assert check_birkhoff_contract(out) == []
        assert out.tau.coefficient((1,), ()).coeff(0) == ring.basis_class(1) * 770
        assert out.ambient_J.coefficient((1,), ()).coeff(-2) == ring.basis_class(2) * 575
        assert out.J.coefficient((1,), ()).coeff(-2) == ring.basis_class(3) * 2875

    def test_factor_log_order(self, p2):
        out = birkhoff(big_I(p2, 1, 1, insertions=(2,)))
        steps = [(step.beta, step.m) for step in out.factor_log]
        assert steps == [((0,), (0,)), ((0,), (1,)), ((1,), (0,)), ((1,), (1,))]

    def test_smaller_window(self, p2):
        full = birkhoff(big_I(p2, 2, 2, insertions=(2,)), window=Truncation(1, 1))
        direct = birkhoff(big_I(p2, 1, 1, insertions=(2,)))
        assert full.J == direct.J
        assert full.tau == direct.tau

    def test_window_larger_than_input(self, p2):
        with pytest.raises(SaturatedTruncationError):
            birkhoff(big_I(p2, 1, 1), window=Truncation(2, 1))


class TestExtraction:

    def test_lines_through_two_points(self, p2, p2_point_slice):
        point = p2.ring.basis_class(2)
        query = InvariantQuery(beta=(1,), insertions=(2,), last_class=point)
        result = query_invariant(p2_point_slice, query)
        assert result.value == 1
        assert result.virtual_dimension == 4
        assert result.warning is None

    def test_dimension_mismatch_vanishes(self, p2, p2_point_slice):
        point = p2.ring.basis_class(2)
        result = query_invariant(p2_point_slice, InvariantQuery(beta=(1,), insertions=(), last_class=point))
        assert result.value == 0
        assert result.warning is not None

    def test_outside_truncation(self, p2, p2_point_slice):
        point = p2.ring.basis_class(2)
        with pytest.raises(InsufficientTruncationError):
            extract_invariant(p2_point_slice, InvariantQuery(beta=(2,), insertions=(2,), last_class=point))

    def test_insertion_outside_slice(self, p2, p2_point_slice):
        point = p2.ring.basis_class(2)
        with pytest.raises(InvalidArgumentError):
            extract_invariant(p2_point_slice, InvariantQuery(beta=(1,), insertions=(1,), last_class=point))

    def test_flattening_is_idempotent(self, p2_point_slice):
        assert to_flat_coordinates(p2_point_slice) is p2_point_slice

    def test_low_degree_counts(self):
        assert p2_counts(2) == [1, 1]

    def test_counts_need_room(self):
        with pytest.raises(InsufficientTruncationError):
            p2_counts(2, D=1)
        with pytest.raises(InsufficientTruncationError):
            p2_counts(2, T=4)

    def test_quintic_degree_one(self):
        assert quintic_one_point(1) == [2875]
        assert quintic_one_point(1, flat=False) == [2875]

    def test_quintic_flat_value_in_degree_two(self):
        assert quintic_one_point(2)[1] == Fraction(4876875, 4)


@pytest.fixture(scope="module")
def f2():
    return hirzebruch_target(2)


@pytest.fixture(scope="module")
def f2_point_slice(f2):
    """F2 in the point direction through degree 3; tau has f and h components."""
    return birkhoff(big_I(f2, 3, 2, insertions=(3,)))


@pytest.fixture(scope="module")
def f2_flat(f2_point_slice):
    return to_flat_coordinates(f2_point_slice)


def _classes(target, *labels):
    ring = target.ring
    return [ring.basis_class(ring.index_of(lab)) for lab in labels]


class TestHirzebruch:

    def test_f1_lines_through_two_points(self):
        f1 = hirzebruch_target(1)
        (pt,) = _classes(f1, "pt")
        flat = to_flat_coordinates(birkhoff(big_I(f1, 2, 1, insertions=(3,))))
        result = query_invariant(flat, InvariantQuery(beta=(1, 1), insertions=(3,), last_class=pt))
        assert result.value == 1
        assert result.virtual_dimension == 4

    def test_f2_mirror_map_in_divisor_directions(self, f2, f2_point_slice):
        f, h = _classes(f2, "f", "h")
        assert check_birkhoff_contract(f2_point_slice) == []
        assert f2_point_slice.tau.coefficient((1, 0), (0,)).coeff(0) == f * 2 - h

    def test_f2_flattening_changes_novikov_variables(self, f2_point_slice, f2_flat):
        assert f2_flat.flat
        assert not f2_flat.J.equals(f2_point_slice.J)
        assert f2_flat.J.coefficient((1, 0), (0,)).coeff(-1).is_zero()

    def test_f2_fibre_through_a_point(self, f2, f2_flat):
        (pt,) = _classes(f2, "pt")
        result = query_invariant(f2_flat, InvariantQuery(beta=(0, 1), insertions=(), last_class=pt))
        assert result.value == 1
        assert result.warning is None

    def test_f2_section_through_a_point(self, f2, f2_flat):
        (pt,) = _classes(f2, "pt")
        assert extract_invariant(f2_flat, InvariantQuery(beta=(1, 1), insertions=(), last_class=pt)) == 1

    def test_f2_through_three_points(self, f2, f2_flat):
        (pt,) = _classes(f2, "pt")
        query = InvariantQuery(beta=(1, 2), insertions=(3, 3), last_class=pt)
        result = query_invariant(f2_flat, query)
        assert result.virtual_dimension == 6
        assert result.value == 1
