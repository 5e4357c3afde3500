"""Unit tests for GIT target validation, effective classes and target loading."""

import json
from fractions import Fraction
from pathlib import Path

import pytest

from src.errors import (
    ConditionStarViolatedError,
    ConfigurationError,
    InvalidArgumentError,
    NonConvexTwistError,
    TargetValidationError,
)
from src.models import GitPresentation, beta_deg
from src.target import (
    ChamberValidator,
    TargetLoader,
    convexity_check,
    effective_monoid,
    ensure_convex,
    hirzebruch_target,
    product_target,
    projective_target,
    validate,
)

SAMPLES = Path(__file__).resolve().parents[2] / "samples"


def _load_document(name):
    with open(SAMPLES / name, "r") as f:
        return json.load(f)


class TestChamberValidator:

    def test_projective_plane(self):
        report = validate(GitPresentation(charges=((1,), (1,), (1,)), theta=(1,)))
        assert report.is_valid
        assert report.anticones == [(0,), (1,), (2,)]
        assert report.dual_generators == [(Fraction(1),)]
        assert report.chamber_rays == [(1,)]
        assert report.full_dimensional

    def test_negative_theta_is_empty(self):
        report = validate(GitPresentation(charges=((1,), (1,), (1,)), theta=(-1,)))
        assert not report.is_valid
        assert report.error_kind == "empty-quotient"

    def test_weighted_projective_plane(self):
        report = validate(GitPresentation(charges=((1,), (1,), (2,)), theta=(1,)))
        assert not report.is_valid
        assert report.error_kind == "condition-star-violated"
        assert report.offending_subset == (2,)

    def test_theta_on_a_wall(self):
        charges = ((1, 0), (1, 0), (0, 1), (0, 1))
        report = validate(GitPresentation(charges=charges, theta=(1, 0)))
        assert report.error_kind == "condition-star-violated"

    def test_rank_deficient_charges(self):
        report = validate(GitPresentation(charges=((1, 1), (1, 1)), theta=(1, 1)))
        assert report.error_kind == "target-invalid"

    def test_zero_theta(self):
        report = validate(GitPresentation(charges=((1,), (1,)), theta=(0,)))
        assert report.error_kind == "target-invalid"

    def test_ensure_valid_raises_matching_error(self):
        validator = ChamberValidator()
        report = validator.validate(GitPresentation(charges=((1,), (1,), (2,)), theta=(1,)))
        with pytest.raises(ConditionStarViolatedError):
            validator.ensure_valid(report)

    def test_product_chamber(self):
        target = product_target(projective_target(1), projective_target(1, label="G"))
        assert target.chamber.chamber_dimension == 2
        assert sorted(target.chamber.dual_generators) == [(0, 1), (1, 0)]


class TestEffectiveMonoid:

    def test_projective_plane(self):
        assert effective_monoid(projective_target(2), 3) == [(0,), (1,), (2,), (3,)]

    def test_product_ordering(self):
        target = product_target(projective_target(1), projective_target(1, label="G"))
        assert effective_monoid(target, 2) == [(0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0)]

    def test_zero_bound(self):
        assert effective_monoid(projective_target(2), 0) == [(0,)]

    def test_negative_bound(self):
        with pytest.raises(InvalidArgumentError):
            effective_monoid(projective_target(2), -1)

    def test_beta_deg(self):
        assert beta_deg((1, 2), (1, 1)) == 3

    def test_dual_cone_is_built_once_per_report(self):
        target = projective_target(2)
        cone = target.chamber.dual_cone
        assert target.chamber.dual_cone is cone
        assert cone.contains((3,))
        assert not cone.contains((-1,))
        assert projective_target(2).chamber.dual_cone is not cone


class TestConvexity:

    def test_quintic_is_convex(self):
        report = convexity_check(projective_target(4, twist=[5]), 2)
        assert report.is_valid
        assert report.classes_checked == 3

    def test_untwisted_passes(self):
        assert convexity_check(projective_target(2), 3).is_valid

    def test_negative_summand(self):
        document = _load_document("p1xp1.json")
        document["twist"] = [[1, -1]]
        target = TargetLoader().from_document(document, SAMPLES)
        report = convexity_check(target, 1)
        assert not report.is_valid
        assert report.violations == [((0, 1), 0)]
        with pytest.raises(NonConvexTwistError):
            ensure_convex(target, 1)


class TestTargets:

    def test_quintic_data(self):
        quintic = projective_target(4, twist=[5])
        H = quintic.ring.basis_class(1)
        assert quintic.name == "P4[5]"
        assert quintic.euler_class() == H * 5
        assert quintic.c1_pairing((1,)) == 0
        assert quintic.virtual_dimension((1,), 0) == 1

    def test_plane_virtual_dimension(self):
        assert projective_target(2).virtual_dimension((1,), 1) == 4

    def test_spec_hash_tracks_twist(self):
        assert projective_target(4).spec_hash() != projective_target(4, twist=[5]).spec_hash()
        assert projective_target(2).spec_hash() == projective_target(2).spec_hash()

    def test_hirzebruch_surface(self):
        target = hirzebruch_target(2)
        assert target.chamber.anticones == [(0, 2), (0, 3), (1, 2), (1, 3)]
        assert effective_monoid(target, 1) == [(0, 0), (0, 1), (1, 0)]
        # the (-2)-curve has c1 = 0
        assert target.c1_pairing((1, 0)) == 0
        assert target.virtual_dimension((0, 1), 0) == 2

    def test_hirzebruch_index_must_be_nonnegative(self):
        with pytest.raises(InvalidArgumentError):
            hirzebruch_target(-1)


class TestTargetLoader:

    def test_load_sample(self):
        target = TargetLoader().load(SAMPLES / "p1xp1.json")
        assert target.name == "P1xP1"
        assert target.ring.rank == 4
        assert target.generators["H1"] == (Fraction(1), Fraction(0))

    def test_load_quintic(self):
        target = TargetLoader().load(SAMPLES / "p4_quintic.json")
        assert target.is_twisted
        assert target.twist.weights == ((5,),)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError):
            TargetLoader().load(tmp_path / "absent.json")

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(TargetValidationError):
            TargetLoader().load(path)

    def test_missing_presentation_field(self):
        with pytest.raises(TargetValidationError):
            TargetLoader().from_document({"theta": [1], "ring": {"projective": 1}}, SAMPLES)

    def test_condition_star_failure_on_load(self):
        with pytest.raises(ConditionStarViolatedError):
            TargetLoader().load(SAMPLES / "p112.json")

    def test_inconsistent_divisor_classes(self):
        document = _load_document("p2.json")
        document["divisor_classes"] = ["H", "H", "2*H"]
        with pytest.raises(TargetValidationError):
            TargetLoader().from_document(document, SAMPLES)

    def test_wrong_insertion_lift(self):
        document = _load_document("p2.json")
        document["insertion_lifts"] = ["1", "H", "H"]
        with pytest.raises(TargetValidationError):
            TargetLoader().from_document(document, SAMPLES)

    def test_ring_file_reference(self, tmp_path):
        ring_path = tmp_path / "p1.ring.json"
        ring_path.write_text(json.dumps(projective_target(1).ring.to_table_document()))
        document = {"charges": [[1], [1]], "theta": [1], "ring": {"file": "p1.ring.json"}}
        target = TargetLoader().from_document(document, tmp_path)
        assert target.ring.labels == ("1", "H")

    def test_missing_ring_file(self, tmp_path):
        document = {"charges": [[1], [1]], "theta": [1], "ring": {"file": "absent.json"}}
        with pytest.raises(ConfigurationError):
            TargetLoader().from_document(document, tmp_path)
