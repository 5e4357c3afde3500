"""Unit tests for the terminal renderers."""

from io import StringIO

from rich.console import Console

from src.cli_ui import CLIRenderer, SeriesTableRenderer, format_class
from src.models import ChamberReport, CheckResult, VerificationReport

DOCUMENT = {
    "truncation": {"D": "1", "T": 0},
    "variables": [],
    "saturated": True,
    "terms": {
        "1": {"": {"-4": {"H": "-3"}, "-3": {"1": "1"}}},
        "0": {"": {"0": {"1": "1"}}},
    },
}


def _renderer():
    return CLIRenderer(Console(file=StringIO(), width=120))


def _text(renderer):
    return renderer.console.file.getvalue()


class TestFormatClass:

    def test_signs_and_units(self):
        assert format_class({"1": "2", "H": "-3", "H^2": "1/2"}) == "2 - 3*H + 1/2*H^2"

    def test_unit_coefficients(self):
        assert format_class({"H": "1"}) == "H"
        assert format_class({"H": "-1"}) == "-H"

    def test_zero(self):
        assert format_class({}) == "0"


class TestSeriesTable:

    def test_rows_sorted_by_degree_then_descending_z(self):
        rows = SeriesTableRenderer().rows(DOCUMENT)
        assert rows == [
            ("0", "-", "0", "1"),
            ("1", "-", "-3", "1"),
            ("1", "-", "-4", "-3*H"),
        ]

    def test_caption_marks_saturation(self):
        table = SeriesTableRenderer().build(DOCUMENT, "small I")
        assert "saturated" in table.caption
        assert table.row_count == 3


class TestCLIRenderer:

    def test_chamber_panel(self):
        renderer = _renderer()
        report = ChamberReport(is_valid=True, anticones=[(0,), (1,)], chamber_rays=[(1,)], chamber_dimension=1)
        renderer.show_chamber("P1", report)
        text = _text(renderer)
        assert "Condition star holds" in text
        assert "[[0], [1]]" in text

    def test_failed_chamber_names_columns(self):
        renderer = _renderer()
        report = ChamberReport(
            is_valid=False,
            error_message="index 2",
            error_kind="condition-star-violated",
            offending_subset=(2,),
        )
        renderer.show_chamber("P112", report)
        text = _text(renderer)
        assert "condition-star-violated" in text
        assert "Offending columns: [2]" in text

    def test_failed_verification_lists_checks(self):
        renderer = _renderer()
        report = VerificationReport("p2", [CheckResult("p2.N3", 11, 12, False), CheckResult("p2.N1", 1, 1, True)])
        renderer.show_verification(report)
        text = _text(renderer)
        assert "oracle-mismatch" in text
        assert "Failed checks: p2.N3" in text

    def test_stage_lines(self):
        renderer = _renderer()
        renderer.start_processing("Birkhoff factorization")
        renderer.complete_processing("Birkhoff factorization")
        renderer.start_processing("Loading target")
        renderer.fail_processing("Loading target", "configuration")
        text = _text(renderer)
        assert "✓ Birkhoff factorization (" in text
        assert "✗ Loading target: configuration" in text
