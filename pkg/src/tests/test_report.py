"""
Tests for check records and report rendering.
"""

import json

from schur_realization.exceptions import NotPSD
from schur_realization.report import FAIL, PASS, Report


def _raises():
    raise NotPSD("negative eigenvalue", residual=0.5)


class TestReport:
    """Tests for Report."""

    def test_status(self):
        """Test that one failure fails the report and skips do not."""
        report = Report("classify")
        report.add("a", True, 1e-14)
        report.skip("b", "not applicable")
        assert report.status == PASS
        assert report.exit_code == 0
        report.add("c", False, 0.1)
        assert report.status == FAIL
        assert report.exit_code == 1

    def test_record_turns_errors_into_failures(self):
        """Test that library errors become failed checks with their residual."""
        report = Report("kernel-check")
        record = report.record("psd", _raises)
        assert record.status == FAIL
        assert record.residual == 0.5
        assert record.details["error"] == "NotPSD"

    def test_record_passes_details(self):
        """Test that a check's details are kept."""
        report = Report("classify")
        record = report.record("x", lambda: (True, None, {"dim": 3}))
        assert record.status == PASS
        assert record.details == {"dim": 3}

    def test_non_finite_residual(self):
        """Test that infinite residuals are stored as None."""
        report = Report("equivalence")
        assert report.add("r", False, float("inf")).residual is None

    def test_json_is_sorted(self):
        """Test that checks and keys are ordered."""
        report = Report("classify", results={"z": 1j})
        report.add("b", True)
        report.add("a", True)
        data = json.loads(report.to_json())
        assert [c["name"] for c in data["checks"]] == ["a", "b"]
        assert data["results"]["z"] == [0.0, 1.0]
        assert list(data) == sorted(data)

    def test_merge(self):
        """Test merging with a prefix."""
        report = Report("example33")
        other = Report("overlap-demo", results={"n": 1})
        other.add("e1", True)
        report.merge(other, "overlap.")
        assert report.get("overlap.e1").status == PASS
        assert report.results == {"overlap.n": 1}

    def test_render_text(self):
        """Test the plain-text summary."""
        report = Report("classify")
        report.add("contractive", True, 2.5e-16, norm=1.0)
        report.skip("unused", "no pair")
        text = report.render_text()
        assert text.startswith("classify: PASS (1 passed, 0 failed, 1 skipped)")
        assert "[PASS] contractive  residual=2.500e-16" in text
        assert "[SKIP] unused" in text
        assert "norm: 1.0" in text
