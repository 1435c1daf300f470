from json import loads

import pytest
from pydantic import ValidationError

from tests.utils import bounded, bounded_by_radius, double, triple, void
from unobs.campaign import Campaign, CheckResult, Report
from unobs.nodes.foreach import Foreach


def test_campaign_run(tmp_path):
    """Test that Campaign.run runs the checks in order and writes report.json."""
    campaign = Campaign.new("testcampaign", parameters={"x": 0.1, "tol": 1.0}).next(double).next(bounded)
    report = campaign.run()

    assert report.passed
    data = loads((tmp_path / ".unobs" / "testcampaign" / "report.json").read_text())
    assert data["campaign"] == "testcampaign"
    assert data["pass"] is True
    assert data["criteria"][0] == {
        "criterion": "bounded",
        "value": 0.2,
        "tolerance": 1.0,
        "pass": True,
        "details": {},
    }


def test_campaign_reports_failures():
    """A failing criterion fails the report and is named."""
    campaign = (
        Campaign.new("failing", parameters={"x": 0.4, "tol": 1.0})
        .next(double)
        .next(triple)
        .next(bounded)
    )
    report = campaign.run(write=False)
    assert not report.passed
    assert report.failed == ["bounded"]


def test_campaign_missing_parameter():
    """Test that Campaign.run fails for missing parameter."""
    campaign = Campaign.new("testcampaign").next(double)
    with pytest.raises(TypeError):
        campaign.run(write=False)


def test_campaign_parameter_override():
    """Parameters given to run replace defaults of the same name only."""
    campaign = Campaign.new("override", parameters={"x": 0.1, "tol": 1.0}).next(bounded)
    report = campaign.run(parameters={"x": 5.0, "ignored": 1}, write=False)
    assert report.results[0].value == 5.0
    assert not report.passed


def test_campaign_with_foreach():
    """Foreach results are collected into the report, one per item."""
    campaign = (
        Campaign.new("loop", parameters={"tol": 1.0})
        .next(void)
        .next(Foreach([0.5, 1.5], item_name="xi").then(bounded_by_radius))
    )
    report = campaign.run(write=False)
    assert [r.criterion for r in report.results] == ["bounded_xi=0.5", "bounded_xi=1.5"]
    assert report.failed == ["bounded_xi=1.5"]


def test_campaign_outdir_parameter(tmp_path):
    """An explicit outdir parameter is used as is."""
    campaign = Campaign.new("outdir", parameters={"outdir": str(tmp_path / "artifacts")})
    campaign.run()
    assert (tmp_path / "artifacts" / "report.json").exists()


def test_campaign_nodes_not_shared():
    """Each campaign keeps its own node list."""
    first = Campaign.new("first").next(void)
    second = Campaign.new("second")
    assert len(first._nodes) == 1
    assert second._nodes == []


@pytest.mark.parametrize("name", ["-bad", "bad name", "a" * 64])
def test_campaign_invalid_name(name):
    """Names follow the DNS-label pattern."""
    with pytest.raises(ValidationError):
        Campaign.new(name)


def test_empty_report_passes():
    """No criteria means nothing failed."""
    report = Report(campaign="empty")
    assert report.passed
    assert report.to_json_dict() == {"campaign": "empty", "pass": True, "criteria": []}


def test_check_result_json_uses_pass_key():
    """The report uses `pass` for the verdict."""
    result = CheckResult(criterion="c", value=None, tolerance=None, passed=False, details={"n": 1})
    assert result.to_json_dict()["pass"] is False
