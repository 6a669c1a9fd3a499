from __future__ import annotations

import json
from fractions import Fraction
from typing import TYPE_CHECKING
from unittest.mock import patch

import pytest

from haarlab.lab.report import ExperimentReport, log_to_wandb, write_report
from haarlab.utils.common_utils import read_json

if TYPE_CHECKING:
    from pathlib import Path


@pytest.fixture
def report() -> ExperimentReport:
    report = ExperimentReport("demo", {"seed": 0, "depth": 4})
    report.rows = [{"j": 8, "ratio": 0.5}, {"j": 16, "ratio": 0.25, "note": "tail"}]
    report.summary = {"slope": -1.0, "mass": Fraction(1, 3)}
    report.check("slope", True)
    return report


@pytest.fixture
def mock_wandb():
    with patch("haarlab.lab.report.wandb") as mock:
        yield mock


def test_provenance_and_checks(report: ExperimentReport) -> None:
    same = ExperimentReport("demo", {"depth": 4, "seed": 0})
    assert report.provenance == same.provenance
    other = ExperimentReport("demo", {"depth": 4, "seed": 1})
    assert report.provenance != other.provenance
    assert report.passed
    assert not report.check("extra", False)
    assert not report.passed


def test_to_json(report: ExperimentReport) -> None:
    data = json.loads(report.to_json())
    assert data["name"] == "demo"
    assert data["summary"]["mass"] == "1/3"
    assert data["passed"] is True
    assert data["provenance"] == report.provenance


def test_to_csv(report: ExperimentReport) -> None:
    lines = report.to_csv().splitlines()
    assert lines == ["j,ratio,note", "8,0.5,", "16,0.25,tail"]


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_write_report(tmp_path: Path, report: ExperimentReport, fmt: str) -> None:
    path = str(tmp_path / "nested" / f"report.{fmt}")
    text = write_report(report, fmt, path)
    with open(path) as file:
        written = file.read()
    if fmt == "csv":
        assert written == text
    else:
        assert read_json(path)["rows"] == report.rows
    with pytest.raises(ValueError, match="unknown output format"):
        write_report(report, "yaml")


def test_log_to_wandb(report: ExperimentReport, mock_wandb) -> None:
    log_to_wandb(report, "haarlab/demo-run")
    mock_wandb.init.assert_called_once_with(
        project="haarlab", name="demo-run", config=report.params
    )
    assert mock_wandb.log.call_count == 2
    mock_wandb.log.assert_any_call({"j": 16, "ratio": 0.25})
    mock_wandb.finish.assert_called_once()

    log_to_wandb(report, None)
    assert mock_wandb.init.call_count == 1


def test_log_to_wandb_errors(
    report: ExperimentReport, monkeypatch: pytest.MonkeyPatch
) -> None:
    with pytest.raises(ValueError, match="project/run_name"):
        log_to_wandb(report, "org/project/run")
    err_msg = "Weights and Biases not installed"
    monkeypatch.setattr("haarlab.lab.report.wandb", None)
    with pytest.raises(ImportError, match=err_msg):
        log_to_wandb(report, "haarlab/demo-run")
