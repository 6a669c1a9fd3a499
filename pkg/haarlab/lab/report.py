from __future__ import annotations

import csv
import hashlib
import io
import os
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

from haarlab.utils.common_utils import dumps_json, mkdir, write_json

try:
    import wandb
except ImportError:
    wandb = None

if TYPE_CHECKING:
    from haarlab import OutputFormat


@dataclass
class ExperimentReport:
    """Rows, summary and acceptance checks of one experiment run.

    provenance hashes the experiment name and parameters (seed included), so
    two runs with the same configuration carry the same hash.
    """

    name: str
    params: dict[str, Any]
    rows: list[dict[str, Any]] = field(default_factory=list)
    summary: dict[str, Any] = field(default_factory=dict)
    checks: dict[str, bool] = field(default_factory=dict)
    operations: list[str] = field(default_factory=list)

    @property
    def provenance(self) -> str:
        """sha256 of the canonical JSON of (name, params)."""
        payload = dumps_json({"name": self.name, "params": self.params})
        return hashlib.sha256(payload.encode()).hexdigest()

    @property
    def passed(self) -> bool:
        """Whether every acceptance check holds."""
        return all(self.checks.values())

    def check(self, key: str, condition: bool) -> bool:  # noqa: FBT001
        """Record an acceptance check."""
        self.checks[key] = bool(condition)
        return self.checks[key]

    def to_dict(self) -> dict[str, Any]:
        """The report as a JSON-ready dict."""
        return {
            "name": self.name,
            "params": self.params,
            "rows": self.rows,
            "summary": self.summary,
            "checks": self.checks,
            "passed": self.passed,
            "operations": self.operations,
            "provenance": self.provenance,
        }

    def to_csv(self) -> str:
        """The rows as CSV with a header row. Columns are the union of row keys."""
        columns: list[str] = []
        for row in self.rows:
            columns.extend(key for key in row if key not in columns)
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        for row in self.rows:
            writer.writerow({key: _csv_value(row.get(key)) for key in columns})
        return buffer.getvalue()

    def to_json(self) -> str:
        """The report as a JSON string."""
        return dumps_json(self.to_dict())


def _csv_value(value: Any) -> Any:
    if isinstance(value, float):
        return repr(value)
    return "" if value is None else value


def write_report(
    report: ExperimentReport, fmt: OutputFormat = "json", path: str | None = None
) -> str:
    """Serialize a report, and write it to path if given.

    Raises:
        ValueError: for an unknown format
    """
    if path is not None and (folder := os.path.dirname(path)):
        mkdir(folder)
    if fmt == "json":
        text = report.to_json()
        if path is not None:
            write_json(report.to_dict(), path)
        return text
    if fmt == "csv":
        text = report.to_csv()
        if path is not None:
            with open(path, mode="w") as file:
                file.write(text)
        return text
    raise ValueError(f"unknown output format {fmt=}, expected csv or json")


def log_to_wandb(report: ExperimentReport, wandb_path: str | None) -> None:
    """Send the rows and summary of a report to Weights and Biases.

    Args:
        report (ExperimentReport): the finished report
        wandb_path (str | None): "project/run_name", or None to skip logging

    Raises:
        ImportError: If wandb_path is specified but wandb is not installed
        ValueError: If wandb_path is not of the form 'project/run_name'
    """
    if not wandb_path:
        return
    if wandb_path.count("/") != 1:
        raise ValueError(
            f"{wandb_path=} should be in the format 'project/run_name' "
            "(no extra slashes)"
        )
    if wandb is None:
        raise ImportError(
            "Weights and Biases not installed. pip install wandb to use wandb logging."
        )
    project, run_name = wandb_path.split("/")
    wandb.init(project=project, name=run_name, config=report.params)
    for row in report.rows:
        numeric = {k: v for k, v in row.items() if isinstance(v, (int, float))}
        wandb.log(numeric)
    wandb.summary.update(report.summary | {"passed": report.passed})
    wandb.finish()
