from __future__ import annotations

from haarlab.lab.experiments import (
    resolve_measure,
    run_bad_weight,
    run_complexity_separation,
    run_czd_demo,
    run_sparse_domination,
    run_sparse_failure,
    run_weak_type,
    run_weight_suite,
)
from haarlab.lab.report import ExperimentReport, log_to_wandb, write_report
