"""Experiment orchestration: configs, the cross-validated runner, reports and charts."""

from .chart import render_bar_chart
from .config import ExperimentConfig, NetworkTemplate, load_experiment_config
from .experiment import ClassifierType, ExperimentReport, ReportRow, classifier_types, run_experiment
from .report import read_report, write_report_csv, write_report_json

__all__ = [
    "ClassifierType", "ExperimentConfig", "ExperimentReport", "NetworkTemplate", "ReportRow",
    "classifier_types", "load_experiment_config", "read_report", "render_bar_chart",
    "run_experiment", "write_report_csv", "write_report_json",
]
