"""Report serialisation: CSV rows and a JSON document with the summary block."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

from .experiment import ExperimentReport, ReportRow

CSV_COLUMNS = (
    "seed",
    "classifier_type",
    "task_threshold",
    "fold",
    "tnr_at_tpr95",
    "auc",
    "cutoff",
    "n_val_pos",
    "n_val_neg",
)
NA = "NA"


def _num(x: float | None) -> str:
    return NA if x is None else repr(float(x))


def _parse_num(text: str) -> float | None:
    return None if text == NA else float(text)


def report_to_csv(report: ExperimentReport) -> str:
    if not report.rows:
        raise ValueError("report has no rows")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in report.rows:
        w.writerow(
            [
                r.seed,
                r.classifier_type,
                r.task_threshold,
                r.fold_index,
                _num(r.tnr_at_tpr),
                _num(r.auc),
                _num(r.operating_cutoff),
                r.n_val_pos,
                r.n_val_neg,
            ]
        )
    return buf.getvalue()


def write_report_csv(report: ExperimentReport, path) -> None:
    Path(path).write_text(report_to_csv(report), encoding="utf-8")


def read_report_csv(path) -> ExperimentReport:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ValueError(f"{path}: unexpected CSV columns {reader.fieldnames}")
        rows = [
            ReportRow(
                int(d["seed"]),
                d["classifier_type"],
                int(d["task_threshold"]),
                int(d["fold"]),
                _parse_num(d["tnr_at_tpr95"]),
                _parse_num(d["auc"]),
                _parse_num(d["cutoff"]),
                int(d["n_val_pos"]),
                int(d["n_val_neg"]),
            )
            for d in reader
        ]
    order = list(dict.fromkeys(r.classifier_type for r in rows))
    return ExperimentReport(rows, order)


def report_to_dict(report: ExperimentReport) -> dict:
    def clean(x):
        return None if x is None or (isinstance(x, float) and math.isnan(x)) else x

    return {
        "columns": list(CSV_COLUMNS),
        "type_order": list(report.type_order),
        "rows": [
            {
                "seed": r.seed,
                "classifier_type": r.classifier_type,
                "task_threshold": r.task_threshold,
                "fold": r.fold_index,
                "tnr_at_tpr95": clean(r.tnr_at_tpr),
                "auc": clean(r.auc),
                "cutoff": clean(r.operating_cutoff),
                "n_val_pos": r.n_val_pos,
                "n_val_neg": r.n_val_neg,
            }
            for r in report.rows
        ],
        "summary": [
            {"classifier_type": name, "task_threshold": t, "mean_tnr_at_tpr95": v}
            for (name, t), v in report.summary.items()
        ],
        "multitask_to_single_ratio": {str(t): v for t, v in report.multitask_ratios().items()},
    }


def report_from_dict(data: dict) -> ExperimentReport:
    rows = [
        ReportRow(
            d["seed"],
            d["classifier_type"],
            d["task_threshold"],
            d["fold"],
            d["tnr_at_tpr95"],
            d["auc"],
            d["cutoff"],
            d["n_val_pos"],
            d["n_val_neg"],
        )
        for d in data["rows"]
    ]
    summary = {(s["classifier_type"], s["task_threshold"]): s["mean_tnr_at_tpr95"] for s in data.get("summary", [])}
    report = ExperimentReport(rows, list(data.get("type_order", [])))
    if summary and summary != report.summary:
        raise ValueError("summary block does not match the rows")
    return report


def write_report_json(report: ExperimentReport, path) -> None:
    if not report.rows:
        raise ValueError("report has no rows")
    Path(path).write_text(json.dumps(report_to_dict(report), indent=2) + "\n", encoding="utf-8")


def read_report_json(path) -> ExperimentReport:
    return report_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def read_report(path) -> ExperimentReport:
    path = Path(path)
    return read_report_json(path) if path.suffix == ".json" else read_report_csv(path)


def format_summary(report: ExperimentReport) -> str:
    lines = ["mean TNR at TPR>=min_tpr (over folds and seeds)"]
    for (name, t), v in report.summary.items():
        lines.append(f"  {name:<12} task {t}: {v:.4f}")
    for t, ratio in report.multitask_ratios().items():
        lines.append(f"  multi-task / single-task TNR ratio, task {t}: {ratio:.3f}")
    return "\n".join(lines)
