"""Result tables, confusion-matrix files and their plain-text renderings."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import FormatError
from .evaluation import EvaluationReport
from .reference import published_result

RESULT_COLUMNS = ["feature", "scheme", "protocol", "accuracy", "tpr", "fpr", "f_measure", "auc", "n_clips", "seed",
                  "published_accuracy", "published_tpr", "published_fpr", "published_f_measure", "published_auc"]
METRIC_COLUMNS = ("tpr", "fpr", "f_measure", "auc")


def result_row(report: EvaluationReport, dataset: str = "") -> dict[str, str]:
    m = report.metrics
    row = {
        "feature": report.feature, "scheme": report.scheme, "protocol": report.protocol,
        "accuracy": f"{100.0 * m.accuracy:.2f}",
        "tpr": f"{m.tpr:.4f}", "fpr": f"{m.fpr:.4f}", "f_measure": f"{m.f_measure:.4f}", "auc": f"{m.auc:.4f}",
        "n_clips": str(report.n_evaluated), "seed": str(report.seed),
    }
    ref = published_result(dataset, report.feature, report.scheme, report.protocol) if dataset else None
    for col in ("accuracy",) + METRIC_COLUMNS:
        row[f"published_{col}"] = "" if ref is None else f"{ref[col]:.2f}"
    return row


def write_results(path, rows: Iterable[dict[str, str]]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=RESULT_COLUMNS, lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow(row)


def read_results(path) -> list[dict[str, str]]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in RESULT_COLUMNS[:8] if c not in (reader.fieldnames or [])]
        if missing:
            raise FormatError(f"{path}: missing result columns {missing}")
        return list(reader)


def confusion_filename(feature: str, scheme: str, protocol: str, suffix: str = ".csv") -> str:
    return f"confusion__{feature}__{scheme}__{protocol}{suffix}"


def write_confusion(path, confusion: np.ndarray, classes: Sequence[str]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["true\\pred"] + list(classes))
        for c, row in zip(classes, np.asarray(confusion)):
            w.writerow([c] + [int(v) for v in row])


def read_confusion(path) -> tuple[np.ndarray, list[str]]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows or rows[0][0] != "true\\pred":
        raise FormatError(f"{path}: not a confusion-matrix CSV")
    classes = rows[0][1:]
    cm = np.array([[int(v) for v in r[1:]] for r in rows[1:]], dtype=np.int64)
    if cm.shape != (len(classes), len(classes)):
        raise FormatError(f"{path}: matrix is {cm.shape}, expected {len(classes)} square")
    return cm, classes


def row_percentages(confusion: np.ndarray) -> np.ndarray:
    cm = np.asarray(confusion, dtype=np.float64)
    totals = cm.sum(axis=1, keepdims=True)
    return np.divide(100.0 * cm, totals, out=np.zeros_like(cm), where=totals > 0)


def render_confusion(confusion: np.ndarray, classes: Sequence[str], title: str = "") -> str:
    """Row-normalised percentages, one row per true class."""
    pct = row_percentages(confusion)
    width = max(8, max(len(c) for c in classes) + 2)
    lines = [title] if title else []
    lines.append(" " * width + "".join(f"{c:>{width}}" for c in classes))
    for c, row, n in zip(classes, pct, np.asarray(confusion).sum(axis=1)):
        cells = "".join(f"{v:>{width - 1}.2f}%" if n else f"{'-':>{width}}" for v in row)
        lines.append(f"{c:<{width}}{cells}")
    return "\n".join(lines)


def render_results_table(rows: Sequence[dict[str, str]], with_published: Optional[bool] = None) -> str:
    """Feature x scheme table with one metric block per protocol, like the published tables."""
    protocols = sorted({r["protocol"] for r in rows}, key=lambda p: (p == "loso", p))
    cells = {(r["feature"], r["scheme"], r["protocol"]): r for r in rows}
    keys = []
    for r in rows:
        k = (r["feature"], r["scheme"])
        if k not in keys:
            keys.append(k)
    if with_published is None:
        with_published = any(r.get("published_accuracy") for r in rows)
    head1 = f"{'Feature':<9}{'Class':<14}"
    head2 = " " * 23
    for p in protocols:
        head1 += f"| {p:<39}"
        head2 += f"| {'Acc(%)':>8}{'TPR':>7}{'FPR':>7}{'F':>7}{'AUC':>7} "
    lines = [head1, head2, "-" * len(head2)]
    for feature, scheme in keys:
        for source in (("ours", ""),) + ((("published", "published_"),) if with_published else ()):
            label, prefix = source
            line = f"{feature if label == 'ours' else '':<9}{scheme if label == 'ours' else '  (published)':<14}"
            any_value = False
            for p in protocols:
                r = cells.get((feature, scheme, p))
                if r is None or not r.get(prefix + "accuracy"):
                    line += "| " + " " * 37 + " "
                    continue
                any_value = True
                vals = [float(r[prefix + c]) for c in ("accuracy",) + METRIC_COLUMNS]
                line += f"| {vals[0]:>8.2f}" + "".join(f"{v:>7.2f}" for v in vals[1:]) + " "
            if label == "ours" or any_value:
                lines.append(line)
    return "\n".join(lines)
