"""Report files: a machine-readable table and a human-readable summary."""

from pathlib import Path
from typing import Dict, List, Sequence, Tuple

from app.dataset import CLASS_ORDER
from app.evaluation.metrics import EvalReport
from app.logging_config import get_logger

logger = get_logger(__name__)

REPORT_FORMAT_VERSION = 1
REPORT_HEADER = f"# stonetype-report version={REPORT_FORMAT_VERSION} zero_division=0"

ReportRow = Tuple[Dict[str, str], EvalReport]


def evaluation_rows(report: EvalReport, **axes: str) -> List[ReportRow]:
    """One row per fold followed by the pooled row."""
    rows = [({**axes, "fold": str(i)}, fold) for i, fold in enumerate(report.folds)]
    rows.append(({**axes, "fold": "pooled"}, report))
    return rows


def _metric_columns(rows: Sequence[ReportRow]) -> List[str]:
    present = {c for _, report in rows for c in report.classes}
    columns = []
    for label in CLASS_ORDER:
        if label in present:
            columns.extend(f"{label.value}_{metric}" for metric in ("precision", "recall", "f1"))
    return columns + ["weighted_precision", "weighted_recall", "weighted_f1", "accuracy", "n"]


def format_report_table(rows: Sequence[ReportRow]) -> str:
    axis_columns: List[str] = []
    for axes, _ in rows:
        axis_columns.extend(name for name in axes if name not in axis_columns)
    metric_columns = _metric_columns(rows)

    lines = [REPORT_HEADER, "\t".join(axis_columns + metric_columns)]
    for axes, report in rows:
        values = {}
        for i, label in enumerate(report.classes):
            values[f"{label.value}_precision"] = report.precision[i]
            values[f"{label.value}_recall"] = report.recall[i]
            values[f"{label.value}_f1"] = report.f1[i]
        values["weighted_precision"] = report.weighted_precision
        values["weighted_recall"] = report.weighted_recall
        values["weighted_f1"] = report.weighted_f1
        values["accuracy"] = report.accuracy
        cells = [axes.get(name, "") for name in axis_columns]
        cells.extend(f"{values[name]:.6f}" if name in values else "" for name in metric_columns[:-1])
        cells.append(str(report.n_samples))
        lines.append("\t".join(cells))
    return "\n".join(lines) + "\n"


def format_confusion(report: EvalReport) -> str:
    """Confusion matrix as an integer grid, rows = true class, columns = predicted class."""
    names = [label.value for label in report.classes]
    width = max(5, *(len(n) for n in names), *(len(str(v)) for v in report.confusion.ravel()))
    lines = [" " * width + " " + " ".join(n.rjust(width) for n in names)]
    for name, row in zip(names, report.confusion):
        lines.append(name.rjust(width) + " " + " ".join(str(int(v)).rjust(width) for v in row))
    return "\n".join(lines)


def format_summary(rows: Sequence[ReportRow], title: str) -> str:
    lines = [title, "=" * len(title), ""]
    for axes, report in rows:
        label = ", ".join(f"{key}={value}" for key, value in axes.items()) or "report"
        lines.append(f"[{label}]")
        lines.append(
            f"accuracy {report.accuracy:.4f}  weighted precision {report.weighted_precision:.4f}  "
            f"weighted recall {report.weighted_recall:.4f}  weighted F1 {report.weighted_f1:.4f}  "
            f"(n={report.n_samples})"
        )
        for i, cls in enumerate(report.classes):
            lines.append(
                f"  {cls.value:<4} ({cls.code:<4}) P={report.precision[i]:.4f} R={report.recall[i]:.4f} "
                f"F1={report.f1[i]:.4f} support={int(report.support[i])}"
            )
        lines.append(format_confusion(report))
        lines.append("")
    return "\n".join(lines)


def write_report(rows: Sequence[ReportRow], path: Path, title: str) -> Tuple[Path, Path]:
    """Write ``<path>`` (table) and ``<path stem>.txt`` (summary); return both paths."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    summary_path = path.with_suffix(".txt")
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(format_report_table(rows))
    with open(summary_path, "w", encoding="utf-8", newline="\n") as f:
        f.write(format_summary(rows, title))
    logger.info(f"Wrote report table {path} and summary {summary_path}")
    return path, summary_path


def read_report_table(path: Path) -> List[Dict[str, str]]:
    """Rows of a report table keyed by column name.

    Raises:
        ValueError: If the file lacks the versioned header.
    """
    with open(path, "r", encoding="utf-8") as f:
        lines = f.read().splitlines()
    if not lines or not lines[0].startswith("# stonetype-report"):
        raise ValueError(f"{path} is not a stonetype report table")
    columns = lines[1].split("\t")
    return [dict(zip(columns, line.split("\t"))) for line in lines[2:] if line]
