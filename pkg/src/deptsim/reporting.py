"""Result tables and charts.

One CSV row per (arm, replication) with a fixed column order, a per-arm
summary table (mean and standard deviation per KPI), and static vector
charts of a KPI against the swept parameter. Rendering is deterministic:
the same rows produce byte-identical files.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .metrics import KpiReport  # noqa: E402

plt.rcParams["svg.hashsalt"] = "deptsim"

# Column order of results CSVs. The first two identify the row, the rest are
# KPIs aggregated per replication.
KPI_COLUMNS: tuple[str, ...] = (
    "transactions",
    "service_level_index",
    "help_index",
    "till_index",
    "mean_help_wait",
    "mean_till_wait",
    "p95_till_wait",
    "abandoned_help",
    "abandoned_till",
    "util_cashier",
    "util_seller_normal",
    "util_seller_expert",
    "util_manager",
)
CSV_COLUMNS: tuple[str, ...] = ("arm_value", "replication") + KPI_COLUMNS

_INT_COLUMNS = {"transactions", "abandoned_help", "abandoned_till", "replication"}


class MalformedCsvError(ValueError):
    """A results CSV is missing columns or holds non-numeric cells."""


def report_kpi(report: KpiReport, kpi: str) -> float:
    """Extract one KPI column's value from a report."""
    if kpi == "transactions":
        return float(report.transactions)
    if kpi in ("service_level_index", "help_index", "till_index", "mean_help_wait", "mean_till_wait", "p95_till_wait"):
        return float(getattr(report, kpi))
    if kpi == "abandoned_help":
        return float(report.outcome_counts["abandoned_help_queue"])
    if kpi == "abandoned_till":
        return float(report.outcome_counts["abandoned_till_queue"])
    if kpi == "util_cashier":
        return report.utilization.get("cashier", 0.0)
    if kpi == "util_seller_normal":
        return report.utilization.get("seller_normal", 0.0)
    if kpi == "util_seller_expert":
        return report.utilization.get("seller_expert", 0.0)
    if kpi == "util_manager":
        return report.utilization.get("section_manager", 0.0)
    raise KeyError(f"unknown KPI {kpi!r}; expected one of {KPI_COLUMNS}")


def _fmt(value: float, column: str) -> str:
    if column in _INT_COLUMNS:
        return str(int(value))
    return format(float(value), ".10g")


def report_row(report: KpiReport) -> list[str]:
    arm = report.arm_value
    row = ["" if arm is None else _fmt(arm, "arm_value"), str(report.replication)]
    row.extend(_fmt(report_kpi(report, kpi), kpi) for kpi in KPI_COLUMNS)
    return row


def write_results_csv(reports: Iterable[KpiReport], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for report in reports:
            writer.writerow(report_row(report))
    return path


def read_results_csv(path: str | Path) -> list[dict[str, float]]:
    """Rows of a results CSV as {column: float} dicts."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(CSV_COLUMNS) - set(reader.fieldnames or [])
        if missing:
            raise MalformedCsvError(f"{path}: missing columns {sorted(missing)}")
        rows = []
        for lineno, raw in enumerate(reader, start=2):
            row = {}
            for column in CSV_COLUMNS:
                cell = raw[column]
                if cell is None:
                    raise MalformedCsvError(f"{path}:{lineno}: short row")
                try:
                    row[column] = float(cell) if cell != "" else 0.0
                except ValueError as exc:
                    raise MalformedCsvError(f"{path}:{lineno}: column {column!r} is not numeric: {cell!r}") from exc
            rows.append(row)
    if not rows:
        raise MalformedCsvError(f"{path}: no data rows")
    return rows


def summarize_rows(rows: Sequence[dict[str, float]]) -> list[dict[str, float]]:
    """Per-arm mean and sample standard deviation of every KPI column."""
    arms: dict[float, list[dict[str, float]]] = {}
    for row in rows:
        arms.setdefault(row["arm_value"], []).append(row)
    summary = []
    for arm in sorted(arms):
        group = arms[arm]
        n = len(group)
        entry: dict[str, float] = {"arm_value": arm, "n": n}
        for kpi in KPI_COLUMNS:
            values = [r[kpi] for r in group]
            mean = sum(values) / n
            entry[f"{kpi}_mean"] = mean
            if n > 1:
                entry[f"{kpi}_std"] = (sum((v - mean) ** 2 for v in values) / (n - 1)) ** 0.5
            else:
                entry[f"{kpi}_std"] = 0.0
        summary.append(entry)
    return summary


def write_summary_csv(rows: Sequence[dict[str, float]], path: str | Path) -> Path:
    summary = summarize_rows(rows)
    columns = ["arm_value", "n"]
    for kpi in KPI_COLUMNS:
        columns.extend([f"{kpi}_mean", f"{kpi}_std"])
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for entry in summary:
            writer.writerow(
                [str(int(entry["n"])) if c == "n" else format(entry[c], ".10g") for c in columns]
            )
    return path


def chart_series(rows: Sequence[dict[str, float]], kpi: str) -> tuple[list[float], list[float], list[float]]:
    """(arm values, means, standard deviations) for one KPI, arm-sorted."""
    if kpi not in KPI_COLUMNS:
        raise KeyError(f"unknown KPI {kpi!r}; expected one of {KPI_COLUMNS}")
    summary = summarize_rows(rows)
    arms = [e["arm_value"] for e in summary]
    means = [e[f"{kpi}_mean"] for e in summary]
    stds = [e[f"{kpi}_std"] for e in summary]
    return arms, means, stds


def render_chart(
    rows: Sequence[dict[str, float]],
    kpi: str,
    path: str | Path,
    arm_label: str = "arm value",
) -> tuple[list[float], list[float], list[float]]:
    """Render KPI vs swept parameter (mean line, +/- one std dev band) to a
    static vector file. Returns the plotted series."""
    arms, means, stds = chart_series(rows, kpi)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    lower = [m - s for m, s in zip(means, stds)]
    upper = [m + s for m, s in zip(means, stds)]
    ax.fill_between(arms, lower, upper, alpha=0.25, color="#4878a8", linewidth=0)
    ax.plot(arms, means, marker="o", color="#2c5985")
    ax.set_xlabel(arm_label)
    ax.set_ylabel(kpi.replace("_", " "))
    ax.set_title(f"{kpi.replace('_', ' ')} (mean and one std dev band)")
    ax.grid(True, alpha=0.3)
    if len(arms) > 1:
        ax.set_xticks(arms)
    metadata = {"Date": None} if path.suffix == ".svg" else {"CreationDate": None}
    fig.savefig(path, format=path.suffix.lstrip("."), metadata=metadata)
    plt.close(fig)
    return arms, means, stds
