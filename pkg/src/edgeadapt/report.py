"""Render simulation reports and comparisons as CSV or aligned text tables."""

from __future__ import annotations

import csv
import io

from .scenario import ComparisonTable, SimulationReport

WINDOW_COLUMNS = ("subject", "scenario", "window_index", "mode", "energy_wh", "frames_processed",
                  "mean_true_count", "mean_detected_count")
AGGREGATE_COLUMNS = ("subject", "scenario", "total_energy_wh", "total_frames", "mean_fpr", "accuracy_proxy")
DELTA_COLUMNS = ("subject", "versus", "energy_saving", "fpr_gain", "accuracy_delta")
BOXPLOT_COLUMNS = ("subject", "block", "min", "q1", "median", "q3", "max")
RADAR_COLUMNS = ("subject", "acc", "eng", "rate")
FORMATS = ("csv", "table")


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".10g")
    return str(value)


def _sections(obj) -> list[tuple[tuple, list[dict]]]:
    if isinstance(obj, SimulationReport):
        rows = [{"subject": obj.subject, "scenario": obj.scenario, **vars(w)} for w in obj.windows]
        sections = [(WINDOW_COLUMNS, rows)]
        if rows:
            sections.append((AGGREGATE_COLUMNS, [{"subject": obj.subject, "scenario": obj.scenario,
                                                  **obj.aggregates()}]))
        return sections
    if isinstance(obj, ComparisonTable):
        return [(AGGREGATE_COLUMNS, obj.rows), (DELTA_COLUMNS, obj.deltas)]
    raise TypeError(f"cannot render {type(obj).__name__}")


def _csv(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def _table(columns, rows) -> str:
    cells = [list(columns)] + [[_fmt(row[c]) for c in columns] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(columns))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def emit_report(obj: SimulationReport | ComparisonTable, fmt: str = "csv") -> str:
    """Render ``obj``; sections (windows, aggregates, deltas) are separated by a blank line."""
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")
    render = _csv if fmt == "csv" else _table
    return "\n".join(render(cols, rows) for cols, rows in _sections(obj))


def emit_boxplot(table: ComparisonTable) -> str:
    return _csv(BOXPLOT_COLUMNS, table.boxplot)


def emit_radar(table: ComparisonTable) -> str:
    return _csv(RADAR_COLUMNS, table.radar)
