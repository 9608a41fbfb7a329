import json
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

from app.exception.exception import MetricError
from app.jsonl import write_jsonl
from app.metrics.statistics import kde_overlap

from .models import EvalRecord, SummaryTable

logger = logging.getLogger(__name__)

STAT_ROWS = ("min", "max", "median", "mean", "std")


def _fmt(value: Optional[float]) -> str:
    return "n/a" if value is None else f"{value:.4f}"


def _table(header: List[str], rows: List[List[str]]) -> List[str]:
    widths = [max(len(row[i]) for row in [header] + rows) for i in range(len(header))]
    lines = ["  ".join(cell.ljust(widths[i]) if i == 0 else cell.rjust(widths[i])
                       for i, cell in enumerate(row)) for row in [header] + rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return lines


def render_overall(table: SummaryTable) -> List[str]:
    """One block per metric: statistic rows by system columns."""
    lines: List[str] = []
    systems = table.systems
    for metric in table.metrics:
        rows = []
        for stat in STAT_ROWS:
            row = [stat]
            for system in systems:
                cell = table.cell("overall", system, metric)
                row.append(_fmt(getattr(cell, stat)) if cell else "n/a")
            rows.append(row)
        if table.reference_system:
            row = [f"p-value vs {table.reference_system}"]
            for system in systems:
                cell = table.cell("overall", system, metric)
                row.append("-" if system == table.reference_system else _fmt(cell.p_value if cell else None))
            rows.append(row)
        lines.append(f"== {metric} ==")
        lines.extend(_table([metric] + systems, rows))
        lines.append("")
    return lines


def render_per_category(table: SummaryTable) -> List[str]:
    """Median per category, one block per metric."""
    lines: List[str] = []
    systems = table.systems
    for metric in table.metrics:
        rows = []
        for group in table.groups:
            row = [group]
            for system in systems:
                cell = table.cell(group, system, metric)
                row.append(_fmt(cell.median) if cell else "n/a")
            rows.append(row)
        lines.append(f"== median {metric} by category ==")
        lines.extend(_table(["category"] + systems, rows))
        lines.append("")
    return lines


def compute_overlaps(records: Sequence[EvalRecord], reference_system: str) -> Dict[str, Dict[str, Optional[float]]]:
    """KDE overlap percent of each system against the reference, per metric."""
    values: Dict[str, Dict[str, List[tuple]]] = {}
    for record in records:
        values.setdefault(record.metric, {}).setdefault(record.system, []).append((record.question_id, record.value))
    overlaps: Dict[str, Dict[str, Optional[float]]] = {}
    for metric in sorted(values):
        reference = [v for _, v in sorted(values[metric].get(reference_system, []))]
        for system in sorted(values[metric]):
            if system == reference_system:
                continue
            sample = [v for _, v in sorted(values[metric][system])]
            try:
                overlap = kde_overlap(sample, reference)
            except MetricError as e:
                logger.warning(f"[EVAL] KDE overlap {metric} {system} vs {reference_system} undefined: {e.message}")
                overlap = None
            overlaps.setdefault(metric, {})[system] = overlap
    return overlaps


def render_summary_text(
        overall: SummaryTable,
        per_category: SummaryTable,
        overlaps: Optional[Dict[str, Dict[str, Optional[float]]]] = None,
) -> str:
    lines = ["# Overall"] + render_overall(overall) + ["# Per category"] + render_per_category(per_category)
    if overlaps:
        lines.append(f"# KDE overlap vs {overall.reference_system}")
        for metric, by_system in overlaps.items():
            for system, overlap in by_system.items():
                shown = "n/a" if overlap is None else f"{overlap:.2f}%"
                lines.append(f"{metric}  {system}: {shown}")
        lines.append("")
    lines.append("p-values: two-sided Welch t-test.")
    return "\n".join(lines) + "\n"


def write_report(
        out_dir: Union[str, Path],
        records: Sequence[EvalRecord],
        overall: SummaryTable,
        per_category: SummaryTable,
        overlaps: Optional[Dict[str, Dict[str, Optional[float]]]] = None,
) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ordered = sorted(records, key=lambda r: (r.system, r.question_id, r.metric))
    write_jsonl(out_dir / "records.jsonl", (r.model_dump(mode="json") for r in ordered))
    summary = {
        "overall": overall.model_dump(mode="json"),
        "per_category": per_category.model_dump(mode="json"),
        "kde_overlap": overlaps or {},
    }
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    (out_dir / "summary.txt").write_text(render_summary_text(overall, per_category, overlaps), encoding="utf-8")
    logger.info(f"[EVAL] Report written to {out_dir}")
    return out_dir
