"""Report rendering: delimited files, plain-text grids, and figures.

All text output is deterministic (no timestamps) so repeated seeded runs
produce byte-identical report files.
"""

from pathlib import Path
from typing import List

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .threatsim import (
    SCORE_AXES,
    ComparisonReport,
    ScenarioReport,
    SovereigntyScorecard,
)


def scorecard_tsv(scorecard: SovereigntyScorecard) -> str:
    lines = ["axis\tscore"]
    for axis in SCORE_AXES:
        lines.append(f"{axis}\t{getattr(scorecard, axis):.6f}")
    return "\n".join(lines) + "\n"


def scenario_summary_text(report: ScenarioReport) -> str:
    scenario = report.scenario
    lines = [
        f"scenario: {scenario.scenario_id.value}",
        f"mode: {scenario.mode.value}",
        f"seed: {scenario.seed}",
        f"tasks: {scenario.task_count}",
        f"routing concentration (max window share): {report.concentration:.3f}",
        "",
        "terminal states:",
    ]
    counts: dict = {}
    for state in report.task_states.values():
        counts[state.value] = counts.get(state.value, 0) + 1
    for state in sorted(counts):
        lines.append(f"  {state}: {counts[state]}")
    lines.append("")
    lines.append("sovereignty scorecard:")
    for axis in SCORE_AXES:
        lines.append(f"  {axis}: {getattr(report.scorecard, axis):.3f}")
    return "\n".join(lines) + "\n"


def comparison_tsv(report: ComparisonReport) -> str:
    lines = ["dimension\tmodel_centric\tsovereignty_centric\tdefinition"]
    for row in report.rows:
        lines.append(
            f"{row.dimension}\t{row.model_centric:.6f}\t{row.sovereignty_centric:.6f}\t{row.definition}"
        )
    return "\n".join(lines) + "\n"


def comparison_grid(report: ComparisonReport) -> str:
    """Plain-text grid of the eight paired dimensions."""
    header = ("dimension", "model-centric", "sovereignty-centric")
    rows: List[tuple] = [header]
    for row in report.rows:
        rows.append((row.dimension, f"{row.model_centric:.3f}", f"{row.sovereignty_centric:.3f}"))
    widths = [max(len(r[i]) for r in rows) for i in range(3)]
    sep = "+-" + "-+-".join("-" * w for w in widths) + "-+"
    out = [sep]
    for i, r in enumerate(rows):
        out.append("| " + " | ".join(cell.ljust(widths[j]) for j, cell in enumerate(r)) + " |")
        if i == 0:
            out.append(sep)
    out.append(sep)
    if report.drift_warning:
        out.append("warning: routing concentration exceeded the normative-drift threshold")
    return "\n".join(out) + "\n"


def render_scorecard_figure(scorecard: SovereigntyScorecard, path: str | Path) -> None:
    fig, ax = plt.subplots(figsize=(8, 4.5))
    values = [getattr(scorecard, axis) for axis in SCORE_AXES]
    ax.barh(list(SCORE_AXES), values, color="#3b6ea5")
    ax.set_xlim(0, 1.05)
    ax.set_xlabel("score")
    ax.set_title("Sovereignty scorecard")
    ax.invert_yaxis()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_comparison_figure(report: ComparisonReport, path: str | Path) -> None:
    dims = [row.dimension for row in report.rows]
    mc = [row.model_centric for row in report.rows]
    sc = [row.sovereignty_centric for row in report.rows]
    y = range(len(dims))
    fig, ax = plt.subplots(figsize=(9, 5.5))
    ax.barh([i + 0.2 for i in y], mc, height=0.38, label="model-centric", color="#b3543f")
    ax.barh([i - 0.2 for i in y], sc, height=0.38, label="sovereignty-centric", color="#3b6ea5")
    ax.set_yticks(list(y))
    ax.set_yticklabels(dims)
    ax.set_xlim(0, 1.05)
    ax.set_xlabel("metric value")
    ax.set_title("Model-centric vs sovereignty-centric integration")
    ax.invert_yaxis()
    ax.legend(loc="lower right")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def write_scenario_report(report: ScenarioReport, out_dir: str | Path) -> List[Path]:
    """Write the audit log, scorecard TSV, summary, and scorecard figure."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    prefix = f"{report.scenario.scenario_id.value}_{report.scenario.mode.value}"
    paths = []
    log_path = out / f"{prefix}.audit.log"
    report.log.write(log_path)
    paths.append(log_path)
    tsv_path = out / f"{prefix}.scorecard.tsv"
    tsv_path.write_text(scorecard_tsv(report.scorecard))
    paths.append(tsv_path)
    summary_path = out / f"{prefix}.summary.txt"
    summary_path.write_text(scenario_summary_text(report))
    paths.append(summary_path)
    fig_path = out / f"{prefix}.scorecard.png"
    render_scorecard_figure(report.scorecard, fig_path)
    paths.append(fig_path)
    return paths


def write_comparison_report(report: ComparisonReport, out_dir: str | Path) -> List[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tsv_path = out / "comparison.tsv"
    tsv_path.write_text(comparison_tsv(report))
    grid_path = out / "comparison.txt"
    grid_path.write_text(comparison_grid(report))
    fig_path = out / "comparison.png"
    render_comparison_figure(report, fig_path)
    return [tsv_path, grid_path, fig_path]
