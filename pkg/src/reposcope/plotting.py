"""Bar charts for evaluation reports (written next to the JSON report)."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .evaluation import EvalReport  # noqa: E402


def _bars(ax, labels, values, ylabel, fmt):
    xs = range(len(labels))
    bars = ax.bar(xs, values, color="#4c72b0", edgecolor="black", linewidth=0.6)
    ax.set_xticks(list(xs))
    ax.set_xticklabels(labels)
    ax.set_ylabel(ylabel)
    ax.spines["top"].set_visible(False)
    ax.spines["right"].set_visible(False)
    for bar, v in zip(bars, values):
        ax.annotate(fmt.format(v), (bar.get_x() + bar.get_width() / 2, bar.get_height()),
                    ha="center", va="bottom", fontsize=8)


def plot_f1(reports: Sequence[EvalReport], path: str | Path) -> Path:
    """Micro-F1 and functions-only F1 per variant."""
    path = Path(path)
    labels = [r.variant for r in reports]
    fig, axes = plt.subplots(1, 2, figsize=(8, 3.2), sharey=True)
    _bars(axes[0], labels, [r.micro[2] for r in reports], "callee F1", "{:.3f}")
    axes[0].set_title("all entities", fontsize=10)
    _bars(axes[1], labels, [r.functions_only[2] for r in reports], "", "{:.3f}")
    axes[1].set_title("functions only", fontsize=10)
    axes[0].set_ylim(0, 1)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_callee_counts(reports: Sequence[EvalReport], path: str | Path) -> Path:
    path = Path(path)
    fig, ax = plt.subplots(figsize=(4.5, 3.2))
    labels = [f"{r.variant}\nk={r.k_chain}" for r in reports]
    _bars(ax, labels, [r.mean_callees for r in reports], "mean predicted callees", "{:.2f}")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_report(reports: Sequence[EvalReport], report_path: str | Path) -> list[Path]:
    """Write ``<stem>_f1.png`` and ``<stem>_callees.png`` beside the report."""
    report_path = Path(report_path)
    stem = report_path.with_suffix("")
    return [
        plot_f1(reports, f"{stem}_f1.png"),
        plot_callee_counts(reports, f"{stem}_callees.png"),
    ]
