"""Rendered figures for report artifacts (PNG via the Agg backend).

Each helper takes the already-computed analysis object plus a target
path, draws a single figure, and returns the path.  These accompany the
TSV/JSON outputs; the delimited files remain the canonical data.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .analysis import ConfusionMatrix, Leaderboard
from .scoring import ScoreReport


def _finish(fig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def save_leaderboard_figure(board: Leaderboard, path: str | Path) -> Path:
    """Grouped bars of actual and minimum primary cost per system."""
    rows = board.rows
    x = np.arange(len(rows))
    width = 0.38
    fig, ax = plt.subplots(figsize=(max(6.0, 0.9 * len(rows) + 2.0), 4.0))
    ax.bar(x - width / 2, [r.act_c_primary for r in rows], width, label="actual", color="#1f77b4")
    ax.bar(x + width / 2, [r.min_c_primary for r in rows], width, label="minimum", color="#9ecae1")
    ax.set_xticks(x)
    ax.set_xticklabels([r.system_id for r in rows], rotation=45, ha="right")
    ax.set_ylabel("primary cost")
    ax.legend()
    ax.grid(axis="y", alpha=0.3)
    return _finish(fig, path)


def save_language_costs_figure(report: ScoreReport, path: str | Path) -> Path:
    """Per-language actual cost bars for a single system (mean over apps)."""
    costs: dict[str, list[float]] = {}
    for app in report.apps:
        for lang in app.per_language:
            costs.setdefault(lang.language, []).append(lang.act_cost)
    codes = list(costs)
    values = [sum(v) / len(v) for v in costs.values()]
    fig, ax = plt.subplots(figsize=(max(6.0, 0.5 * len(codes) + 2.0), 4.0))
    ax.bar(np.arange(len(codes)), values, color="#1f77b4")
    ax.set_xticks(np.arange(len(codes)))
    ax.set_xticklabels(codes, rotation=45, ha="right")
    ax.set_ylabel("actual cost")
    ax.set_title(report.system_id)
    ax.grid(axis="y", alpha=0.3)
    return _finish(fig, path)


def save_dispersion_figure(rows, path: str | Path) -> Path:
    """Box plot of per-language actual costs across systems."""
    by_language: dict[str, list[float]] = {}
    for row in rows:
        by_language.setdefault(row.language, []).append(row.act_cost)
    codes = list(by_language)
    fig, ax = plt.subplots(figsize=(max(6.0, 0.5 * len(codes) + 2.0), 4.0))
    ax.boxplot([by_language[c] for c in codes], tick_labels=codes)
    ax.set_ylabel("actual cost")
    ax.tick_params(axis="x", rotation=45)
    ax.grid(axis="y", alpha=0.3)
    return _finish(fig, path)


def save_confusion_figure(conf: ConfusionMatrix, path: str | Path) -> Path:
    """Heat map of the confusion matrix (diagonal P_miss, off-diagonal P_fa)."""
    codes = conf.languages.codes
    n = len(codes)
    fig, ax = plt.subplots(figsize=(0.55 * n + 2.5, 0.55 * n + 2.0))
    image = ax.imshow(conf.cells, cmap="viridis", vmin=0.0, vmax=max(conf.cells.max(), 1e-6))
    ax.set_xticks(np.arange(n))
    ax.set_xticklabels(codes, rotation=90)
    ax.set_yticks(np.arange(n))
    ax.set_yticklabels(codes)
    ax.set_xlabel("non-target language")
    ax.set_ylabel("target language")
    ax.set_title(f"app {conf.app.label()}")
    fig.colorbar(image, ax=ax, shrink=0.8)
    return _finish(fig, path)


def save_partition_figure(results, path: str | Path, axis_label: str) -> Path:
    """Actual / minimum cost per partition cell, in cell order."""
    labels = [label for label, _n, _r in results]
    act = [r.act_c_primary for _l, _n, r in results]
    mn = [r.min_c_primary for _l, _n, r in results]
    x = np.arange(len(labels))
    fig, ax = plt.subplots(figsize=(max(6.0, 0.8 * len(labels) + 2.0), 4.0))
    ax.plot(x, act, marker="o", label="actual")
    ax.plot(x, mn, marker="s", label="minimum")
    ax.set_xticks(x)
    ax.set_xticklabels(labels, rotation=30, ha="right")
    ax.set_xlabel(axis_label)
    ax.set_ylabel("primary cost")
    ax.set_ylim(bottom=0.0)
    ax.legend()
    ax.grid(alpha=0.3)
    return _finish(fig, path)
