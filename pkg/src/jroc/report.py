"""Matplotlib figures written next to the experiment and stats CSV reports."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .experiment import MethodResultMatrix, aggregate_by_alpha, aggregate_by_dataset  # noqa: E402
from .rank_stats import SignificanceReport  # noqa: E402

METHOD_STYLE = {
    "Full": dict(color="black", marker="o"),
    "BMC": dict(color="#1f77b4", marker="s"),
    "BTC": dict(color="#2ca02c", marker="^"),
    "BJC": dict(color="#ff7f0e", marker="D"),
    "RND": dict(color="#d62728", marker="x"),
}

RC = {
    "font.size": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "svg.hashsalt": "jroc",
}
# keep PNG bytes stable between runs
SAVE_KW = dict(dpi=120, metadata={"Software": None})


def _save(fig, path: Path) -> Path:
    fig.savefig(path, **SAVE_KW)
    plt.close(fig)
    return path


def plot_by_alpha(mrm: MethodResultMatrix, path: str | Path) -> Path:
    """Mean test JC (with sd bars) against alpha, one line per method."""
    table = aggregate_by_alpha(mrm)
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(5.5, 3.6))
        x = np.array(table.keys, dtype=float)
        for k, m in enumerate(table.methods):
            style = METHOD_STYLE.get(m, {})
            ax.errorbar(x + (k - 2) * 0.006, table.mean[:, k], yerr=table.sd[:, k], capsize=2,
                        linewidth=1, markersize=4, label=m, **style)
        ax.set_xlabel("alpha")
        ax.set_ylabel("test JC")
        ax.legend(frameon=False, ncol=5, fontsize=7, loc="upper left")
        fig.tight_layout()
        return _save(fig, Path(path))


def plot_by_dataset(mrm: MethodResultMatrix, path: str | Path) -> Path:
    table = aggregate_by_dataset(mrm)
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(max(4.0, 1.4 * len(table.keys) + 2), 3.6))
        width = 0.8 / len(table.methods)
        base = np.arange(len(table.keys))
        for k, m in enumerate(table.methods):
            ax.bar(base + k * width, table.mean[:, k], width, yerr=table.sd[:, k], capsize=2,
                   color=METHOD_STYLE.get(m, {}).get("color"), label=m, error_kw=dict(linewidth=0.8))
        ax.set_xticks(base + 0.4 - width / 2)
        ax.set_xticklabels(table.keys)
        ax.set_ylabel("test JC")
        ax.legend(frameon=False, ncol=5, fontsize=7)
        fig.tight_layout()
        return _save(fig, Path(path))


def plot_critical_difference(report: SignificanceReport, path: str | Path) -> Path:
    """Average ranks on a line with the Nemenyi CD drawn as a bar."""
    ar = report.ranks.avg_ranks
    k = len(report.methods)
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(6, 1.2 + 0.25 * k))
        ax.set_xlim(0.8, k + 0.2)
        ax.set_ylim(-k - 1, 2)
        ax.hlines(0, 1, k, color="black", linewidth=1)
        for r in range(1, k + 1):
            ax.vlines(r, -0.1, 0.1, color="black", linewidth=1)
            ax.text(r, 0.3, str(r), ha="center", fontsize=8)
        for i in np.argsort(ar, kind="stable"):
            y = -1 - list(np.argsort(ar, kind="stable")).index(i)
            ax.plot([ar[i], ar[i]], [0, y], color="gray", linewidth=0.8)
            ax.text(ar[i] + 0.05, y, f"{report.methods[i]} ({ar[i]:.2f})", va="center", fontsize=8)
        ax.plot([1, 1 + report.cd], [1.2, 1.2], color="red", linewidth=2)
        ax.text(1 + report.cd / 2, 1.45, f"CD = {report.cd:.3f}", ha="center", fontsize=8, color="red")
        ax.axis("off")
        fig.tight_layout()
        return _save(fig, Path(path))


def write_experiment_figures(mrm: MethodResultMatrix, out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return [plot_by_alpha(mrm, out / "by_alpha.png"), plot_by_dataset(mrm, out / "by_dataset.png")]
