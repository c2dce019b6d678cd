"""Matplotlib renderings written next to the CSV reports.

Everything draws on the non-interactive Agg canvas and returns the saved
path, so the CLI and batch jobs never need a display.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .core import ScoreMap  # noqa: E402
from .evaluation import RocCurve, SeparationStats, auc  # noqa: E402

__all__ = ["report_style", "plot_roc", "plot_separation", "plot_score_map", "plot_runtime"]

report_style = {
    "figure.dpi": 100,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "lines.linewidth": 1.4,
}


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_roc(curves: dict[str, RocCurve], path, log_far: bool = False) -> Path:
    """ROC curves (detection probability vs false alarm rate), AUC in the legend."""
    with plt.rc_context(report_style):
        fig, ax = plt.subplots(figsize=(4.2, 3.6))
        for name, curve in curves.items():
            far = curve.far
            if log_far:
                far = np.clip(far, 1e-4, 1.0)
            ax.step(far, curve.dp, where="post", label=f"{name} ({auc(curve):.4f})")
        if log_far:
            ax.set_xscale("log")
        else:
            ax.plot([0, 1], [0, 1], color="0.7", lw=0.8, ls="--")
        ax.set_xlabel("False alarm rate")
        ax.set_ylabel("Detection probability")
        ax.set_ylim(0, 1.02)
        ax.legend(loc="lower right", frameon=False)
        return _save(fig, path)


def plot_separation(stats: dict[str, SeparationStats], path) -> Path:
    """Paired background/anomaly boxes of normalized scores per detector."""
    boxes, positions, colors = [], [], []
    for i, summary in enumerate(stats.values()):
        for j, (cls, color) in enumerate(((summary.background, "tab:blue"), (summary.anomaly, "tab:red"))):
            boxes.append(
                {"whislo": cls.min, "q1": cls.q1, "med": cls.median, "q3": cls.q3, "whishi": cls.max, "fliers": []}
            )
            positions.append(3 * i + j)
            colors.append(color)
    with plt.rc_context(report_style):
        fig, ax = plt.subplots(figsize=(max(3.0, 1.2 * len(stats) + 1.5), 3.4))
        artists = ax.bxp(boxes, positions=positions, widths=0.7, patch_artist=True, showfliers=False)
        for patch, color in zip(artists["boxes"], colors):
            patch.set_facecolor(color)
            patch.set_alpha(0.55)
        ax.set_xticks([3 * i + 0.5 for i in range(len(stats))])
        ax.set_xticklabels(list(stats))
        ax.set_ylabel("Normalized score")
        ax.set_ylim(-0.02, 1.02)
        handles = [plt.Rectangle((0, 0), 1, 1, fc=c, alpha=0.55) for c in ("tab:blue", "tab:red")]
        ax.legend(handles, ["background", "anomaly"], frameon=False, loc="upper left")
        return _save(fig, path)


def plot_score_map(scores: ScoreMap, path, title: str | None = None, cmap: str = "jet") -> Path:
    with plt.rc_context(report_style):
        fig, ax = plt.subplots(figsize=(3.6, 3.2))
        im = ax.imshow(scores.scores, cmap=cmap, interpolation="nearest")
        ax.set_axis_off()
        if title:
            ax.set_title(title)
        fig.colorbar(im, ax=ax, fraction=0.046, pad=0.04)
        return _save(fig, path)


def plot_runtime(params, means, sds, path, xlabel: str, fit: tuple[float, float] | None = None) -> Path:
    """Mean runtime with one-sd error bars; optional ``(slope, intercept)`` fit line."""
    x = np.asarray(params, dtype=float)
    with plt.rc_context(report_style):
        fig, ax = plt.subplots(figsize=(4.2, 3.0))
        ax.errorbar(x, means, yerr=sds, fmt="o-", ms=3, capsize=2)
        if fit is not None:
            ax.plot(x, fit[0] * x + fit[1], color="0.5", ls="--", lw=1, label="linear fit")
            ax.legend(frameon=False)
        ax.set_xlabel(xlabel)
        ax.set_ylabel("Running time (s)")
        ax.set_ylim(bottom=0)
        return _save(fig, path)
