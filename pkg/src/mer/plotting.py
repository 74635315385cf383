"""Figures written next to the report CSVs: confusion heatmaps and accuracy bars.

Uses the non-interactive Agg backend, so it works headless.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .report import row_percentages  # noqa: E402

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0
FEATURE_COLORS = {"lbp-top": "#2b8cbe", "hog3d": "#e6550d", "hoof": "#31a354"}

RC_PARAMS = {
    "font.size": 8,
    "axes.labelsize": 9,
    "axes.titlesize": 9,
    "legend.fontsize": 7,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "figure.dpi": 150,
    "savefig.bbox": "tight",
    # fixed metadata keeps reruns byte-identical
    "svg.hashsalt": "mer",
}


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
    return path


def plot_confusion(confusion: np.ndarray, classes: Sequence[str], path, title: str = "") -> Path:
    """Heatmap of row-normalised percentages with the value printed in each cell."""
    pct = row_percentages(confusion)
    n = len(classes)
    side = max(2.6, 0.55 * n + 1.2)
    with plt.rc_context(RC_PARAMS):
        fig, ax = plt.subplots(figsize=(side, side))
        im = ax.imshow(pct, cmap="Blues", vmin=0, vmax=100)
        ax.set_xticks(range(n), labels=classes, rotation=45, ha="right")
        ax.set_yticks(range(n), labels=classes)
        ax.set_xlabel("predicted")
        ax.set_ylabel("true")
        for i in range(n):
            for j in range(n):
                ax.text(j, i, f"{pct[i, j]:.1f}", ha="center", va="center", fontsize=6,
                        color="white" if pct[i, j] > 60 else "black")
        if title:
            ax.set_title(title)
        fig.colorbar(im, ax=ax, fraction=0.046, pad=0.04, label="% of true class")
        return _save(fig, path)


def plot_accuracy(rows: Sequence[dict[str, str]], protocol: str, path) -> Path:
    """Grouped bars of accuracy per scheme and feature, published values as hollow markers."""
    rows = [r for r in rows if r["protocol"] == protocol]
    schemes = list(dict.fromkeys(r["scheme"] for r in rows))
    features = list(dict.fromkeys(r["feature"] for r in rows))
    cell = {(r["feature"], r["scheme"]): r for r in rows}
    width = 0.8 / max(1, len(features))
    fig_w = max(3.4, 1.1 * len(schemes) + 1.5)
    with plt.rc_context(RC_PARAMS):
        fig, ax = plt.subplots(figsize=(fig_w, fig_w * GOLDEN))
        x = np.arange(len(schemes))
        for i, f in enumerate(features):
            offs = x - 0.4 + width * (i + 0.5)
            ours = [float(cell[(f, s)]["accuracy"]) if (f, s) in cell else np.nan for s in schemes]
            ax.bar(offs, ours, width, label=f, color=FEATURE_COLORS.get(f, None))
            ref = [float(cell[(f, s)].get("published_accuracy") or "nan") if (f, s) in cell else np.nan
                   for s in schemes]
            if not np.all(np.isnan(ref)):
                ax.plot(offs, ref, "o", mfc="none", mec="black", ms=4)
        ax.set_xticks(x, labels=schemes)
        ax.set_ylim(0, 100)
        ax.set_ylabel("accuracy (%)")
        ax.set_title(protocol)
        ax.legend(frameon=False, ncol=len(features), loc="upper center", bbox_to_anchor=(0.5, -0.12))
        return _save(fig, path)
