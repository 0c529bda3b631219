"""SVG figures accompanying CLI reports: trajectories, scatter, violins.

Figures are illustrative companions to report.json and are excluded from
the byte-identity contract; metadata that varies between runs (creation
date, hashed ids) is still pinned so identical runs usually produce
identical files.
"""
from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

matplotlib.rcParams["svg.hashsalt"] = "ideaflow"

# (label, times, values, kind) with kind "line" or "points"
Curve = tuple[str, np.ndarray, np.ndarray, str]


def _save(fig, outfile: str | Path) -> Path:
    outfile = Path(outfile)
    fig.savefig(outfile, format="svg", metadata={"Date": None})
    plt.close(fig)
    return outfile


def trajectory_overlay(outfile: str | Path, curves: Sequence[Curve]) -> Path:
    """Level trajectories on a log scale, observations as markers."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for label, times, values, kind in curves:
        if kind == "points":
            ax.plot(times, values, "o", markersize=3, label=label)
        else:
            ax.plot(times, values, "-", label=label)
    ax.set_yscale("log")
    ax.set_xlabel("time (decimal years)")
    ax.set_ylabel("level")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    return _save(fig, outfile)


def bootstrap_scatter(outfile: str | Path, betas: np.ndarray,
                      lams: np.ndarray, center: tuple[float, float]) -> Path:
    """Replicate (beta, lambda) cloud with the point estimate marked."""
    fig, ax = plt.subplots(figsize=(5.0, 5.0))
    ax.scatter(betas, lams, s=10, alpha=0.5, label="bootstrap replicates")
    ax.scatter([center[0]], [center[1]], marker="x", s=80, color="black",
               label="fit")
    ax.axhline(0.0, linewidth=0.5, color="gray")
    ax.set_xlabel("beta")
    ax.set_ylabel("lambda")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    return _save(fig, outfile)


def posterior_violins(outfile: str | Path, names: Sequence[str],
                      columns: Sequence[np.ndarray]) -> Path:
    """Posterior marginals as violins on a log10 axis."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.violinplot([np.log10(col) for col in columns], showmedians=True)
    ax.set_xticks(range(1, len(names) + 1), labels=list(names))
    ax.set_ylabel("log10 value")
    fig.tight_layout()
    return _save(fig, outfile)
