"""Optional vector-graphic views of scans and trajectories.

Plots are derived from the same in-memory records that the CSV writers
receive, so a plot can never disagree with its CSV.  matplotlib is imported
lazily; install the ``plots`` extra to use this module.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence


def _pyplot():
    try:
        import matplotlib
        matplotlib.use("Agg", force=False)
        import matplotlib.pyplot as plt
    except ImportError as exc:
        raise RuntimeError("plotting requires matplotlib (install the 'plots' extra)") from exc
    return plt


def save_line_plot(
    path: str | Path,
    x: Sequence[float],
    ys: dict[str, Sequence[float]],
    xlabel: str,
    ylabel: str,
    logx: bool = False,
    logy: bool = False,
) -> None:
    """One SVG line plot; ``ys`` maps legend labels to y-series."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, y in ys.items():
        ax.plot(x, y, marker=".", markersize=3, linewidth=1, label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if logx:
        ax.set_xscale("log")
    if logy:
        ax.set_yscale("log")
    if len(ys) > 1:
        ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
