"""Minimal standalone SVG line charts for scan, statistics, and trace output."""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

from matplotlib.figure import Figure

__all__ = ["write_line_svg"]


def write_line_svg(
    path,
    x,
    series,
    *,
    xlabel: str = "",
    ylabel: str = "",
    title: str = "",
    logy: bool = False,
) -> None:
    """Render (label, y) series against x into a standalone SVG file.

    Uses an explicit Figure (no global pyplot state) and writes atomically.
    """
    fig = Figure(figsize=(9.0, 4.5))
    ax = fig.add_subplot(111)
    for label, y in series:
        ax.plot(x, y, linewidth=0.8, label=label)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if any(label for label, _ in series):
        ax.legend(loc="best", fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    os.close(fd)
    try:
        fig.savefig(tmp, format="svg")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
