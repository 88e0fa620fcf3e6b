"""Profile figures rendered off-screen next to the CSV plot data."""

from __future__ import annotations

import numpy as np


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def render_profile(path, x, series: dict, xlabel: str, ylabel: str, title: str = "", logy=False):
    """Plot each ``series`` entry against ``x`` and save a PNG to ``path``."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.0, 4.0), dpi=100)
    for label, y in series.items():
        ax.plot(x, np.asarray(y, dtype=float), label=label, lw=1.4)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    if len(series) > 1:
        ax.legend(frameon=False)
    fig.tight_layout()
    # fixed metadata keeps repeated renders byte-identical
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
    return path
