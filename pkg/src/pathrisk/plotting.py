"""SVG rendering of heatmap and radius-sweep CSV files."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def read_heatmap_csv(path):
    """``(row_names, sigmas, matrix)`` from a ``trajectory,<sigma>...`` table."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    sigmas = np.array([float(v) for v in rows[0][1:]])
    names = [r[0] for r in rows[1:]]
    matrix = np.array([[float(v) for v in r[1:]] for r in rows[1:]])
    return names, sigmas, matrix


def render_heatmap(csv_path, svg_path, title: str = "", diverging: bool = False) -> Path:
    names, sigmas, m = read_heatmap_csv(csv_path)
    fig, ax = plt.subplots(figsize=(8, 0.6 * len(names) + 1.6))
    if diverging:
        lim = max(float(np.nanmax(np.abs(m))), 1e-12)
        im = ax.imshow(m, cmap="RdBu_r", vmin=-lim, vmax=lim, aspect="auto")
    else:
        im = ax.imshow(m, cmap="viridis", vmin=0.0, vmax=1.0, aspect="auto")
    ax.set_xticks(range(len(sigmas)), [f"{s:.2g}" for s in sigmas], rotation=45)
    ax.set_yticks(range(len(names)), names)
    ax.set_xlabel("sigma")
    for (i, j), v in np.ndenumerate(m):
        ax.text(j, i, f"{v:.2f}", ha="center", va="center", fontsize=7,
                color="white" if not diverging and v < 0.5 else "black")
    fig.colorbar(im, ax=ax)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    out = Path(svg_path)
    fig.savefig(out, format="svg")
    plt.close(fig)
    return out


def render_sweep(csv_path, svg_path, title: str = "") -> Path:
    """Probability against radius for one sweep block CSV."""
    with open(csv_path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    r = np.array([float(x["radius"]) for x in rows])
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for key, style in (("montecarlo", "k-o"), ("sensitivity", "C0--s"), ("risk_density", "C1:^")):
        ax.plot(r, [float(x[key]) for x in rows], style, ms=3, label=key)
    ax.set_xscale("log")
    ax.set_xlabel("combined radius")
    ax.set_ylabel("collision probability")
    ax.legend(fontsize=7)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    out = Path(svg_path)
    fig.savefig(out, format="svg")
    plt.close(fig)
    return out
