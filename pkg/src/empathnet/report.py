"""Figure rendering for exports: network diagrams and welfare charts.

Everything draws through the Agg backend so it works headless; files are
written deterministically (fixed layout, no timestamps in metadata).
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402
from matplotlib.patches import FancyArrowPatch  # noqa: E402

from .errors import ValidationError  # noqa: E402
from .network import EmpathicMatrix, empathic_centrality  # noqa: E402

__all__ = ["render_network_png", "render_welfare_png"]

_PNG_META = {"Software": "empathnet"}


def _node_positions(n):
    angles = np.pi / 2 - 2 * np.pi * np.arange(n) / n  # node 1 on top, clockwise
    return np.column_stack([np.cos(angles), np.sin(angles)])


def render_network_png(W: EmpathicMatrix, path, labels=None, eps_prime=0.01,
                       title=None, dpi=150):
    """Circular-layout plot of the empathy digraph.

    Node area tracks centrality, arrow width tracks the weight; the number
    under each label is the expert's self-weight.  Arcs below the intensity
    floor are not drawn.
    """
    n = W.n
    if labels is None:
        labels = [f"d{k}" for k in range(1, n + 1)]
    if len(labels) != n:
        raise ValidationError(f"{len(labels)} labels for {n} experts")
    pos = _node_positions(n)
    omega = empathic_centrality(W).omega
    top = max(float(omega.max()), 1e-9)

    fig, ax = plt.subplots(figsize=(6.0, 6.0))
    wmax = max(float(W.entries.max()), 1e-9)
    for i in range(n):
        for j in range(n):
            if i == j or W.entries[i, j] < eps_prime - 1e-12:
                continue
            w = float(W.entries[i, j])
            ax.add_patch(FancyArrowPatch(
                pos[i], pos[j],
                arrowstyle="-|>",
                mutation_scale=12,
                connectionstyle="arc3,rad=0.12",
                shrinkA=14, shrinkB=14,
                linewidth=0.6 + 2.4 * w / wmax,
                color=(0.18, 0.32, 0.55, 0.35 + 0.6 * w / wmax),
                zorder=1,
            ))
    sizes = 280.0 + 900.0 * omega / top
    ax.scatter(pos[:, 0], pos[:, 1], s=sizes, c="#dce6f2",
               edgecolors="#2d5186", linewidths=1.2, zorder=2)
    for k in range(n):
        ax.annotate(f"{labels[k]}\n{W.entries[k, k]:.2f}", pos[k],
                    ha="center", va="center", fontsize=8, zorder=3)
    if title:
        ax.set_title(title)
    ax.set_xlim(-1.45, 1.45)
    ax.set_ylim(-1.45, 1.45)
    ax.set_aspect("equal")
    ax.axis("off")
    fig.savefig(path, dpi=dpi, bbox_inches="tight", metadata=_PNG_META)
    plt.close(fig)


def render_welfare_png(report, path, alternatives=None, dpi=150):
    """Grouped bar chart of per-alternative welfare, one group of bars per
    network row; the winning bar of each row carries a star."""
    m = report.m
    if alternatives is None:
        alternatives = [f"a{s}" for s in range(1, m + 1)]
    if len(alternatives) != m:
        raise ValidationError(f"{len(alternatives)} labels for {m} alternatives")
    rows = report.rows
    width = 0.8 / max(len(rows), 1)
    base = np.arange(m, dtype=float)

    fig, ax = plt.subplots(figsize=(1.8 + 1.2 * m, 4.5))
    for r, row in enumerate(rows):
        x = base + (r - (len(rows) - 1) / 2.0) * width
        bars = ax.bar(x, row.sw, width=width * 0.92, label=row.label)
        star = row.best - 1
        ax.annotate("*", (x[star], row.sw[star]), ha="center", va="bottom",
                    fontsize=11, color=bars[star].get_facecolor())
    ax.set_xticks(base)
    ax.set_xticklabels(alternatives)
    ax.set_ylabel("social welfare")
    ax.legend(fontsize=8, ncol=2)
    fig.savefig(path, dpi=dpi, bbox_inches="tight", metadata=_PNG_META)
    plt.close(fig)
