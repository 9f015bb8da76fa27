"""Frame diagrams drawn in layers by rank.

Dead ends sit on the bottom row, points of rank omega on a top row of their
own. Colours, when given, are indices into a qualitative palette so that a
map can be shown by colouring each source point like its image.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.patches import FancyArrowPatch  # noqa: E402

from .frame import OMEGA, rank  # noqa: E402

PALETTE = plt.get_cmap("tab10").colors


def layout(fr):
    """Point index -> (x, y); y is the rank, omega goes one row above the top."""
    ranks = rank(fr)
    finite = [r for r in ranks if r is not OMEGA]
    top = (max(finite) if finite else 0) + 1
    rows = {}
    for i, r in enumerate(ranks):
        rows.setdefault(top if r is OMEGA else r, []).append(i)
    pos = {}
    for y, members in rows.items():
        width = len(members)
        for k, i in enumerate(members):
            pos[i] = (k - (width - 1) / 2, y)
    return pos


def draw_frame(fr, ax=None, title=None, colors=None):
    if ax is None:
        _, ax = plt.subplots(figsize=(4, 3))
    pos = layout(fr)
    for i, j in fr.edges():
        (x0, y0), (x1, y1) = pos[i], pos[j]
        if i == j:
            ax.add_patch(plt.Circle((x0 + 0.12, y0 + 0.12), 0.12, fill=False, lw=0.8))
            continue
        bend = 0.25 if fr.has_edge(j, i) else 0.0
        ax.add_patch(FancyArrowPatch((x0, y0), (x1, y1), arrowstyle="-|>", mutation_scale=9,
                                     shrinkA=9, shrinkB=9, lw=0.8,
                                     connectionstyle=f"arc3,rad={bend}"))
    for i, (x, y) in pos.items():
        c = PALETTE[colors[i] % len(PALETTE)] if colors is not None else "white"
        ax.scatter([x], [y], s=220, c=[c], edgecolors="black", zorder=3)
        ax.annotate(fr.labels[i], (x, y), xytext=(0, -15), textcoords="offset points",
                    ha="center", va="top", fontsize=7)
    xs = [p[0] for p in pos.values()] or [0]
    ys = [p[1] for p in pos.values()] or [0]
    ax.set_xlim(min(xs) - 1, max(xs) + 1)
    ax.set_ylim(min(ys) - 0.8, max(ys) + 0.6)
    ax.set_aspect("equal")
    ax.axis("off")
    if title:
        ax.set_title(title, fontsize=9)
    return ax


def draw_map(f, path, titles=("domain", "codomain")):
    """Domain and codomain side by side, each point coloured by its image."""
    fig, (left, right) = plt.subplots(1, 2, figsize=(8, 3.5))
    draw_frame(f.domain, left, titles[0], colors=list(f.assign))
    draw_frame(f.codomain, right, titles[1], colors=list(range(len(f.codomain))))
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
    return path


def save_frame(fr, path, title=None):
    fig, ax = plt.subplots(figsize=(4, 3.5))
    draw_frame(fr, ax, title)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
    return path


def save_subdivision(result, X, F, path):
    """X, the subdivided frame and F in one row; X and F' coloured by their image in F."""
    fig, axes = plt.subplots(1, 3, figsize=(12, 4))
    draw_frame(X, axes[0], "X", colors=[result.g(y) for y in result.f_prime.assign])
    draw_frame(result.F_prime, axes[1], "F'", colors=list(result.g.assign))
    draw_frame(F, axes[2], "F", colors=list(range(len(F))))
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
    return path
