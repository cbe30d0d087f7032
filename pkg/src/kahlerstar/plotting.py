"""Matplotlib figures for the report command: graph galleries and check residuals."""

from __future__ import annotations

import math
from collections import Counter
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.patches import FancyArrowPatch  # noqa: E402

from .graphs import Graph, topological_order  # noqa: E402


def layered_layout(g: Graph) -> dict[int, tuple[float, float]]:
    """Longest-path layers left to right; vertices spread vertically in each layer."""
    layer = {v: 0 for v in g.vertex_ids()}
    for v in topological_order(g) or list(g.vertex_ids()):
        for e in g.out_edges(v):
            h = g.edges[e][1]
            layer[h] = max(layer[h], layer[v] + 1)
    last = max(layer.values(), default=0)
    if g.n_external >= 2:
        layer[g.n_external - 1] = max(last, 1)
    columns: dict[int, list[int]] = {}
    for v in g.vertex_ids():
        columns.setdefault(layer[v], []).append(v)
    pos = {}
    for x, members in columns.items():
        for i, v in enumerate(members):
            pos[v] = (float(x), i - (len(members) - 1) / 2)
    return pos


def draw_graph(ax, g: Graph, title: str = "") -> None:
    pos = layered_layout(g)
    multiplicity = Counter(g.edges)
    drawn: Counter = Counter()
    for t, h in g.edges:
        count = multiplicity[(t, h)]
        i = drawn[(t, h)]
        drawn[(t, h)] += 1
        rad = 0.0 if count == 1 else 0.35 * (i - (count - 1) / 2)
        ax.add_patch(FancyArrowPatch(pos[t], pos[h], arrowstyle="-|>", mutation_scale=10,
                                     connectionstyle=f"arc3,rad={rad}", shrinkA=9, shrinkB=9,
                                     lw=1.0, color="0.25"))
    for v, (x, y) in pos.items():
        if g.is_external(v):
            ax.plot(x, y, marker="s", ms=15, mfc="white", mec="black")
            ax.text(x, y, str(v + 1), ha="center", va="center", fontsize=8)
        else:
            ax.plot(x, y, marker="o", ms=15, mfc="#dde7f5", mec="#2b5d9c")
            ax.text(x, y, str(g.weight(v)), ha="center", va="center", fontsize=7)
    xs = [p[0] for p in pos.values()] or [0.0]
    ys = [p[1] for p in pos.values()] or [0.0]
    ax.set_xlim(min(xs) - 0.6, max(xs) + 0.6)
    ax.set_ylim(min(ys) - 0.8, max(ys) + 0.8)
    ax.set_aspect("equal")
    ax.axis("off")
    if title:
        ax.set_title(title, fontsize=8)


def graph_gallery(table: Sequence[tuple[Graph, int]], path: str | Path,
                  columns: int = 6, title: str = "") -> Path:
    """Grid of graph drawings, each captioned with 1/|Aut|."""
    n = max(len(table), 1)
    cols = min(columns, n)
    rows = math.ceil(n / cols)
    fig, axes = plt.subplots(rows, cols, figsize=(2.0 * cols, 1.8 * rows), squeeze=False)
    for ax in axes.flat:
        ax.axis("off")
    for ax, (g, aut) in zip(axes.flat, table):
        draw_graph(ax, g, "1" if aut == 1 else f"1/{aut}")
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def residual_chart(reports, path: str | Path) -> Path:
    """Log-scale residual per check, with its tolerance as a tick mark."""
    labels = [f"{r.name}\n" + ",".join(f"{v}" for v in r.parameters.values()) for r in reports]
    floor = 1e-18
    values = [max(r.max_residual, floor) for r in reports]
    fig, ax = plt.subplots(figsize=(max(6.0, 0.7 * len(reports)), 4.5))
    colors = ["#3c8d5a" if r.passed else "#c0392b" for r in reports]
    xs = range(len(reports))
    ax.bar(xs, values, color=colors)
    ax.scatter(xs, [max(r.tolerance, floor) for r in reports], marker="_", s=300,
               color="black", label="tolerance", zorder=3)
    ax.set_yscale("log")
    ax.set_xticks(list(xs))
    ax.set_xticklabels(labels, rotation=60, ha="right", fontsize=6)
    ax.set_ylabel("relative residual")
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
