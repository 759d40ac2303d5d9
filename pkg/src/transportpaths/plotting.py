"""Static figures: networks drawn from their coordinates and matrix heatmaps."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

from matplotlib.figure import Figure
from matplotlib.patches import FancyArrowPatch

from .core import EdgeChain, TransportNetwork, format_fraction
from .stairs import NotStairShaped, is_stair_shaped

SOURCE_COLOR = "#1f77b4"
TARGET_COLOR = "#d62728"
JUNCTION_COLOR = "#7f7f7f"


def _xy(network: TransportNetwork, v: int) -> tuple[float, float]:
    c = network.point(v).coords
    return float(c[0]), float(c[1]) if len(c) > 1 else 0.0


def draw_network(ax, network: TransportNetwork, chain: EdgeChain | None = None, *, title: str | None = None, color: str = "black") -> None:
    """Draw ``chain`` (default: the whole network) with widths proportional to |coefficient|."""
    chain = network.chain() if chain is None else chain
    top = max((abs(c) for _, c in chain.items()), default=1) or 1
    for k, c in chain.items():
        e = network.edges[k]
        a, b = (e.tail, e.head) if c > 0 else (e.head, e.tail)
        width = 0.8 + 4.0 * float(abs(c) / top)
        ax.add_patch(
            FancyArrowPatch(
                _xy(network, a), _xy(network, b), arrowstyle="-|>", mutation_scale=10 + 2 * width,
                linewidth=width, color=color, alpha=0.75, shrinkA=6, shrinkB=6,
            )
        )
        (x0, y0), (x1, y1) = _xy(network, a), _xy(network, b)
        ax.annotate(format_fraction(abs(c)), ((x0 + x1) / 2, (y0 + y1) / 2), fontsize=7, color="#444444")
    src, tgt = set(network.sources), set(network.targets)
    for p in network.vertices:
        x, y = _xy(network, p.id)
        colour = SOURCE_COLOR if p.id in src else TARGET_COLOR if p.id in tgt else JUNCTION_COLOR
        size = 40 if p.id in src | tgt else 12
        ax.scatter([x], [y], s=size, color=colour, zorder=3)
        if p.id in src | tgt or network.label(p.id) != str(p.id):
            ax.annotate(network.label(p.id), (x, y), xytext=(4, 4), textcoords="offset points", fontsize=8)
    ax.set_aspect("equal", adjustable="datalim")
    ax.autoscale_view()
    ax.margins(0.12)
    ax.set_xticks([])
    ax.set_yticks([])
    if title:
        ax.set_title(title, fontsize=10)


def network_figure(network: TransportNetwork, chain: EdgeChain | None = None, title: str | None = None) -> Figure:
    fig = Figure(figsize=(6, 4.5), layout="constrained")
    draw_network(fig.add_subplot(), network, chain, title=title)
    return fig


def parts_figure(network: TransportNetwork, parts: Sequence[tuple[str, EdgeChain]]) -> Figure:
    """One panel per part, skipping empty chains."""
    shown = [(label, c) for label, c in parts if not c.is_zero()] or [("T", network.chain())]
    cols = min(3, len(shown))
    rows = -(-len(shown) // cols)
    fig = Figure(figsize=(4.5 * cols, 3.8 * rows), layout="constrained")
    for k, (label, chain) in enumerate(shown):
        draw_network(fig.add_subplot(rows, cols, k + 1), network, chain, title=label)
    return fig


def draw_matrix(ax, matrix, row_labels: Sequence[str] | None = None, col_labels: Sequence[str] | None = None, *, title: str | None = None, staircase: bool = True) -> None:
    """Heatmap with entry annotations; overlays the staircase when one exists."""
    data = [[float(x) for x in row] for row in matrix]
    m, n = len(data), len(data[0]) if data else 0
    top = max((x for row in data for x in row), default=0.0) or 1.0
    ax.imshow(data, cmap="Blues", vmin=0, vmax=top)
    for i in range(m):
        for j in range(n):
            if matrix[i][j]:
                shade = "white" if data[i][j] > 0.6 * top else "black"
                ax.text(j, i, format_fraction(matrix[i][j]), ha="center", va="center", fontsize=8, color=shade)
    ax.set_xticks(range(n), labels=list(col_labels) if col_labels else [f"y{j + 1}" for j in range(n)])
    ax.set_yticks(range(m), labels=list(row_labels) if row_labels else [f"x{i + 1}" for i in range(m)])
    ax.tick_params(labelsize=7)
    if staircase and m and n:
        profile = is_stair_shaped(matrix)
        if not isinstance(profile, NotStairShaped):
            js = [j for _, j in profile.positions]
            is_ = [i for i, _ in profile.positions]
            ax.plot(js, is_, color="#ff7f0e", linewidth=1.2, alpha=0.8)
    if title:
        ax.set_title(title, fontsize=10)


def matrices_figure(panels: Sequence[tuple[str, object]], row_labels=None, col_labels=None) -> Figure:
    fig = Figure(figsize=(4.2 * len(panels), 4.0), layout="constrained")
    for k, (title, M) in enumerate(panels):
        draw_matrix(fig.add_subplot(1, len(panels), k + 1), M, row_labels, col_labels, title=title)
    return fig


def save(fig: Figure, path: str | Path, dpi: int = 120) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=dpi)
    return path
