"""
Static SVG rendering of strategic diagrams and the thematic evolution plot.

Layouts are fixed: in the evolution plot periods sit on the horizontal axis
and each period's clusters are stacked by descending fuzzy size; node area
follows fuzzy cardinality and edge width follows lineage strength. The
strongest non-trivial pathways get distinct colours.
"""

from typing import Dict, List, Mapping, Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from evolution import EvolutionGraph, PathwayReport  # noqa: E402
from themes import ClusterId, PeriodPartition, Quadrant  # noqa: E402

PATHWAY_COLORS = ["#e41a1c", "#377eb8", "#4daf4a", "#984ea3", "#ff7f00", "#a65628", "#f781bf"]
BASE_COLOR = "#999999"
SVG_METADATA = {"Date": None, "Creator": "themeflow"}

QUADRANT_COLORS = {
    Quadrant.MOTOR: "#1b9e77",
    Quadrant.BASIC: "#377eb8",
    Quadrant.NICHE: "#d95f02",
    Quadrant.EMERGING_OR_DECLINING: "#999999",
}


def _save(fig, path: str) -> None:
    with matplotlib.rc_context({"svg.hashsalt": "themeflow", "svg.fonttype": "none"}):
        fig.savefig(path, format="svg", metadata=SVG_METADATA, bbox_inches="tight")
    plt.close(fig)


def _radius_scale(sizes: Sequence[float], max_area: float = 2000.0) -> List[float]:
    peak = max(sizes) if sizes else 0.0
    if peak <= 0:
        return [60.0 for _ in sizes]
    return [60.0 + max_area * s / peak for s in sizes]


def render_strategic_diagram(partition: PeriodPartition, path: str,
                             origin: Optional[Dict[str, float]] = None,
                             title: Optional[str] = None) -> None:
    """
    Scatter clusters by centrality (x) and density (y).

    Args:
        partition: Clusters with metrics, quadrants and fuzzy sizes
        path: Output SVG file
        origin: Axis origin {'centrality': c0, 'density': d0} drawn as guide lines
        title: Plot title
    """
    fig, ax = plt.subplots(figsize=(7, 6))
    clusters = partition.clusters
    if clusters:
        xs = [c.centrality for c in clusters]
        ys = [c.density for c in clusters]
        colors = [QUADRANT_COLORS.get(c.quadrant, BASE_COLOR) for c in clusters]
        ax.scatter(xs, ys, s=_radius_scale([c.fuzzy_size for c in clusters]),
                   c=colors, alpha=0.6, edgecolors="black", linewidths=0.5)
        for c, x, y in zip(clusters, xs, ys):
            ax.annotate(c.label, (x, y), ha="center", va="center", fontsize=8)
    if origin:
        ax.axvline(origin["centrality"], color="grey", linestyle="--", linewidth=0.8)
        ax.axhline(origin["density"], color="grey", linestyle="--", linewidth=0.8)
    ax.set_xlabel("Centrality")
    ax.set_ylabel("Density")
    ax.set_title(title or f"Strategic diagram, period {partition.period + 1}")
    _save(fig, path)


def node_positions(g: EvolutionGraph) -> Dict[ClusterId, tuple]:
    """x = period, y = rank by descending fuzzy size within the period (top = largest)."""
    positions: Dict[ClusterId, tuple] = {}
    for period in range(g.n_periods):
        layer = sorted((c for c in g.clusters if c.period == period),
                       key=lambda c: (-c.fuzzy_size, c.ordinal))
        for rank, c in enumerate(layer):
            positions[c.id] = (period, -rank)
    return positions


def render_evolution_plot(g: EvolutionGraph, path: str, pathways: Optional[PathwayReport] = None,
                          period_labels: Optional[Sequence[str]] = None,
                          highlight: int = len(PATHWAY_COLORS)) -> None:
    """Draw the layered evolution graph."""
    pos = node_positions(g)
    edge_color: Mapping = {}
    if pathways is not None:
        colored = {}
        strong = [p for p in pathways.pathways if not p.trivial][:highlight]
        for color, p in zip(PATHWAY_COLORS, strong):
            for a, b in zip(p.clusters, p.clusters[1:]):
                colored.setdefault((a, b), color)
        edge_color = colored

    fig, ax = plt.subplots(figsize=(3 + 3 * max(g.n_periods, 1), 6))
    for e in g.edges:
        (x0, y0), (x1, y1) = pos[e.src], pos[e.dst]
        ax.plot([x0, x1], [y0, y1], color=edge_color.get((e.src, e.dst), BASE_COLOR),
                linewidth=0.5 + 8.0 * e.weight, alpha=0.6, solid_capstyle="round", zorder=1)
    if g.clusters:
        xs = [pos[c.id][0] for c in g.clusters]
        ys = [pos[c.id][1] for c in g.clusters]
        ax.scatter(xs, ys, s=_radius_scale([c.fuzzy_size for c in g.clusters]),
                   color="#dddddd", edgecolors="black", linewidths=0.5, zorder=2)
        for c, x, y in zip(g.clusters, xs, ys):
            ax.annotate(c.label, (x, y), ha="center", va="center", fontsize=8, zorder=3)
    labels = list(period_labels) if period_labels else [f"P{i + 1}" for i in range(g.n_periods)]
    ax.set_xticks(range(g.n_periods))
    ax.set_xticklabels(labels)
    ax.set_yticks([])
    ax.set_xlim(-0.5, g.n_periods - 0.5)
    for side in ("left", "right", "top"):
        ax.spines[side].set_visible(False)
    ax.set_title("Thematic evolution")
    _save(fig, path)
