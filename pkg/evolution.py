"""
Evolution graph, evolutionary patterns and pathways.

Lineage matrices are thresholded into a temporally layered DAG: an edge
(h, j) is admitted when its lineage strength is positive and either reaches
the absolute threshold theta_abs or ranks among the top_k targets of source h.
Patterns follow from in- and out-degrees; pathways are the maximal directed
paths, scored by the product of their lineage strengths.
"""

import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, List, Mapping, Sequence, Set, Tuple

import networkx as nx

from errors import ParameterError, ValidationError
from lineage import LineageMatrix
from themes import ClusterId, PeriodPartition, ThemeCluster, cluster_key

logger = logging.getLogger(__name__)

DEFAULT_THETA_ABS = 0.10
DEFAULT_TOP_K = 1
DEFAULT_MAX_PATHWAYS = 100_000


class Pattern(Enum):
    """Evolutionary role of a cluster in the evolution graph."""

    CONTINUATION = "continuation"
    SPLIT_SOURCE = "split-source"
    MERGE_TARGET = "merge-target"
    EMERGENT = "emergent"
    DISAPPEARING = "disappearing"

    @property
    def description(self) -> str:
        """Get description of this pattern."""
        descriptions = {
            Pattern.CONTINUATION: "One-to-one link: stable trajectory",
            Pattern.SPLIT_SOURCE: "More than one successor: differentiation",
            Pattern.MERGE_TARGET: "More than one predecessor: consolidation",
            Pattern.EMERGENT: "No significant predecessor",
            Pattern.DISAPPEARING: "No significant successor",
        }
        return descriptions[self]


@dataclass(frozen=True)
class LineageEdge:
    """Admitted evolutionary link between clusters of consecutive periods."""

    src: ClusterId
    dst: ClusterId
    weight: float
    iw: float = 0.0
    omega: float = 0.0


# ============================================================================
# Edge admission
# ============================================================================

def admit_edges(lm: LineageMatrix, theta_abs: float = DEFAULT_THETA_ABS,
                top_k: int = DEFAULT_TOP_K) -> List[LineageEdge]:
    """
    Apply the absolute and relative admission criteria to a lineage matrix.

    Ranks count only strictly positive strengths, ties broken by ascending
    target ordinal; zero-strength pairs are never admitted.

    Raises:
        ParameterError: If theta_abs lies outside [0, 1] or top_k < 1
    """
    if not 0.0 <= theta_abs <= 1.0:
        raise ParameterError(f"theta_abs must lie in [0, 1], got {theta_abs}")
    if top_k < 1:
        raise ParameterError(f"top_k must be >= 1, got {top_k}")

    edges: List[LineageEdge] = []
    for h, src in enumerate(lm.source_ids):
        row = lm.L[h]
        positive = sorted((j for j in range(len(row)) if row[j] > 0), key=lambda j: (-row[j], j))
        rank = {j: r for r, j in enumerate(positive, 1)}
        for j in sorted(positive):
            if row[j] >= theta_abs or rank[j] <= top_k:
                edges.append(LineageEdge(src, lm.target_ids[j], float(row[j]),
                                         float(lm.Iw[h, j]), float(lm.Omega[h, j])))
    return edges


# ============================================================================
# Evolution graph
# ============================================================================

@dataclass(frozen=True)
class EvolutionGraph:
    """
    Temporally stratified DAG of clusters.

    Every edge links period t to period t+1, which makes the graph acyclic.
    """

    clusters: Tuple[ThemeCluster, ...]
    edges: Tuple[LineageEdge, ...]
    n_periods: int
    theta_abs: float = DEFAULT_THETA_ABS
    top_k: int = DEFAULT_TOP_K
    alpha: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "clusters", tuple(sorted(self.clusters, key=lambda c: c.id)))
        object.__setattr__(self, "edges", tuple(sorted(self.edges, key=lambda e: (e.src, e.dst))))
        ids = {c.id for c in self.clusters}
        for e in self.edges:
            if e.src not in ids or e.dst not in ids:
                raise ValidationError(f"edge {e.src}->{e.dst} references an unknown cluster")
            if e.dst[0] != e.src[0] + 1:
                raise ValidationError(
                    f"edge {cluster_key(e.src)}->{cluster_key(e.dst)} does not join consecutive periods"
                )
            if not 0.0 < e.weight <= 1.0 + 1e-12:
                raise ValidationError(f"edge weight {e.weight} outside (0, 1]")

    def cluster(self, cluster_id: ClusterId) -> ThemeCluster:
        for c in self.clusters:
            if c.id == cluster_id:
                return c
        raise KeyError(cluster_id)

    def successors(self) -> Dict[ClusterId, List[LineageEdge]]:
        out: Dict[ClusterId, List[LineageEdge]] = defaultdict(list)
        for e in self.edges:
            out[e.src].append(e)
        return out

    def in_degree(self) -> Dict[ClusterId, int]:
        deg = {c.id: 0 for c in self.clusters}
        for e in self.edges:
            deg[e.dst] += 1
        return deg

    def out_degree(self) -> Dict[ClusterId, int]:
        deg = {c.id: 0 for c in self.clusters}
        for e in self.edges:
            deg[e.src] += 1
        return deg

    def edge_set(self) -> FrozenSet[Tuple[ClusterId, ClusterId]]:
        return frozenset((e.src, e.dst) for e in self.edges)

    def to_networkx(self) -> nx.DiGraph:
        g = nx.DiGraph()
        for c in self.clusters:
            g.add_node(c.id, cluster=c)
        for e in self.edges:
            g.add_edge(e.src, e.dst, weight=e.weight, iw=e.iw, omega=e.omega)
        return g


def build_evolution_graph(partitions: Sequence[PeriodPartition], matrices: Sequence[LineageMatrix],
                          theta_abs: float = DEFAULT_THETA_ABS,
                          top_k: int = DEFAULT_TOP_K) -> EvolutionGraph:
    """
    Assemble the evolution graph from per-period partitions and the lineage
    matrices of consecutive periods.
    """
    if len(matrices) != max(len(partitions) - 1, 0):
        raise ValidationError(
            f"expected {max(len(partitions) - 1, 0)} lineage matrices, got {len(matrices)}"
        )
    edges: List[LineageEdge] = []
    for lm in matrices:
        admitted = admit_edges(lm, theta_abs, top_k)
        logger.info("periods %d->%d: admitted %d of %d candidate links",
                    lm.source_period, lm.target_period, len(admitted), int((lm.L > 0).sum()))
        edges.extend(admitted)
    alpha = matrices[0].alpha if matrices else 0.5
    clusters = tuple(c for p in partitions for c in p.clusters)
    return EvolutionGraph(clusters, tuple(edges), len(partitions), theta_abs, top_k, alpha)


# ============================================================================
# Patterns
# ============================================================================

def classify_patterns(g: EvolutionGraph) -> Dict[ClusterId, FrozenSet[Pattern]]:
    """
    Label every cluster with all patterns that apply to it.

    Emergent labels are never given in the first period and disappearing
    labels never in the last, where the observation window censors them.
    """
    indeg, outdeg = g.in_degree(), g.out_degree()
    labels: Dict[ClusterId, Set[Pattern]] = {c.id: set() for c in g.clusters}
    last = g.n_periods - 1
    for e in g.edges:
        if outdeg[e.src] == 1 and indeg[e.dst] == 1:
            labels[e.src].add(Pattern.CONTINUATION)
            labels[e.dst].add(Pattern.CONTINUATION)
    for cid in labels:
        period = cid[0]
        if outdeg[cid] > 1:
            labels[cid].add(Pattern.SPLIT_SOURCE)
        if indeg[cid] > 1:
            labels[cid].add(Pattern.MERGE_TARGET)
        if indeg[cid] == 0 and period > 0:
            labels[cid].add(Pattern.EMERGENT)
        if outdeg[cid] == 0 and period < last:
            labels[cid].add(Pattern.DISAPPEARING)
    return {cid: frozenset(p) for cid, p in labels.items()}


def pattern_names(patterns: FrozenSet[Pattern]) -> List[str]:
    """Pattern values in declaration order."""
    return [p.value for p in Pattern if p in patterns]


# ============================================================================
# Pathways
# ============================================================================

@dataclass(frozen=True)
class Pathway:
    """A maximal directed path through the evolution graph."""

    clusters: Tuple[ClusterId, ...]
    strength: float
    cumulative_size: float

    @property
    def length(self) -> int:
        """Number of periods spanned."""
        return len(self.clusters)

    @property
    def trivial(self) -> bool:
        return len(self.clusters) == 1


@dataclass(frozen=True)
class PathwayReport:
    pathways: Tuple[Pathway, ...] = ()
    truncated: bool = False

    def __len__(self) -> int:
        return len(self.pathways)

    def __iter__(self):
        return iter(self.pathways)


def _make_pathway(path: Sequence[ClusterId], weights: Sequence[float],
                  sizes: Mapping[ClusterId, float]) -> Pathway:
    return Pathway(
        clusters=tuple(path),
        strength=math.prod(weights),
        cumulative_size=math.fsum(sizes[c] for c in path),
    )


def _sort_key(p: Pathway):
    return (-p.strength, -p.cumulative_size, p.clusters)


def _greedy_pathways(roots: Sequence[ClusterId], succ: Mapping[ClusterId, List[LineageEdge]],
                     sizes: Mapping[ClusterId, float]) -> List[Pathway]:
    paths = []
    for root in roots:
        path, weights = [root], []
        while succ.get(path[-1]):
            best = min(succ[path[-1]], key=lambda e: (-e.weight, e.dst))
            path.append(best.dst)
            weights.append(best.weight)
        paths.append(_make_pathway(path, weights, sizes))
    return paths


def extract_pathways(g: EvolutionGraph, max_paths: int = DEFAULT_MAX_PATHWAYS) -> PathwayReport:
    """
    Enumerate all maximal pathways by depth-first traversal from the roots.

    If more than ``max_paths`` pathways exist, only the greedy strongest-edge
    path from every root is returned and the report is flagged as truncated.

    Returns:
        Pathways sorted by descending strength, then descending cumulative size
    """
    if max_paths < 1:
        raise ParameterError(f"max_paths must be >= 1, got {max_paths}")
    succ = {cid: sorted(edges, key=lambda e: e.dst) for cid, edges in g.successors().items()}
    indeg = g.in_degree()
    sizes = {c.id: c.fuzzy_size for c in g.clusters}
    roots = [c.id for c in g.clusters if indeg[c.id] == 0]

    found: List[Pathway] = []
    truncated = False
    stack: List[Tuple[List[ClusterId], List[float]]] = [([r], []) for r in reversed(roots)]
    while stack:
        path, weights = stack.pop()
        nexts = succ.get(path[-1])
        if not nexts:
            found.append(_make_pathway(path, weights, sizes))
            if len(found) > max_paths:
                truncated = True
                break
            continue
        for e in reversed(nexts):
            stack.append((path + [e.dst], weights + [e.weight]))

    if truncated:
        logger.warning("more than %d pathways; falling back to greedy strongest-edge expansion", max_paths)
        found = _greedy_pathways(roots, succ, sizes)
    return PathwayReport(tuple(sorted(found, key=_sort_key)), truncated)
