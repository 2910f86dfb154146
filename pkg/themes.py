"""
Theme detection on period co-word networks.

Each period network is partitioned with Louvain modularity maximisation,
clusters with negligible cumulative term frequency are dropped, every
remaining cluster gets a weighted PageRank vector computed on its induced
subgraph, and the strategic-diagram coordinates are derived:

- centrality: sum of the weights of edges with exactly one endpoint in the cluster
- density: 100 * (sum of intra-cluster edge weights) / (number of cluster terms)

Quadrants use the period median (or mean) of centrality and density as axis
origins; values equal to the origin count as "high".
"""

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from coword import CowordNetwork, TermStats
from errors import ParameterError, ValidationError

logger = logging.getLogger(__name__)

ClusterId = Tuple[int, int]

DEFAULT_RESOLUTION = 1.0
DEFAULT_SEED = 42
DEFAULT_DAMPING = 0.85
DEFAULT_TOLERANCE = 1e-10
DEFAULT_MAX_ITERATIONS = 1000
DEFAULT_MIN_CUMULATIVE_FREQ = 10
MODULARITY_THRESHOLD = 1e-9


# ============================================================================
# Strategic diagram quadrants
# ============================================================================

class Quadrant(Enum):
    """Position of a theme in the strategic diagram."""

    MOTOR = "motor"
    BASIC = "basic"
    NICHE = "niche"
    EMERGING_OR_DECLINING = "emerging-or-declining"

    @property
    def description(self) -> str:
        """Get description of this quadrant."""
        descriptions = {
            Quadrant.MOTOR: "High centrality, high density: well developed and central",
            Quadrant.BASIC: "High centrality, low density: basic and transversal",
            Quadrant.NICHE: "Low centrality, high density: specialised and peripheral",
            Quadrant.EMERGING_OR_DECLINING: "Low centrality, low density: weakly developed and marginal",
        }
        return descriptions[self]


class AxisOrigin(Enum):
    """Statistic used as the strategic-diagram axis origin."""

    MEDIAN = "median"
    MEAN = "mean"


# ============================================================================
# Domain types
# ============================================================================

def cluster_key(cluster_id: ClusterId) -> str:
    """Human-readable cluster identifier, 1-based (e.g. 'P1-C3')."""
    period, ordinal = cluster_id
    return f"P{period + 1}-C{ordinal + 1}"


@dataclass(frozen=True)
class ThemeCluster:
    """
    A thematic cluster: a community of terms in one period's network.

    ``pagerank`` holds the within-cluster PageRank of every term;
    ``fuzzy_size`` is filled once document memberships are known.
    """

    period: int
    ordinal: int
    terms: FrozenSet[str]
    pagerank: Mapping[str, float] = field(default_factory=dict)
    centrality: float = 0.0
    density: float = 0.0
    label: str = ""
    fuzzy_size: float = 0.0
    quadrant: Optional[Quadrant] = None

    def __post_init__(self):
        if not isinstance(self.terms, frozenset):
            object.__setattr__(self, "terms", frozenset(self.terms))
        if not self.terms:
            raise ValidationError("a cluster needs at least one term")

    @property
    def id(self) -> ClusterId:
        return (self.period, self.ordinal)

    @property
    def key(self) -> str:
        return cluster_key(self.id)

    @property
    def pagerank_total(self) -> float:
        """Sum of the PageRank scores of the cluster's terms."""
        return math.fsum(self.pagerank.values())

    def top_terms(self, n: Optional[int] = None) -> List[Tuple[str, float]]:
        """Terms by descending PageRank, ties lexicographic."""
        ranked = sorted(((t, self.pagerank.get(t, 0.0)) for t in self.terms),
                        key=lambda item: (-item[1], item[0]))
        return ranked if n is None else ranked[:n]


@dataclass(frozen=True)
class PeriodPartition:
    """Retained clusters of one period and the terms lost to cluster filtering."""

    period: int
    clusters: Tuple[ThemeCluster, ...] = ()
    dropped_terms: FrozenSet[str] = frozenset()
    modularity: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "clusters", tuple(self.clusters))
        object.__setattr__(self, "dropped_terms", frozenset(self.dropped_terms))
        seen = set()
        for c in self.clusters:
            if c.period != self.period:
                raise ValidationError(f"cluster {c.key} does not belong to period {self.period}")
            overlap = seen & c.terms
            if overlap:
                raise ValidationError(f"terms {sorted(overlap)} appear in more than one cluster")
            seen |= c.terms

    def __len__(self) -> int:
        return len(self.clusters)

    def cluster(self, ordinal: int) -> ThemeCluster:
        return self.clusters[ordinal]

    @property
    def terms(self) -> FrozenSet[str]:
        return frozenset().union(*(c.terms for c in self.clusters)) if self.clusters else frozenset()

    def with_clusters(self, clusters: Sequence[ThemeCluster]) -> "PeriodPartition":
        return replace(self, clusters=tuple(clusters))


# ============================================================================
# Community detection
# ============================================================================

def detect_communities(net: CowordNetwork, resolution: float = DEFAULT_RESOLUTION,
                       seed: int = DEFAULT_SEED) -> List[FrozenSet[str]]:
    """
    Louvain communities of a co-word network.

    Nodes enter the graph in lexicographic order and networkx shuffles them
    with the given seed, so the result is deterministic for fixed input.

    Returns:
        Disjoint term sets covering all nodes, largest first (ties by smallest term)
    """
    if resolution <= 0:
        raise ParameterError(f"resolution must be > 0, got {resolution}")
    if len(net) == 0:
        return []
    g = net.to_networkx()
    communities = nx.community.louvain_communities(
        g, weight="weight", resolution=resolution, threshold=MODULARITY_THRESHOLD, seed=seed
    )
    return sorted((frozenset(c) for c in communities), key=lambda c: (-len(c), min(c)))


def modularity_of(net: CowordNetwork, communities: Sequence[FrozenSet[str]],
                  resolution: float = DEFAULT_RESOLUTION) -> float:
    """Weighted modularity of a partition of the network's terms (0 for edgeless graphs)."""
    g = net.to_networkx()
    if g.size(weight="weight") == 0:
        return 0.0
    return float(nx.community.modularity(g, [set(c) for c in communities],
                                         weight="weight", resolution=resolution))


def filter_clusters(partition: Sequence[FrozenSet[str]], stats: Sequence[TermStats],
                    min_cumulative_freq: int = DEFAULT_MIN_CUMULATIVE_FREQ,
                    period: int = 0) -> PeriodPartition:
    """
    Drop clusters whose summed term occurrences fall below the threshold.

    Retained clusters are numbered by descending cumulative frequency (ties by
    smallest term), which fixes their ordinals across runs.
    """
    occ = {s.term: s.occurrence for s in stats}
    kept: List[Tuple[int, FrozenSet[str]]] = []
    dropped: set = set()
    for community in partition:
        total = sum(occ.get(t, 0) for t in community)
        if total >= min_cumulative_freq:
            kept.append((total, frozenset(community)))
        else:
            dropped |= community
    if partition and not kept:
        logger.warning("period %d: all %d clusters filtered out (threshold %d)",
                       period, len(partition), min_cumulative_freq)
    kept.sort(key=lambda item: (-item[0], min(item[1])))
    clusters = tuple(ThemeCluster(period, ordinal, terms) for ordinal, (_, terms) in enumerate(kept))
    return PeriodPartition(period, clusters, frozenset(dropped))


# ============================================================================
# Centrality
# ============================================================================

def cluster_pagerank(net: CowordNetwork, cluster, damping: float = DEFAULT_DAMPING,
                     tol: float = DEFAULT_TOLERANCE,
                     max_iter: int = DEFAULT_MAX_ITERATIONS) -> Dict[str, float]:
    """
    Weighted PageRank of a cluster's terms on the cluster-induced subgraph.

    Teleportation is uniform over the cluster terms and dangling nodes spread
    their mass uniformly, so the scores sum to 1.

    Args:
        net: Period network
        cluster: Term set of the cluster
        damping: Damping factor in (0, 1)
        tol: Convergence tolerance
        max_iter: Maximum number of power iterations

    Raises:
        ParameterError: For an empty cluster, invalid damping, or no convergence
    """
    terms = sorted(cluster)
    if not terms:
        raise ParameterError("cannot rank an empty cluster")
    if not 0.0 < damping < 1.0:
        raise ParameterError(f"damping must lie in (0, 1), got {damping}")
    if len(terms) == 1:
        return {terms[0]: 1.0}
    sub = net.subgraph(terms)
    try:
        scores = nx.pagerank(sub, alpha=damping, tol=tol, max_iter=max_iter, weight="weight")
    except nx.PowerIterationFailedConvergence as e:
        raise ParameterError(f"PageRank did not converge in {max_iter} iterations") from e
    return {t: float(scores[t]) for t in terms}


def rank_clusters(net: CowordNetwork, partition: PeriodPartition, damping: float = DEFAULT_DAMPING,
                  tol: float = DEFAULT_TOLERANCE,
                  max_iter: int = DEFAULT_MAX_ITERATIONS) -> PeriodPartition:
    """Fill every cluster's PageRank vector."""
    return partition.with_clusters([
        replace(c, pagerank=cluster_pagerank(net, c.terms, damping, tol, max_iter))
        for c in partition.clusters
    ])


def strategic_metrics(net: CowordNetwork, partition: PeriodPartition) -> PeriodPartition:
    """
    Fill centrality, density and label of every cluster.

    The label is the term with the highest within-cluster PageRank (ties
    lexicographic); clusters without PageRank fall back to their smallest term.
    """
    owner = {t: i for i, c in enumerate(partition.clusters) for t in c.terms}
    external = np.zeros(len(partition))
    internal = np.zeros(len(partition))
    for a, b, e in net.iter_edges():
        ca, cb = owner.get(a), owner.get(b)
        if ca is not None and ca == cb:
            internal[ca] += e.weight
            continue
        if ca is not None:
            external[ca] += e.weight
        if cb is not None:
            external[cb] += e.weight

    clusters = []
    for i, c in enumerate(partition.clusters):
        label = c.top_terms(1)[0][0] if c.pagerank else min(c.terms)
        clusters.append(replace(
            c,
            centrality=float(external[i]),
            density=float(100.0 * internal[i] / len(c.terms)),
            label=label,
        ))
    return partition.with_clusters(clusters)


def strategic_coordinates(partitions: Sequence[PeriodPartition],
                          origin: AxisOrigin = AxisOrigin.MEDIAN) -> Dict[ClusterId, Quadrant]:
    """
    Assign strategic-diagram quadrants, period by period.

    Values equal to the axis origin count as high.
    """
    origin = AxisOrigin(origin)
    stat = np.median if origin is AxisOrigin.MEDIAN else np.mean
    quadrants: Dict[ClusterId, Quadrant] = {}
    for partition in partitions:
        if not partition.clusters:
            continue
        c0 = float(stat([c.centrality for c in partition.clusters]))
        d0 = float(stat([c.density for c in partition.clusters]))
        for c in partition.clusters:
            high_c = c.centrality >= c0
            high_d = c.density >= d0
            if high_c and high_d:
                quadrants[c.id] = Quadrant.MOTOR
            elif high_c:
                quadrants[c.id] = Quadrant.BASIC
            elif high_d:
                quadrants[c.id] = Quadrant.NICHE
            else:
                quadrants[c.id] = Quadrant.EMERGING_OR_DECLINING
    return quadrants


def apply_quadrants(partition: PeriodPartition, quadrants: Mapping[ClusterId, Quadrant]) -> PeriodPartition:
    return partition.with_clusters([replace(c, quadrant=quadrants.get(c.id)) for c in partition.clusters])
