"""
Lineage between clusters of consecutive periods.

For a source cluster C_h (period t) and a target cluster C_j (period t+1)
with shared terms S = K(C_h) & K(C_j):

- weighted inclusion  I_w = sum_{k in S} PR_k(C_h) / PR_tot(C_h)            (directional)
- importance index    Omega = sqrt(sum_{k in S} PR_k(C_h) PR_k(C_j)
                                   / (PR_tot(C_h) PR_tot(C_j)))             (symmetric)
- lineage strength    L = alpha * I_w + (1 - alpha) * Omega

The classical inclusion index |A & B| / min(|A|, |B|) and the period-level
term overlap are provided as set-theoretic baselines.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Mapping, Tuple

import numpy as np

from errors import ParameterError
from themes import ClusterId, PeriodPartition, ThemeCluster

logger = logging.getLogger(__name__)

DEFAULT_ALPHA = 0.5
SENSITIVITY_ALPHAS = (0.3, 0.5, 0.7)


def _check_alpha(alpha: float) -> None:
    if not 0.0 <= alpha <= 1.0:
        raise ParameterError(f"alpha must lie in [0, 1], got {alpha}")


def _check_mass(cluster: ThemeCluster) -> float:
    total = cluster.pagerank_total
    if total <= 0:
        raise ParameterError(f"cluster {cluster.key} has no PageRank mass")
    return total


# ============================================================================
# Pairwise measures
# ============================================================================

def shared_terms(src: ThemeCluster, dst: ThemeCluster) -> FrozenSet[str]:
    """Terms common to both clusters."""
    return src.terms & dst.terms


def weighted_inclusion(src: ThemeCluster, dst: ThemeCluster) -> float:
    """
    Share of the source cluster's PageRank mass carried by shared terms.

    Equals 1 exactly when every source term survives in the target.

    Raises:
        ParameterError: If the source has no PageRank mass
    """
    total = _check_mass(src)
    shared = shared_terms(src, dst)
    if shared == src.terms:
        return 1.0
    return math.fsum(src.pagerank[k] for k in shared) / total


def importance_index(src: ThemeCluster, dst: ThemeCluster) -> float:
    """
    Centrality-weighted overlap of two clusters; symmetric in its arguments.

    Raises:
        ParameterError: If either cluster has no PageRank mass
    """
    total = _check_mass(src) * _check_mass(dst)
    shared = shared_terms(src, dst)
    products = math.fsum(src.pagerank[k] * dst.pagerank[k] for k in shared)
    return math.sqrt(products / total)


def lineage_strength(src: ThemeCluster, dst: ThemeCluster, alpha: float = DEFAULT_ALPHA) -> float:
    """
    Blend of weighted inclusion and importance index.

    Raises:
        ParameterError: If alpha lies outside [0, 1]
    """
    _check_alpha(alpha)
    return alpha * weighted_inclusion(src, dst) + (1.0 - alpha) * importance_index(src, dst)


# ============================================================================
# Lineage matrix
# ============================================================================

@dataclass(frozen=True, eq=False)
class LineageMatrix:
    """
    Lineage measures between all cluster pairs of periods t and t+1.

    Rows follow ``source_ids``, columns ``target_ids``.
    """

    source_period: int
    target_period: int
    alpha: float
    source_ids: Tuple[ClusterId, ...]
    target_ids: Tuple[ClusterId, ...]
    L: np.ndarray
    Iw: np.ndarray
    Omega: np.ndarray
    shared: Mapping[Tuple[int, int], FrozenSet[str]] = field(default_factory=dict)

    def __post_init__(self):
        for name in ("L", "Iw", "Omega"):
            arr = np.array(getattr(self, name), dtype=np.float64).reshape(
                len(self.source_ids), len(self.target_ids))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.L.shape

    def is_empty(self) -> bool:
        return self.L.size == 0

    def entries(self) -> List[Dict]:
        """All cluster pairs in row-major order."""
        rows = []
        for h, src in enumerate(self.source_ids):
            for j, dst in enumerate(self.target_ids):
                rows.append({
                    "src": src,
                    "dst": dst,
                    "L": float(self.L[h, j]),
                    "Iw": float(self.Iw[h, j]),
                    "Omega": float(self.Omega[h, j]),
                    "shared_terms": sorted(self.shared.get((h, j), ())),
                })
        return rows


def build_lineage_matrix(src_partition: PeriodPartition, dst_partition: PeriodPartition,
                         alpha: float = DEFAULT_ALPHA) -> LineageMatrix:
    """
    Evaluate every (source, target) cluster pair of two consecutive periods.

    An empty partition on either side yields an empty matrix and a warning.

    Raises:
        ParameterError: If alpha lies outside [0, 1]
    """
    _check_alpha(alpha)
    n_src, n_dst = len(src_partition), len(dst_partition)
    iw = np.zeros((n_src, n_dst))
    omega = np.zeros((n_src, n_dst))
    shared: Dict[Tuple[int, int], FrozenSet[str]] = {}
    if n_src == 0 or n_dst == 0:
        logger.warning("empty lineage matrix between periods %d and %d (%d x %d clusters)",
                       src_partition.period, dst_partition.period, n_src, n_dst)
    for h, src in enumerate(src_partition.clusters):
        for j, dst in enumerate(dst_partition.clusters):
            common = shared_terms(src, dst)
            if not common:
                continue
            shared[(h, j)] = common
            iw[h, j] = weighted_inclusion(src, dst)
            omega[h, j] = importance_index(src, dst)
    return LineageMatrix(
        source_period=src_partition.period,
        target_period=dst_partition.period,
        alpha=alpha,
        source_ids=tuple(c.id for c in src_partition.clusters),
        target_ids=tuple(c.id for c in dst_partition.clusters),
        L=alpha * iw + (1.0 - alpha) * omega,
        Iw=iw,
        Omega=omega,
        shared=shared,
    )


# ============================================================================
# Set-theoretic baselines
# ============================================================================

def classical_inclusion(src: FrozenSet[str], dst: FrozenSet[str]) -> float:
    """
    Classical inclusion index |src & dst| / min(|src|, |dst|).

    Raises:
        ParameterError: If src is empty
    """
    if not src:
        raise ParameterError("classical inclusion needs a non-empty source set")
    if not dst:
        return 0.0
    return len(src & dst) / min(len(src), len(dst))


def classical_inclusion_matrix(src_partition: PeriodPartition, dst_partition: PeriodPartition) -> np.ndarray:
    """Classical inclusion index of every cluster pair of two consecutive periods."""
    out = np.zeros((len(src_partition), len(dst_partition)))
    for h, src in enumerate(src_partition.clusters):
        for j, dst in enumerate(dst_partition.clusters):
            out[h, j] = classical_inclusion(src.terms, dst.terms)
    return out


@dataclass(frozen=True)
class PeriodOverlap:
    """
    Term overlap between two adjacent periods.

    ``index`` is the Jaccard index; ``source_share`` normalises by the
    earlier period's vocabulary instead.
    """

    shared: int
    index: float
    source_share: float


def period_overlap(terms_t: FrozenSet[str], terms_t1: FrozenSet[str]) -> PeriodOverlap:
    """Shared-term count and overlap indices of two period vocabularies."""
    shared = len(terms_t & terms_t1)
    union = len(terms_t | terms_t1)
    return PeriodOverlap(
        shared=shared,
        index=shared / union if union else 0.0,
        source_share=shared / len(terms_t) if terms_t else 0.0,
    )
