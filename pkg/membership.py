"""
Fuzzy document-to-cluster membership.

A document's similarity to a cluster sums, over the terms they share, the
term's within-cluster PageRank divided by its period document frequency:

    s_ih = sum_{k in K(d_i) & K(C_h)} PR_k(C_h) / freq_k

Rows are normalised into memberships u_ih = s_ih / sum_j s_ij; a document
with zero similarity to every cluster gets the uniform row 1/n_t. The fuzzy
size of a cluster is the column sum of its memberships.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Dict, Mapping, Sequence, Tuple, Union

import numpy as np

from corpus import Document
from coword import TermStats
from errors import EmptyPartitionError, ValidationError
from themes import ClusterId, PeriodPartition, ThemeCluster

logger = logging.getLogger(__name__)

ROW_TOLERANCE = 1e-9

Frequencies = Union[Mapping[str, int], Sequence[TermStats]]


def _frequencies(stats: Frequencies) -> Mapping[str, int]:
    if isinstance(stats, Mapping):
        return stats
    return {s.term: s.occurrence for s in stats}


@dataclass(frozen=True, eq=False)
class MembershipMatrix:
    """Row-stochastic document-by-cluster membership matrix of one period."""

    period: int
    doc_ids: Tuple[str, ...]
    cluster_ids: Tuple[ClusterId, ...]
    u: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "doc_ids", tuple(self.doc_ids))
        object.__setattr__(self, "cluster_ids", tuple(self.cluster_ids))
        u = np.array(self.u, dtype=np.float64)
        u.setflags(write=False)
        object.__setattr__(self, "u", u)
        if u.shape != (len(self.doc_ids), len(self.cluster_ids)):
            raise ValidationError(
                f"membership shape {u.shape} does not match "
                f"{len(self.doc_ids)} documents x {len(self.cluster_ids)} clusters"
            )
        if u.size and (u.min() < 0 or not np.allclose(u.sum(axis=1), 1.0, rtol=0, atol=ROW_TOLERANCE)):
            raise ValidationError("membership rows must be non-negative and sum to 1")

    def row(self, doc_id: str) -> np.ndarray:
        return self.u[self.doc_ids.index(doc_id)]


def similarity(doc: Document, cluster: ThemeCluster, stats: Frequencies) -> float:
    """
    PageRank-weighted similarity of a document to a cluster.

    Document terms missing from the retained vocabulary contribute nothing.
    """
    freq = _frequencies(stats)
    shared = sorted(doc.terms & cluster.terms)
    return math.fsum(cluster.pagerank.get(k, 0.0) / freq[k] for k in shared if freq.get(k, 0) > 0)


def build_membership(docs: Sequence[Document], partition: PeriodPartition,
                     stats: Frequencies) -> MembershipMatrix:
    """
    Membership matrix of the documents over the partition's clusters.

    Raises:
        EmptyPartitionError: If the partition has no cluster
    """
    n_clusters = len(partition)
    if n_clusters == 0:
        raise EmptyPartitionError(f"period {partition.period} has no clusters")
    freq = _frequencies(stats)

    s = np.array([[similarity(doc, c, freq) for c in partition.clusters] for doc in docs],
                 dtype=np.float64).reshape(len(docs), n_clusters)
    totals = s.sum(axis=1)
    u = np.full_like(s, 1.0 / n_clusters)
    supported = totals > 0
    u[supported] = s[supported] / totals[supported][:, np.newaxis]

    uniform = int((~supported).sum())
    if uniform:
        logger.info("period %d: %d documents without similarity get uniform membership",
                    partition.period, uniform)
    return MembershipMatrix(
        period=partition.period,
        doc_ids=tuple(doc.id for doc in docs),
        cluster_ids=tuple(c.id for c in partition.clusters),
        u=u,
    )


def fuzzy_sizes(m: MembershipMatrix) -> Dict[ClusterId, float]:
    """Fuzzy cardinality of each cluster: the column sums of the membership matrix."""
    sizes = m.u.sum(axis=0)
    return {cid: float(size) for cid, size in zip(m.cluster_ids, sizes)}


def apply_fuzzy_sizes(partition: PeriodPartition, sizes: Mapping[ClusterId, float]) -> PeriodPartition:
    return partition.with_clusters([replace(c, fuzzy_size=sizes.get(c.id, 0.0)) for c in partition.clusters])
