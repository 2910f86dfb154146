"""
Period-wise co-word networks.

For one period, terms are counted at document level, filtered by a minimum
occurrence and a top-N cap, and linked by their co-occurrence counts
normalised with the association (equivalence) index

    w_ij = c_ij / sqrt(c_ii * c_jj)

where c_ij is the number of documents containing both terms and c_ii the
number of documents containing term i.
"""

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Mapping, Sequence, Tuple

import networkx as nx
import numpy as np

from corpus import Corpus
from errors import ParameterError, ValidationError

logger = logging.getLogger(__name__)

TermPair = Tuple[str, str]


@dataclass(frozen=True)
class TermStats:
    """Document frequency of a term within one period."""

    term: str
    occurrence: int


@dataclass(frozen=True)
class CowordEdge:
    """Co-occurrence count and association-index weight of a term pair."""

    cooccurrence: int
    weight: float


def pair_key(a: str, b: str) -> TermPair:
    """Canonical (sorted) key of an undirected term pair."""
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class CowordNetwork:
    """
    Weighted, undirected term co-occurrence network of one period.

    Edges are stored once under their sorted pair key; ``edge(a, b)`` and
    ``edge(b, a)`` return the same object. Terms without co-occurrences stay
    in the network as isolated nodes.
    """

    period: int
    terms: Tuple[TermStats, ...]
    edges: Mapping[TermPair, CowordEdge] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        names = {s.term for s in self.terms}
        normalized: Dict[TermPair, CowordEdge] = {}
        for (a, b), edge in self.edges.items():
            if a == b:
                raise ValidationError(f"self-edge on term {a!r}")
            if a not in names or b not in names:
                raise ValidationError(f"edge ({a!r}, {b!r}) references an unknown term")
            if not 0.0 < edge.weight <= 1.0:
                raise ValidationError(f"edge ({a!r}, {b!r}) weight {edge.weight} outside (0, 1]")
            normalized[pair_key(a, b)] = edge
        object.__setattr__(self, "edges", dict(sorted(normalized.items())))

    @property
    def term_names(self) -> List[str]:
        return sorted(s.term for s in self.terms)

    @property
    def occurrences(self) -> Dict[str, int]:
        return {s.term: s.occurrence for s in self.terms}

    def __len__(self) -> int:
        return len(self.terms)

    def edge(self, a: str, b: str):
        """The edge between two terms, or None."""
        return self.edges.get(pair_key(a, b))

    def weight(self, a: str, b: str) -> float:
        e = self.edge(a, b)
        return e.weight if e is not None else 0.0

    def iter_edges(self) -> Iterator[Tuple[str, str, CowordEdge]]:
        for (a, b), e in self.edges.items():
            yield a, b, e

    def to_networkx(self) -> nx.Graph:
        """
        Export as a networkx Graph.

        Nodes are inserted in lexicographic order so that seeded algorithms
        see the same node order on every run.
        """
        g = nx.Graph()
        occ = self.occurrences
        for term in self.term_names:
            g.add_node(term, occurrence=occ[term])
        for a, b, e in self.iter_edges():
            g.add_edge(a, b, weight=e.weight, cooccurrence=e.cooccurrence)
        return g

    def subgraph(self, terms) -> nx.Graph:
        """Induced weighted subgraph on the given terms."""
        keep = set(terms)
        g = nx.Graph()
        for term in sorted(keep):
            g.add_node(term)
        for a, b, e in self.iter_edges():
            if a in keep and b in keep:
                g.add_edge(a, b, weight=e.weight)
        return g


def count_terms(corpus: Corpus, period: int) -> List[TermStats]:
    """
    Document frequencies of all terms in a period.

    Returns:
        TermStats sorted by descending occurrence, then term
    """
    counts: Counter = Counter()
    for doc in corpus.documents_in(period):
        counts.update(doc.terms)
    return sorted((TermStats(t, c) for t, c in counts.items()),
                  key=lambda s: (-s.occurrence, s.term))


def filter_terms(stats: Sequence[TermStats], min_occurrence: int, max_terms: int) -> List[TermStats]:
    """
    Keep terms with at least ``min_occurrence`` documents, at most ``max_terms`` of them.

    When more terms qualify than allowed, the highest-occurrence terms are
    kept; ties at the cutoff go to the lexicographically smaller term.

    Raises:
        ParameterError: If min_occurrence or max_terms is below 1
    """
    if min_occurrence < 1:
        raise ParameterError(f"min_occurrence must be >= 1, got {min_occurrence}")
    if max_terms < 1:
        raise ParameterError(f"max_terms must be >= 1, got {max_terms}")
    qualifying = sorted((s for s in stats if s.occurrence >= min_occurrence),
                        key=lambda s: (-s.occurrence, s.term))
    return qualifying[:max_terms]


def build_network(corpus: Corpus, period: int, retained: Sequence[TermStats]) -> CowordNetwork:
    """
    Build the association-index network among the retained terms of a period.

    The co-occurrence matrix is the Gram matrix X^T X of the binary
    document-by-term incidence matrix X; its diagonal holds the occurrences.
    """
    terms = sorted(s.term for s in retained)
    index = {t: i for i, t in enumerate(terms)}
    docs = corpus.documents_in(period)

    incidence = np.zeros((len(docs), len(terms)), dtype=np.int64)
    for row, doc in enumerate(docs):
        for t in doc.terms:
            col = index.get(t)
            if col is not None:
                incidence[row, col] = 1
    counts = incidence.T @ incidence
    occurrence = np.diag(counts)

    edges: Dict[TermPair, CowordEdge] = {}
    rows, cols = np.nonzero(np.triu(counts, k=1))
    for i, j in zip(rows.tolist(), cols.tolist()):
        c_ij = int(counts[i, j])
        weight = c_ij / math.sqrt(int(occurrence[i]) * int(occurrence[j]))
        edges[(terms[i], terms[j])] = CowordEdge(c_ij, weight)

    stats = tuple(TermStats(t, int(occurrence[index[t]])) for t in terms)
    logger.info("period %d: network with %d terms and %d edges", period, len(stats), len(edges))
    return CowordNetwork(period, stats, edges)
