"""
Serialisation of analysis results.

JSON artifacts are canonical: keys sorted, floats rounded to 12 significant
digits, two-space indentation and a trailing newline, so identical inputs
produce byte-identical files. Period numbers and cluster keys are 1-based in
every artifact (period index 0 is written as 1, cluster (0, 2) as 'P1-C3').
"""

import json
import math
from typing import Any, Dict, List, Mapping, Optional, Sequence

import networkx as nx

from coword import CowordNetwork, TermStats
from evolution import EvolutionGraph, PathwayReport, pattern_names
from lineage import LineageMatrix, classical_inclusion_matrix, period_overlap
from membership import MembershipMatrix
from themes import ClusterId, PeriodPartition, cluster_key

SIGNIFICANT_DIGITS = 12


def round_float(x: float) -> float:
    """Round to 12 significant digits (NaN and infinities are rejected)."""
    if not math.isfinite(x):
        raise ValueError(f"cannot serialise non-finite value {x}")
    return float(f"{x:.{SIGNIFICANT_DIGITS}g}")


def _canonical(obj: Any) -> Any:
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        return round_float(obj)
    if isinstance(obj, Mapping):
        return {str(k): _canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return [_canonical(v) for v in sorted(obj)]
    if hasattr(obj, "item"):
        return _canonical(obj.item())
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def to_canonical_json(obj: Any) -> str:
    """Deterministic JSON text of a plain data structure."""
    return json.dumps(_canonical(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def format_float(x: float) -> str:
    return f"{x:.{SIGNIFICANT_DIGITS}g}"


# ============================================================================
# Terms and networks
# ============================================================================

def term_stats_text(stats: Sequence[TermStats]) -> str:
    """Node list: ``term<TAB>occurrence`` per line."""
    return "".join(f"{s.term}\t{s.occurrence}\n" for s in stats)


def network_edges_text(net: CowordNetwork) -> str:
    """Edge list: ``term_i<TAB>term_j<TAB>c_ij<TAB>w_ij`` per line."""
    return "".join(f"{a}\t{b}\t{e.cooccurrence}\t{format_float(e.weight)}\n" for a, b, e in net.iter_edges())


def network_nodes_text(net: CowordNetwork) -> str:
    occ = net.occurrences
    return "".join(f"{t}\t{occ[t]}\n" for t in net.term_names)


# ============================================================================
# Themes and memberships
# ============================================================================

def strategic_diagram_record(partition: PeriodPartition, stats: Sequence[TermStats],
                             top_n: Optional[int] = 10) -> List[Dict[str, Any]]:
    """Strategic-diagram rows of one period."""
    occ = {s.term: s.occurrence for s in stats}
    rows = []
    for c in partition.clusters:
        rows.append({
            "cluster_id": c.key,
            "label": c.label,
            "centrality": c.centrality,
            "density": c.density,
            "fuzzy_size": c.fuzzy_size,
            "quadrant": c.quadrant.value if c.quadrant else None,
            "top_terms": [
                {"term": t, "pagerank": pr, "occurrence": occ.get(t, 0)}
                for t, pr in c.top_terms(top_n)
            ],
        })
    return rows


def membership_text(m: MembershipMatrix, delimiter: str = "\t") -> str:
    """One row per document: doc_id, then memberships in cluster order."""
    header = delimiter.join(["doc_id"] + [cluster_key(cid) for cid in m.cluster_ids])
    lines = [header]
    for doc_id, row in zip(m.doc_ids, m.u):
        lines.append(delimiter.join([doc_id] + [format_float(float(v)) for v in row]))
    return "\n".join(lines) + "\n"


# ============================================================================
# Lineage
# ============================================================================

def lineage_record(lm: LineageMatrix) -> Dict[str, Any]:
    entries = []
    for entry in lm.entries():
        entry["src"] = cluster_key(entry["src"])
        entry["dst"] = cluster_key(entry["dst"])
        entries.append(entry)
    return {
        "source_period": lm.source_period + 1,
        "target_period": lm.target_period + 1,
        "alpha": lm.alpha,
        "entries": entries,
    }


def comparison_record(src: PeriodPartition, dst: PeriodPartition, lm: LineageMatrix,
                      terms_src: frozenset, terms_dst: frozenset) -> Dict[str, Any]:
    """Classical inclusion next to lineage strength, plus period-level overlap."""
    inclusion = classical_inclusion_matrix(src, dst)
    overlap = period_overlap(terms_src, terms_dst)
    pairs = []
    for h, cs in enumerate(src.clusters):
        for j, cd in enumerate(dst.clusters):
            pairs.append({
                "src": cs.key,
                "dst": cd.key,
                "classical_inclusion": float(inclusion[h, j]),
                "L": float(lm.L[h, j]),
            })
    return {
        "source_period": src.period + 1,
        "target_period": dst.period + 1,
        "overlap": {
            "shared": overlap.shared,
            "jaccard": overlap.index,
            "source_share": overlap.source_share,
        },
        "pairs": pairs,
    }


# ============================================================================
# Evolution graph
# ============================================================================

def evolution_to_networkx(g: EvolutionGraph, patterns: Mapping[ClusterId, frozenset]) -> nx.DiGraph:
    """DiGraph with string node ids and GraphML-compatible attributes."""
    out = nx.DiGraph()
    for c in g.clusters:
        out.add_node(
            c.key,
            period=c.period + 1,
            label=c.label,
            fuzzy_size=round_float(c.fuzzy_size),
            centrality=round_float(c.centrality),
            density=round_float(c.density),
            quadrant=c.quadrant.value if c.quadrant else "",
            patterns=",".join(pattern_names(patterns.get(c.id, frozenset()))),
        )
    for e in g.edges:
        out.add_edge(cluster_key(e.src), cluster_key(e.dst),
                     L=round_float(e.weight), Iw=round_float(e.iw), Omega=round_float(e.omega))
    return out


def write_graphml(g: EvolutionGraph, patterns: Mapping[ClusterId, frozenset], path: str) -> None:
    nx.write_graphml(evolution_to_networkx(g, patterns), path)


def sankey_record(g: EvolutionGraph) -> Dict[str, Any]:
    """Node/link lists for a Sankey (alluvial) rendering of the evolution graph."""
    return {
        "nodes": [
            {"id": c.key, "period": c.period + 1, "label": c.label, "size": c.fuzzy_size}
            for c in g.clusters
        ],
        "links": [
            {"src": cluster_key(e.src), "dst": cluster_key(e.dst), "value": e.weight}
            for e in g.edges
        ],
    }


def pathway_report_text(report: PathwayReport, g: EvolutionGraph) -> str:
    """Tab-separated pathway report in ranking order."""
    labels = {c.id: c.label for c in g.clusters}
    lines = ["rank\tstrength\tlength\tcumulative_size\ttrivial\tclusters\tlabels"]
    for rank, p in enumerate(report.pathways, 1):
        lines.append("\t".join([
            str(rank),
            format_float(p.strength),
            str(p.length),
            format_float(p.cumulative_size),
            "trivial pathway" if p.trivial else "",
            " -> ".join(cluster_key(c) for c in p.clusters),
            " -> ".join(labels[c] for c in p.clusters),
        ]))
    if report.truncated:
        lines.append("# truncated: greedy strongest-edge pathways only")
    return "\n".join(lines) + "\n"


def patterns_record(g: EvolutionGraph, patterns: Mapping[ClusterId, frozenset]) -> List[Dict[str, Any]]:
    return [
        {"cluster_id": c.key, "label": c.label, "patterns": pattern_names(patterns.get(c.id, frozenset()))}
        for c in g.clusters
    ]
