#!/usr/bin/env python3
"""
Examples demonstrating thematic evolution analysis.

The planted corpus has three periods in which a stable theme continues, one
theme splits and later disappears, and two emerging themes merge. Each
example runs one stage and prints what it finds.
"""

import tempfile

from config import RunConfig
from corpus import CorpusFormat, parse_corpus, slice_periods
from coword import build_network, count_terms, filter_terms
from export import to_canonical_json
from lineage import SENSITIVITY_ALPHAS, period_overlap
from pipeline import analyze, sensitivity
from synthetic import PLANTED_PERIODS, planted_evolution_corpus
from themes import cluster_key


def banner(title):
    print("=" * 70)
    print(title)
    print("=" * 70)
    print()


def planted_config(output_dir):
    path = f"{output_dir}/planted.json"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(to_canonical_json(planted_evolution_corpus()))
    return RunConfig(input_path=path, input_format=CorpusFormat.CANONICAL_JSON,
                     periods=PLANTED_PERIODS, render_svg=False, output_dir=output_dir)


def example_network():
    """Co-word network of the first period."""
    banner("CO-WORD NETWORK: association index of period 1")
    corpus = slice_periods(parse_corpus(to_canonical_json(planted_evolution_corpus())), PLANTED_PERIODS)
    stats = count_terms(corpus, 0)
    retained = filter_terms(stats, min_occurrence=5, max_terms=250)
    net = build_network(corpus, 0, retained)
    print(f"Terms: {len(stats)} observed, {len(retained)} retained")
    print(f"Edges: {len(net.edges)}")
    for a, b, e in list(net.iter_edges())[:5]:
        print(f"  {a:4s} -- {b:4s}  c={e.cooccurrence:3d}  w={e.weight:.3f}")
    print()


def example_strategic_diagrams(result):
    """Clusters with their strategic coordinates."""
    banner("STRATEGIC DIAGRAMS: clusters per period")
    for analysis in result.detection.periods:
        print(f"Period {analysis.label} (modularity {analysis.partition.modularity:.3f})")
        for c in analysis.partition.clusters:
            terms = ", ".join(t for t, _ in c.top_terms(4))
            print(f"  {c.key:6s} {c.label:4s} size={c.fuzzy_size:5.1f} density={c.density:6.1f} "
                  f"{c.quadrant.value:22s} [{terms}]")
        print()


def example_lineage(result):
    """Lineage strengths between consecutive periods."""
    banner("LINEAGE: L = alpha * inclusion + (1 - alpha) * importance")
    for lm in result.evolution.lineage:
        for entry in lm.entries():
            if entry["L"] > 0:
                print(f"  {cluster_key(entry['src'])} -> {cluster_key(entry['dst'])}  "
                      f"L={entry['L']:.3f}  Iw={entry['Iw']:.3f}  Omega={entry['Omega']:.3f}")
    periods = result.detection.periods
    for a, b in zip(periods, periods[1:]):
        overlap = period_overlap(frozenset(s.term for s in a.retained), frozenset(s.term for s in b.retained))
        print(f"  vocabulary {a.label} -> {b.label}: shared={overlap.shared} jaccard={overlap.index:.2f}")
    print()


def example_patterns(result):
    """Evolutionary patterns and pathways."""
    banner("EVOLUTION: patterns and pathways")
    graph = result.evolution.graph
    for c in graph.clusters:
        labels = ", ".join(sorted(p.value for p in result.evolution.patterns[c.id])) or "-"
        print(f"  {c.key:6s} {c.label:4s} {labels}")
    print()
    for p in result.evolution.pathways:
        chain = " -> ".join(graph.cluster(cid).label for cid in p.clusters)
        print(f"  strength={p.strength:.3f} size={p.cumulative_size:5.1f}  {chain}")
    print()


def example_sensitivity(config):
    """Stability of the evolution graph across alpha values."""
    banner("SENSITIVITY: alpha sweep")
    report = sensitivity(config, SENSITIVITY_ALPHAS)
    for v in report.variants:
        print(f"  alpha={v.alpha:.1f}: {len(v.edges)} edges (+{len(v.added)} / -{len(v.removed)})")
    print(f"  backbone: {len(report.backbone)} edges, base preserved: {report.base_preserved}")
    print()


def main():
    """Run all examples."""
    with tempfile.TemporaryDirectory() as tmp:
        config = planted_config(tmp)
        example_network()
        result = analyze(config)
        example_strategic_diagrams(result)
        example_lineage(result)
        example_patterns(result)
        example_sensitivity(config)


if __name__ == "__main__":
    main()
