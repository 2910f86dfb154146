"""
End-to-end analysis pipeline.

Stages run in dependency order:

1. ingest  - parse, harmonise and slice the corpus
2. detect  - per period: term filtering, co-word network, Louvain themes,
             PageRank, strategic metrics, fuzzy memberships, quadrants
3. link    - lineage matrices, evolution graph, patterns, pathways
4. export  - artifacts, plots and the manifest

Every file goes through a single ArtifactWriter so the manifest stays
consistent; if any stage fails the files written so far are removed.
"""

import hashlib
import logging
import os
import pickle
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, FrozenSet, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from config import RunConfig, config_to_mapping
from corpus import Corpus, annual_production, harmonize, load_synonyms, parse_corpus, period_sizes, slice_periods
from coword import CowordNetwork, TermStats, build_network, count_terms, filter_terms
from errors import ConfigError, EmptyCorpusError, StageError, ThemeFlowError
from evolution import (EvolutionGraph, Pattern, PathwayReport, build_evolution_graph, classify_patterns,
                       extract_pathways)
from export import (comparison_record, lineage_record, membership_text, network_edges_text, network_nodes_text,
                    pathway_report_text, patterns_record, sankey_record, strategic_diagram_record,
                    term_stats_text, to_canonical_json, write_graphml)
from lineage import LineageMatrix, build_lineage_matrix
from membership import MembershipMatrix, apply_fuzzy_sizes, build_membership, fuzzy_sizes
from themes import (AxisOrigin, ClusterId, PeriodPartition, apply_quadrants, cluster_key, detect_communities,
                    filter_clusters, modularity_of, rank_clusters, strategic_coordinates, strategic_metrics)

logger = logging.getLogger(__name__)

CACHE_FILE = os.path.join("cache", "detection.pickle")
MANIFEST_FILE = "manifest.json"


# ============================================================================
# Stage results
# ============================================================================

@dataclass(frozen=True, eq=False)
class PeriodAnalysis:
    """Everything the detection stage derives for one period."""

    period: int
    label: str
    n_documents: int
    stats: Tuple[TermStats, ...]
    retained: Tuple[TermStats, ...]
    network: CowordNetwork
    n_communities: int
    partition: PeriodPartition
    membership: Optional[MembershipMatrix] = None


@dataclass(frozen=True, eq=False)
class DetectionResult:
    corpus: Corpus
    periods: Tuple[PeriodAnalysis, ...]
    # sha256 of the input files the corpus was read from
    sources: Mapping[str, str] = field(default_factory=dict)

    @property
    def partitions(self) -> List[PeriodPartition]:
        return [p.partition for p in self.periods]


@dataclass(frozen=True, eq=False)
class EvolutionResult:
    lineage: Tuple[LineageMatrix, ...]
    graph: EvolutionGraph
    patterns: Dict[ClusterId, FrozenSet[Pattern]]
    pathways: PathwayReport


@dataclass(frozen=True, eq=False)
class AnalysisResult:
    config: RunConfig
    detection: DetectionResult
    evolution: EvolutionResult


@dataclass(frozen=True)
class RunOutcome:
    """Exit status of a run, its manifest, and the diagnostic on failure."""

    status: int
    manifest: Optional[Dict[str, Any]] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.status == 0


@contextmanager
def stage(name: str) -> Iterator[None]:
    """Wrap errors raised inside a stage with the stage name."""
    try:
        yield
    except StageError:
        raise
    except (ThemeFlowError, OSError, ValueError) as e:
        raise StageError(name, e) from e


# ============================================================================
# Ingest
# ============================================================================

def _read_bytes(path: str, what: str) -> bytes:
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as e:
        raise ConfigError(f"cannot read {what} {path}: {e}") from e


def _digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def read_corpus(config: RunConfig) -> Tuple[Corpus, Dict[str, str]]:
    """
    Parse, harmonise and slice the configured input.

    Returns:
        The sliced corpus and the sha256 digests of the bytes it was built
        from, keyed by "input" and (when configured) "synonyms"

    Raises:
        ConfigError: If the input or synonym file cannot be read
        EmptyCorpusError: If no document falls within the configured periods
    """
    data = _read_bytes(config.input_path, "input")
    digests = {"input": _digest(data)}
    corpus = parse_corpus(data, config.input_format, config.keyword_field, config.columns, config.delimiter)

    if config.synonyms_path:
        raw = _read_bytes(config.synonyms_path, "synonyms")
        digests["synonyms"] = _digest(raw)
        table = load_synonyms(raw)
        corpus = harmonize(corpus, table)
        logger.info("harmonised terms with %d synonym pairs", len(table))

    corpus = slice_periods(corpus, config.periods)
    if not corpus.documents:
        raise EmptyCorpusError("no documents fall within the configured periods")
    logger.info("documents per period: %s", period_sizes(corpus))
    return corpus, digests


def load_corpus(config: RunConfig) -> Corpus:
    """Parse, harmonise and slice the configured input."""
    return read_corpus(config)[0]


def source_digests(config: RunConfig) -> Optional[Dict[str, str]]:
    """Current sha256 digests of the configured input files, or None if one cannot be read."""
    digests = {}
    for key, path in (("input", config.input_path), ("synonyms", config.synonyms_path)):
        if not path:
            continue
        try:
            with open(path, "rb") as fh:
                digests[key] = _digest(fh.read())
        except OSError:
            return None
    return digests


# ============================================================================
# Detect
# ============================================================================

def analyze_period(corpus: Corpus, period: int, config: RunConfig) -> PeriodAnalysis:
    """Run the cross-sectional analysis of one period."""
    docs = corpus.documents_in(period)
    stats = count_terms(corpus, period)
    retained = filter_terms(stats, config.min_occurrence, config.max_terms)
    net = build_network(corpus, period, retained)

    communities = detect_communities(net, config.resolution, config.seed)
    partition = filter_clusters(communities, retained, config.min_cumulative_freq, period=period)
    partition = replace(partition, modularity=modularity_of(net, communities, config.resolution))
    partition = rank_clusters(net, partition, config.damping, config.tolerance, config.max_iterations)
    partition = strategic_metrics(net, partition)

    membership = None
    if len(partition):
        membership = build_membership(docs, partition, retained)
        partition = apply_fuzzy_sizes(partition, fuzzy_sizes(membership))
    else:
        logger.warning("period %d: no clusters retained, memberships skipped", period + 1)

    logger.info("period %d: %d documents, %d/%d terms retained, %d of %d communities kept",
                period + 1, len(docs), len(retained), len(stats), len(partition), len(communities))
    return PeriodAnalysis(
        period=period,
        label=corpus.periods[period].label,
        n_documents=len(docs),
        stats=tuple(stats),
        retained=tuple(retained),
        network=net,
        n_communities=len(communities),
        partition=partition,
        membership=membership,
    )


def detect_themes(corpus: Corpus, config: RunConfig,
                  sources: Optional[Mapping[str, str]] = None) -> DetectionResult:
    """Analyse every period and assign strategic-diagram quadrants."""
    analyses = [analyze_period(corpus, i, config) for i in range(len(corpus.periods))]
    quadrants = strategic_coordinates([a.partition for a in analyses], config.axis_origin)
    analyses = [replace(a, partition=apply_quadrants(a.partition, quadrants)) for a in analyses]
    return DetectionResult(corpus, tuple(analyses), dict(sources or {}))


# ============================================================================
# Link
# ============================================================================

def link_themes(detection: DetectionResult, alpha: float, theta_abs: float, top_k: int,
                max_pathways: int = 100_000) -> EvolutionResult:
    """Build lineage matrices between consecutive periods and the evolution graph."""
    partitions = detection.partitions
    matrices = tuple(build_lineage_matrix(a, b, alpha) for a, b in zip(partitions, partitions[1:]))
    graph = build_evolution_graph(partitions, matrices, theta_abs, top_k)
    patterns = classify_patterns(graph)
    pathways = extract_pathways(graph, max_pathways)
    logger.info("evolution graph: %d clusters, %d edges, %d pathways",
                len(graph.clusters), len(graph.edges), len(pathways))
    return EvolutionResult(matrices, graph, patterns, pathways)


def analyze(config: RunConfig) -> AnalysisResult:
    """Run ingest, detect and link without writing anything."""
    config.validate()
    detection = fresh_detection(config)
    with stage("link"):
        evolution = link_themes(detection, config.alpha, config.theta_abs, config.top_k, config.max_pathways)
    return AnalysisResult(config, detection, evolution)


# ============================================================================
# Export
# ============================================================================

class ArtifactWriter:
    """
    Single point through which all output files are written.

    Keeps the manifest entries in write order and can remove everything it
    wrote when a run fails.
    """

    def __init__(self, root: str):
        self.root = root
        self.entries: List[Dict[str, Any]] = []
        self._created_dirs: List[str] = []
        self._written: List[str] = []

    def _prepare(self, relpath: str) -> str:
        path = os.path.join(self.root, relpath)
        missing = []
        parent = os.path.dirname(path)
        while parent and not os.path.isdir(parent):
            missing.append(parent)
            parent = os.path.dirname(parent)
        for d in reversed(missing):
            os.makedirs(d, exist_ok=True)
            self._created_dirs.append(d)
        return path

    def _record(self, relpath: str, path: str, kind: str, meta: Dict[str, Any]) -> str:
        self._written.append(path)
        if kind:
            entry = {"path": relpath.replace(os.sep, "/"), "kind": kind}
            entry.update(meta)
            self.entries.append(entry)
        return path

    def write_text(self, relpath: str, text: str, kind: str, **meta) -> str:
        path = self._prepare(relpath)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        return self._record(relpath, path, kind, meta)

    def write_json(self, relpath: str, obj: Any, kind: str, **meta) -> str:
        return self.write_text(relpath, to_canonical_json(obj), kind, **meta)

    def write_bytes(self, relpath: str, data: bytes, kind: str = "", **meta) -> str:
        path = self._prepare(relpath)
        with open(path, "wb") as fh:
            fh.write(data)
        return self._record(relpath, path, kind, meta)

    def write_with(self, relpath: str, render: Callable[[str], None], kind: str, **meta) -> str:
        path = self._prepare(relpath)
        self._written.append(path)
        render(path)
        self._written.pop()
        return self._record(relpath, path, kind, meta)

    def register(self, relpath: str, kind: str, **meta) -> None:
        """List an existing file in the manifest without taking ownership of it."""
        entry = {"path": relpath.replace(os.sep, "/"), "kind": kind}
        entry.update(meta)
        self.entries.append(entry)

    def cleanup(self) -> None:
        """Remove every file and directory created by this writer."""
        for path in reversed(self._written):
            try:
                os.remove(path)
            except OSError:
                pass
        for d in reversed(self._created_dirs):
            try:
                os.rmdir(d)
            except OSError:
                pass
        self.entries.clear()
        self._written.clear()


def summary_record(detection: DetectionResult, evolution: EvolutionResult) -> Dict[str, Any]:
    """Period table, annual production and evolution totals."""
    corpus = detection.corpus
    periods = []
    for a in detection.periods:
        spec = corpus.periods[a.period]
        periods.append({
            "period": a.period + 1,
            "label": spec.label,
            "start_year": spec.start_year,
            "end_year": spec.end_year,
            "documents": a.n_documents,
            "terms": len(a.stats),
            "retained_terms": len(a.retained),
            "network_edges": len(a.network.edges),
            "communities": a.n_communities,
            "clusters": len(a.partition),
            "dropped_terms": len(a.partition.dropped_terms),
            "modularity": a.partition.modularity,
        })
    pattern_counts = {p.value: 0 for p in Pattern}
    for labels in evolution.patterns.values():
        for p in labels:
            pattern_counts[p.value] += 1
    return {
        "periods": periods,
        "annual_production": annual_production(corpus),
        "dropped_records": dict(corpus.dropped),
        "evolution": {
            "clusters": len(evolution.graph.clusters),
            "edges": len(evolution.graph.edges),
            "pathways": len(evolution.pathways),
            "pathways_truncated": evolution.pathways.truncated,
            "patterns": pattern_counts,
        },
    }


def write_artifacts(result: AnalysisResult, writer: ArtifactWriter) -> Dict[str, Any]:
    """Write all artifacts of an analysis and return the manifest."""
    import plots  # matplotlib

    config = result.config
    detection, evolution = result.detection, result.evolution
    for a in detection.periods:
        n = a.period + 1
        folder = f"period-{n}"
        writer.write_text(f"{folder}/terms.tsv", term_stats_text(a.stats), "term-stats", period=n)
        writer.write_text(f"{folder}/network-nodes.tsv", network_nodes_text(a.network), "network-nodes", period=n)
        writer.write_text(f"{folder}/network-edges.tsv", network_edges_text(a.network), "network-edges", period=n)
        writer.write_json(f"{folder}/strategic-diagram.json",
                          strategic_diagram_record(a.partition, a.retained), "strategic-diagram", period=n)
        if a.membership is not None:
            writer.write_text(f"{folder}/membership.tsv", membership_text(a.membership), "membership", period=n)
        if config.render_svg:
            origin = _axis_origin(a.partition, config.axis_origin)
            writer.write_with(f"{folder}/strategic-diagram.svg",
                              lambda path, p=a.partition, o=origin: plots.render_strategic_diagram(p, path, o),
                              "strategic-diagram-svg", period=n)

    partitions = detection.partitions
    for lm, a, b in zip(evolution.lineage, detection.periods, detection.periods[1:]):
        tag = f"{a.period + 1}-{b.period + 1}"
        writer.write_json(f"lineage-{tag}.json", lineage_record(lm), "lineage-matrix", transition=tag)
        writer.write_json(f"comparison-{tag}.json",
                          comparison_record(partitions[a.period], partitions[b.period], lm,
                                            frozenset(s.term for s in a.retained),
                                            frozenset(s.term for s in b.retained)),
                          "comparison", transition=tag)

    graph = evolution.graph
    writer.write_with("evolution.graphml", lambda path: write_graphml(graph, evolution.patterns, path),
                      "evolution-graph")
    writer.write_json("patterns.json", patterns_record(graph, evolution.patterns), "patterns")
    writer.write_json("sankey.json", sankey_record(graph), "sankey")
    if config.render_svg:
        labels = [p.label for p in detection.corpus.periods]
        writer.write_with("sankey.svg",
                          lambda path: plots.render_evolution_plot(graph, path, evolution.pathways, labels),
                          "sankey-svg")
    writer.write_text("pathways.tsv", pathway_report_text(evolution.pathways, graph), "pathway-report")
    writer.write_json("summary.json", summary_record(detection, evolution), "summary")

    manifest = {
        "parameters": config_to_mapping(config),
        "artifacts": list(writer.entries),
    }
    writer.write_json(MANIFEST_FILE, manifest, "")
    return manifest


def _axis_origin(partition: PeriodPartition, origin: AxisOrigin) -> Optional[Dict[str, float]]:
    if not partition.clusters:
        return None
    stat = np.median if AxisOrigin(origin) is AxisOrigin.MEDIAN else np.mean
    return {
        "centrality": float(stat([c.centrality for c in partition.clusters])),
        "density": float(stat([c.density for c in partition.clusters])),
    }


# ============================================================================
# Cache
# ============================================================================

def save_cache(detection: DetectionResult, config: RunConfig, writer: ArtifactWriter) -> None:
    payload = {
        "fingerprint": config.detection_fingerprint(),
        "sources": dict(detection.sources),
        "detection": detection,
    }
    writer.write_bytes(CACHE_FILE, pickle.dumps(payload, protocol=pickle.HIGHEST_PROTOCOL), "cache")


def load_cache(config: RunConfig) -> Optional[DetectionResult]:
    """Cached detection result for this config, or None when missing or stale."""
    path = os.path.join(config.output_dir, CACHE_FILE)
    if not os.path.exists(path):
        return None
    try:
        with open(path, "rb") as fh:
            payload = pickle.load(fh)
    except (OSError, pickle.UnpicklingError, EOFError, AttributeError) as e:
        logger.warning("ignoring unreadable cache %s: %s", path, e)
        return None
    if payload.get("fingerprint") != config.detection_fingerprint():
        logger.info("cache %s was built with other parameters; recomputing", path)
        return None
    sources = payload.get("sources")
    if not sources or sources != source_digests(config):
        logger.info("input files changed since cache %s was written; recomputing", path)
        return None
    return payload["detection"]


def cached_detection(config: RunConfig) -> DetectionResult:
    """Detection result from the cache if valid, otherwise recomputed."""
    detection = load_cache(config)
    if detection is not None:
        logger.info("using cached detection stage")
        return detection
    return fresh_detection(config)


def fresh_detection(config: RunConfig) -> DetectionResult:
    """Ingest and detect from the input files, recording their digests."""
    with stage("ingest"):
        corpus, sources = read_corpus(config)
    with stage("detect"):
        return detect_themes(corpus, config, sources)


# ============================================================================
# Entry points
# ============================================================================

def _emit(config: RunConfig, produce: Callable[[], Tuple[DetectionResult, bool]]) -> RunOutcome:
    writer = ArtifactWriter(config.output_dir)
    try:
        config.validate()
        detection, fresh = produce()
        with stage("link"):
            evolution = link_themes(detection, config.alpha, config.theta_abs, config.top_k, config.max_pathways)
        result = AnalysisResult(config, detection, evolution)
        with stage("export"):
            if fresh:
                save_cache(detection, config, writer)
            else:
                writer.register(CACHE_FILE, "cache")
            manifest = write_artifacts(result, writer)
    except ThemeFlowError as e:
        writer.cleanup()
        error = str(e) if isinstance(e, StageError) else f"{e.code}: {e}"
        logger.error("%s", error)
        return RunOutcome(status=1, error=error)
    except Exception:
        writer.cleanup()
        raise
    logger.info("wrote %d artifacts to %s", len(manifest["artifacts"]), config.output_dir)
    return RunOutcome(status=0, manifest=manifest)


def run(config: RunConfig) -> RunOutcome:
    """
    Full analysis: ingest, detect, link and export.

    Returns:
        RunOutcome with status 0 and the manifest, or status 1 and a
        diagnostic such as '[ingest] empty-corpus: ...'. Partial artifacts
        are removed on failure.
    """
    def produce():
        return fresh_detection(config), True

    return _emit(config, produce)


def export_from_cache(config: RunConfig) -> RunOutcome:
    """Re-emit all artifacts, reusing the cached detection stage when it matches the config."""
    def produce():
        cached = load_cache(config)
        if cached is not None:
            return cached, False
        return fresh_detection(config), True

    return _emit(config, produce)


def validate(config: RunConfig) -> Dict[str, Any]:
    """
    Check configuration and input without running the analysis.

    Returns:
        Document counts per period and dropped-record counters

    Raises:
        ConfigError, StageError: On the first problem found
    """
    config.validate()
    with stage("ingest"):
        corpus = load_corpus(config)
    return {
        "documents": len(corpus),
        "periods": [
            {"label": spec.label, "start_year": spec.start_year, "end_year": spec.end_year, "documents": n}
            for spec, n in zip(corpus.periods, period_sizes(corpus))
        ],
        "dropped_records": dict(corpus.dropped),
    }


# ============================================================================
# Sensitivity
# ============================================================================

Edge = Tuple[ClusterId, ClusterId]


@dataclass(frozen=True)
class SensitivityVariant:
    alpha: float
    theta_abs: float
    edges: FrozenSet[Edge]
    added: FrozenSet[Edge]
    removed: FrozenSet[Edge]
    changed_patterns: Tuple[ClusterId, ...]


@dataclass(frozen=True)
class SensitivityReport:
    """
    Lineage and graph stages re-run for several parameter values.

    ``backbone`` holds the edges admitted in every variant; the base edge set
    is preserved when it is contained in the backbone.
    """

    base_alpha: float
    base_theta_abs: float
    base_edges: FrozenSet[Edge]
    variants: Tuple[SensitivityVariant, ...]
    backbone: FrozenSet[Edge]
    resolution_clusters: Tuple[Tuple[float, Tuple[int, ...]], ...] = ()

    @property
    def base_preserved(self) -> bool:
        return self.base_edges <= self.backbone

    @property
    def backbone_changed(self) -> bool:
        return self.backbone != self.base_edges

    @property
    def total_differences(self) -> int:
        return sum(len(v.added) + len(v.removed) for v in self.variants)

    def to_record(self) -> Dict[str, Any]:
        def edges(es):
            return [[cluster_key(a), cluster_key(b)] for a, b in sorted(es)]

        return {
            "base": {"alpha": self.base_alpha, "theta_abs": self.base_theta_abs, "edges": edges(self.base_edges)},
            "variants": [
                {
                    "alpha": v.alpha,
                    "theta_abs": v.theta_abs,
                    "edges": len(v.edges),
                    "added": edges(v.added),
                    "removed": edges(v.removed),
                    "changed_patterns": [cluster_key(c) for c in v.changed_patterns],
                }
                for v in self.variants
            ],
            "backbone": edges(self.backbone),
            "base_preserved": self.base_preserved,
            "backbone_changed": self.backbone_changed,
            "resolutions": [
                {"resolution": r, "clusters_per_period": list(counts)} for r, counts in self.resolution_clusters
            ],
        }


def sensitivity(config: RunConfig, alphas: Sequence[float], thetas: Optional[Sequence[float]] = None,
                resolutions: Optional[Sequence[float]] = None,
                detection: Optional[DetectionResult] = None) -> SensitivityReport:
    """
    Re-run the lineage and graph stages for every (alpha, theta_abs) combination.

    The detection stage is computed once (or taken from ``detection`` / the
    cache). Each resolution in ``resolutions`` re-runs detection and reports
    the number of clusters per period.

    Raises:
        StageError: If an alpha or theta lies outside [0, 1], or detection fails
    """
    config.validate()
    if detection is None:
        detection = cached_detection(config)
    thetas = list(thetas) if thetas else [config.theta_abs]
    alphas = list(alphas) if alphas else [config.alpha]

    with stage("link"):
        base = link_themes(detection, config.alpha, config.theta_abs, config.top_k, config.max_pathways)
        base_edges = base.graph.edge_set()
        variants = []
        for theta in thetas:
            for alpha in alphas:
                ev = link_themes(detection, alpha, theta, config.top_k, config.max_pathways)
                edges = ev.graph.edge_set()
                changed = tuple(sorted(c for c in ev.patterns if ev.patterns[c] != base.patterns.get(c)))
                variants.append(SensitivityVariant(alpha, theta, edges, edges - base_edges,
                                                   base_edges - edges, changed))
                logger.info("alpha=%.3g theta=%.3g: %d edges (+%d/-%d)", alpha, theta, len(edges),
                            len(edges - base_edges), len(base_edges - edges))
    backbone = frozenset.intersection(*(v.edges for v in variants))

    resolution_clusters = []
    for r in resolutions or []:
        with stage("detect"):
            alt = detect_themes(detection.corpus, replace(config, resolution=float(r)))
        resolution_clusters.append((float(r), tuple(len(p) for p in alt.partitions)))

    return SensitivityReport(config.alpha, config.theta_abs, base_edges, tuple(variants), backbone,
                             tuple(resolution_clusters))


SENSITIVITY_FILE = "sensitivity.json"
SENSITIVITY_MANIFEST_FILE = "sensitivity-manifest.json"


def write_sensitivity(report: SensitivityReport, config: RunConfig) -> Dict[str, Any]:
    """
    Write the sensitivity report and its manifest through an ArtifactWriter.

    Returns:
        The manifest: run parameters, the swept values and the artifact list

    Raises:
        StageError: If the report cannot be written; partial files are removed
    """
    writer = ArtifactWriter(config.output_dir)
    try:
        with stage("export"):
            writer.write_json(SENSITIVITY_FILE, report.to_record(), "sensitivity")
            manifest = {
                "parameters": config_to_mapping(config),
                "sweep": {
                    "alphas": sorted({v.alpha for v in report.variants}),
                    "thetas": sorted({v.theta_abs for v in report.variants}),
                    "resolutions": [r for r, _ in report.resolution_clusters],
                },
                "artifacts": list(writer.entries),
            }
            writer.write_json(SENSITIVITY_MANIFEST_FILE, manifest, "")
    except Exception:
        writer.cleanup()
        raise
    logger.info("wrote sensitivity report to %s", config.output_dir)
    return manifest
