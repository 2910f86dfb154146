"""
End-to-end tests of the analysis pipeline on the planted three-period corpus.
"""

import json
import os
import tempfile
import unittest
from dataclasses import replace
from unittest import mock

from config import RunConfig
from corpus import CorpusFormat, PeriodSpec
from evolution import Pattern
from export import to_canonical_json
from pipeline import ArtifactWriter, analyze, export_from_cache, run, sensitivity, validate, write_sensitivity
from synthetic import PLANTED_PERIODS, planted_evolution_corpus, planted_themes
from themes import PeriodPartition, ThemeCluster


class PlantedCorpusCase(unittest.TestCase):
    """Writes the planted corpus to a temporary directory."""

    def setUp(self):
        tmp = tempfile.TemporaryDirectory()
        self.addCleanup(tmp.cleanup)
        self.tmp = tmp.name
        self.input_path = os.path.join(self.tmp, "corpus.json")
        with open(self.input_path, "w", encoding="utf-8") as fh:
            fh.write(to_canonical_json(planted_evolution_corpus()))
        self.output = os.path.join(self.tmp, "out")
        self.config = RunConfig(
            input_path=self.input_path,
            input_format=CorpusFormat.CANONICAL_JSON,
            periods=PLANTED_PERIODS,
            render_svg=False,
            output_dir=self.output,
        )

    def theme_names(self, result):
        """(theme name, period) for every cluster id, matched by term set."""
        by_terms = {frozenset(terms): name for name, terms in planted_themes().items()}
        names = {}
        for partition in result.detection.partitions:
            for c in partition.clusters:
                names[c.id] = (by_terms[c.terms], c.period)
        return names

    def read(self, relpath):
        with open(os.path.join(self.output, relpath), "rb") as fh:
            return fh.read()


class TestPlantedEvolution(PlantedCorpusCase):
    """Test recovery of the planted themes and their evolution."""

    def setUp(self):
        super().setUp()
        self.result = analyze(self.config)
        self.names = self.theme_names(self.result)

    def test_clusters_per_period(self):
        """Test every planted theme is one cluster."""
        self.assertEqual([len(p) for p in self.result.detection.partitions], [2, 5, 2])
        self.assertEqual(sorted(self.names.values()), sorted([
            ("S", 0), ("X", 0),
            ("S", 1), ("Xa", 1), ("Xb", 1), ("Ma", 1), ("Mb", 1),
            ("S", 2), ("M", 2),
        ]))

    def test_noise_filtered(self):
        """Test singleton noise terms never reach the network."""
        for analysis in self.result.detection.periods:
            self.assertFalse(any(t.startswith("noise") for t in analysis.network.term_names))

    def test_edges(self):
        """Test the exact planted edge set."""
        edges = {(self.names[a], self.names[b]) for a, b in self.result.evolution.graph.edge_set()}
        self.assertEqual(edges, {
            (("S", 0), ("S", 1)), (("X", 0), ("Xa", 1)), (("X", 0), ("Xb", 1)),
            (("S", 1), ("S", 2)), (("Ma", 1), ("M", 2)), (("Mb", 1), ("M", 2)),
        })

    def test_patterns(self):
        """Test the planted evolutionary roles."""
        patterns = {self.names[cid]: labels for cid, labels in self.result.evolution.patterns.items()}
        self.assertEqual(patterns[("S", 0)], {Pattern.CONTINUATION})
        self.assertEqual(patterns[("S", 1)], {Pattern.CONTINUATION})
        self.assertEqual(patterns[("X", 0)], {Pattern.SPLIT_SOURCE})
        self.assertEqual(patterns[("Xa", 1)], {Pattern.DISAPPEARING})
        self.assertEqual(patterns[("Xb", 1)], {Pattern.DISAPPEARING})
        self.assertEqual(patterns[("Ma", 1)], {Pattern.EMERGENT})
        self.assertEqual(patterns[("Mb", 1)], {Pattern.EMERGENT})
        self.assertEqual(patterns[("M", 2)], {Pattern.MERGE_TARGET})

    def test_fuzzy_sizes(self):
        """Test crisp theme documents give integer fuzzy sizes."""
        sizes = {self.names[c.id]: c.fuzzy_size for p in self.result.detection.partitions for c in p.clusters}
        self.assertAlmostEqual(sizes[("S", 0)], 20.0)
        self.assertAlmostEqual(sizes[("Ma", 1)], 7.0)
        self.assertAlmostEqual(sizes[("M", 2)], 25.0)

    def test_pathways(self):
        """Test pathway count and the strongest pathway."""
        report = self.result.evolution.pathways
        # roots: S1, X1, Ma2, Mb2
        self.assertEqual(len(report), 5)
        self.assertFalse(report.truncated)
        strongest = [self.names[c] for c in report.pathways[0].clusters]
        self.assertIn(strongest, [[("Ma", 1), ("M", 2)], [("Mb", 1), ("M", 2)]])
        continuation = next(p for p in report if len(p.clusters) == 3)
        self.assertAlmostEqual(continuation.strength, 0.75 * 0.75, places=6)


class TestRun(PlantedCorpusCase):
    """Test artifact writing, caching and failure handling."""

    def test_manifest(self):
        """Test artifact kinds and counts."""
        outcome = run(self.config)
        self.assertEqual(outcome.status, 0, outcome.error)
        kinds = [a["kind"] for a in outcome.manifest["artifacts"]]
        self.assertEqual(kinds.count("strategic-diagram"), 3)
        self.assertEqual(kinds.count("lineage-matrix"), 2)
        self.assertEqual(kinds.count("comparison"), 2)
        self.assertEqual(kinds.count("evolution-graph"), 1)
        self.assertEqual(kinds.count("membership"), 3)
        for entry in outcome.manifest["artifacts"]:
            self.assertTrue(os.path.exists(os.path.join(self.output, entry["path"])), entry["path"])
        self.assertEqual(json.loads(self.read("manifest.json")), json.loads(to_canonical_json(outcome.manifest)))

    def test_lineage_artifact(self):
        """Test 1-based periods and cluster keys in the lineage JSON."""
        run(self.config)
        record = json.loads(self.read("lineage-1-2.json"))
        self.assertEqual((record["source_period"], record["target_period"]), (1, 2))
        self.assertEqual(len(record["entries"]), 2 * 5)
        self.assertTrue(all(e["src"].startswith("P1-") for e in record["entries"]))

    def test_summary(self):
        """Test period table and annual production."""
        run(self.config)
        summary = json.loads(self.read("summary.json"))
        self.assertEqual([p["documents"] for p in summary["periods"]], [40, 40, 40])
        self.assertEqual([p["clusters"] for p in summary["periods"]], [2, 5, 2])
        self.assertEqual(sum(summary["annual_production"].values()), 120)
        self.assertEqual(summary["evolution"]["edges"], 6)

    def test_two_periods(self):
        """Test a two-period run yields one transition."""
        cfg = replace(self.config, periods=PLANTED_PERIODS[:2])
        outcome = run(cfg)
        self.assertEqual(outcome.status, 0, outcome.error)
        kinds = [a["kind"] for a in outcome.manifest["artifacts"]]
        self.assertEqual(kinds.count("strategic-diagram"), 2)
        self.assertEqual(kinds.count("lineage-matrix"), 1)
        self.assertEqual(kinds.count("evolution-graph"), 1)

    def test_deterministic(self):
        """Test two runs give byte-identical text artifacts."""
        first = run(self.config)
        snapshot = {a["path"]: self.read(a["path"]) for a in first.manifest["artifacts"] if a["kind"] != "cache"}
        snapshot["manifest.json"] = self.read("manifest.json")
        second = run(self.config)
        self.assertEqual(second.status, 0)
        for path, data in snapshot.items():
            self.assertEqual(self.read(path), data, path)

    def test_export_from_cache(self):
        """Test re-export reproduces the full-run artifacts."""
        run(self.config)
        lineage = self.read("lineage-2-3.json")
        manifest = self.read("manifest.json")
        with self.assertLogs("pipeline", level="INFO") as logs:
            outcome = export_from_cache(self.config)
        self.assertEqual(outcome.status, 0, outcome.error)
        self.assertFalse(any("recomputing" in line for line in logs.output))
        self.assertEqual(self.read("lineage-2-3.json"), lineage)
        self.assertEqual(self.read("manifest.json"), manifest)

    def test_stale_cache_recomputed(self):
        """Test a changed detection parameter invalidates the cache."""
        run(self.config)
        cfg = replace(self.config, min_occurrence=6)
        with self.assertLogs("pipeline", level="INFO") as logs:
            outcome = export_from_cache(cfg)
        self.assertEqual(outcome.status, 0, outcome.error)
        self.assertTrue(any("recomputing" in line for line in logs.output))

    def test_changed_input_invalidates_cache(self):
        """Test a rewritten input file is re-read instead of served from the cache."""
        run(self.config)
        corpus = planted_evolution_corpus()
        removed = {f"d{n:04d}" for n in range(81, 86)}
        corpus["documents"] = [d for d in corpus["documents"] if d["id"] not in removed]
        with open(self.input_path, "w", encoding="utf-8") as fh:
            fh.write(to_canonical_json(corpus))

        with self.assertLogs("pipeline", level="INFO") as logs:
            outcome = export_from_cache(self.config)
        self.assertEqual(outcome.status, 0, outcome.error)
        self.assertTrue(any("input files changed" in line for line in logs.output))
        summary = self.read("summary.json")
        self.assertEqual([p["documents"] for p in json.loads(summary)["periods"]], [40, 40, 35])

        fresh = replace(self.config, output_dir=os.path.join(self.tmp, "fresh"))
        self.assertEqual(run(fresh).status, 0)
        with open(os.path.join(fresh.output_dir, "summary.json"), "rb") as fh:
            self.assertEqual(fh.read(), summary)

    def test_changed_synonyms_invalidate_cache(self):
        """Test the synonym table is part of the cache key."""
        synonyms = os.path.join(self.tmp, "synonyms.tsv")
        with open(synonyms, "w", encoding="utf-8") as fh:
            fh.write("# variant -> canonical\ns-one\ts1\n")
        cfg = replace(self.config, synonyms_path=synonyms)
        run(cfg)
        with open(synonyms, "w", encoding="utf-8") as fh:
            fh.write("# variant -> canonical\ns-two\ts2\n")
        with self.assertLogs("pipeline", level="INFO") as logs:
            outcome = export_from_cache(cfg)
        self.assertEqual(outcome.status, 0, outcome.error)
        self.assertTrue(any("input files changed" in line for line in logs.output))

    def test_unexpected_error_cleans_up(self):
        """Test a non-library exception still removes partial artifacts."""
        with mock.patch("pipeline.sankey_record", side_effect=TypeError("boom")):
            with self.assertRaises(TypeError):
                run(self.config)
        self.assertFalse(os.path.exists(self.output))

    def test_empty_corpus(self):
        """Test no documents in range: status 1, diagnostic, no artifacts."""
        cfg = replace(self.config, periods=(PeriodSpec("1990-1995", 1990, 1995),))
        outcome = run(cfg)
        self.assertEqual(outcome.status, 1)
        self.assertTrue(outcome.error.startswith("[ingest] empty-corpus"), outcome.error)
        self.assertFalse(os.path.exists(self.output) and os.listdir(self.output))

    def test_invalid_config(self):
        """Test config problems fail before any stage."""
        outcome = run(replace(self.config, alpha=2.0))
        self.assertEqual(outcome.status, 1)
        self.assertTrue(outcome.error.startswith("config-error"), outcome.error)

    def test_svg(self):
        """Test SVG renders are listed and written."""
        cfg = replace(self.config, render_svg=True)
        outcome = run(cfg)
        self.assertEqual(outcome.status, 0, outcome.error)
        svgs = [a["path"] for a in outcome.manifest["artifacts"] if a["path"].endswith(".svg")]
        self.assertIn("sankey.svg", svgs)
        self.assertIn("period-1/strategic-diagram.svg", svgs)
        self.assertIn(b"<svg", self.read("sankey.svg"))

    def test_validate(self):
        """Test input checks only."""
        report = validate(self.config)
        self.assertEqual(report["documents"], 120)
        self.assertEqual([p["documents"] for p in report["periods"]], [40, 40, 40])
        self.assertFalse(os.path.exists(self.output))


class TestSensitivity(PlantedCorpusCase):
    """Test alpha, threshold and resolution sweeps."""

    def test_alpha_sweep_stable(self):
        """Test the planted edges survive every alpha."""
        report = sensitivity(self.config, [0.3, 0.5, 0.7])
        self.assertEqual(len(report.variants), 3)
        self.assertEqual(report.total_differences, 0)
        self.assertTrue(report.base_preserved)
        self.assertFalse(report.backbone_changed)
        self.assertEqual(len(report.backbone), 6)

    def test_single_alpha_matches_base(self):
        """Test alpha 0.5 alone reproduces the base run."""
        report = sensitivity(self.config, [0.5])
        self.assertEqual(report.variants[0].edges, report.base_edges)
        self.assertEqual(report.variants[0].changed_patterns, ())

    def test_theta_sweep(self):
        """Test a high threshold keeps only top-ranked successors."""
        report = sensitivity(self.config, [0.5], thetas=[0.10, 0.99])
        strict = report.variants[1]
        # X1 keeps only its first-ranked split target
        self.assertEqual(len(strict.removed), 1)
        record = report.to_record()
        self.assertEqual(len(record["variants"]), 2)

    def test_resolutions(self):
        """Test resolution variants report cluster counts."""
        report = sensitivity(self.config, [0.5], resolutions=[1.0])
        self.assertEqual(report.resolution_clusters, ((1.0, (2, 5, 2)),))


    def test_alpha_independent_when_measures_agree(self):
        """Test alpha has no effect when inclusion equals importance for every pair."""
        # two-term clusters with equal PageRank sharing at most one term: I_w = Omega in {0, 0.5}
        layout = [
            [{"a", "b"}, {"c", "d"}],
            [{"b", "e"}, {"d", "f"}, {"c", "g"}],
            [{"e", "f"}, {"h", "i"}],
        ]
        base = analyze(self.config).detection
        periods = []
        for analysis, term_sets in zip(base.periods, layout):
            clusters = [ThemeCluster(analysis.period, k, frozenset(terms), pagerank={t: 1.0 for t in terms})
                        for k, terms in enumerate(term_sets)]
            periods.append(replace(analysis, partition=PeriodPartition(analysis.period, clusters)))
        detection = replace(base, periods=tuple(periods))

        report = sensitivity(self.config, [0.0, 0.25, 0.5, 0.75, 1.0], detection=detection)
        self.assertEqual(report.total_differences, 0)
        self.assertTrue(all(v.changed_patterns == () for v in report.variants))
        self.assertEqual(report.base_edges, {
            ((0, 0), (1, 0)), ((0, 1), (1, 1)), ((0, 1), (1, 2)), ((1, 0), (2, 0)), ((1, 1), (2, 0)),
        })

    def test_write_sensitivity(self):
        """Test the report goes through the artifact writer with a manifest."""
        report = sensitivity(self.config, [0.3, 0.7], thetas=[0.10, 0.20])
        manifest = write_sensitivity(report, self.config)
        self.assertEqual(manifest["artifacts"], [{"path": "sensitivity.json", "kind": "sensitivity"}])
        self.assertEqual(manifest["sweep"], {"alphas": [0.3, 0.7], "thetas": [0.1, 0.2], "resolutions": []})
        self.assertEqual(json.loads(self.read("sensitivity.json")), json.loads(to_canonical_json(report.to_record())))
        self.assertEqual(json.loads(self.read("sensitivity-manifest.json")),
                         json.loads(to_canonical_json(manifest)))

    def test_write_sensitivity_cleans_up(self):
        """Test a failed manifest write removes the report."""
        report = sensitivity(self.config, [0.5])
        with mock.patch("pipeline.config_to_mapping", side_effect=TypeError("boom")):
            with self.assertRaises(TypeError):
                write_sensitivity(report, self.config)
        self.assertFalse(os.path.exists(self.output))

class TestArtifactWriter(unittest.TestCase):
    """Test manifest bookkeeping and cleanup."""

    def test_cleanup_removes_created(self):
        """Test cleanup removes files and the directories it made."""
        with tempfile.TemporaryDirectory() as tmp:
            root = os.path.join(tmp, "out")
            writer = ArtifactWriter(root)
            writer.write_text("a/b.txt", "x\n", "text")
            writer.write_json("c.json", {"k": 1.0}, "json")
            self.assertEqual([e["path"] for e in writer.entries], ["a/b.txt", "c.json"])
            writer.cleanup()
            self.assertFalse(os.path.exists(root))
            self.assertEqual(writer.entries, [])


if __name__ == '__main__':
    unittest.main()
