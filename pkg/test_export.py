"""
Unit tests for artifact serialisation.
"""

import os
import tempfile
import unittest

import networkx as nx
import numpy as np

from evolution import EvolutionGraph, LineageEdge, PathwayReport, classify_patterns, extract_pathways
from export import (
    membership_text, pathway_report_text, round_float, sankey_record, strategic_diagram_record,
    to_canonical_json, write_graphml,
)
from coword import TermStats
from membership import MembershipMatrix
from themes import PeriodPartition, Quadrant, ThemeCluster


def small_graph():
    clusters = (
        ThemeCluster(0, 0, {"a", "b"}, pagerank={"a": 0.6, "b": 0.4}, label="a", fuzzy_size=4.0,
                     quadrant=Quadrant.MOTOR),
        ThemeCluster(1, 0, {"a"}, pagerank={"a": 1.0}, label="a", fuzzy_size=2.0),
        ThemeCluster(1, 1, {"b"}, pagerank={"b": 1.0}, label="b", fuzzy_size=2.0),
    )
    edges = (LineageEdge((0, 0), (1, 0), 0.7, 0.6, 0.8), LineageEdge((0, 0), (1, 1), 0.5, 0.4, 0.6))
    return EvolutionGraph(clusters, edges, 2)


class TestCanonicalJson(unittest.TestCase):
    """Test deterministic JSON text."""

    def test_format(self):
        """Test sorted keys, indentation and the trailing newline."""
        text = to_canonical_json({"b": 1, "a": [0.1 + 0.2, True, None]})
        self.assertEqual(text, '{\n  "a": [\n    0.3,\n    true,\n    null\n  ],\n  "b": 1\n}\n')

    def test_rounding(self):
        """Test 12 significant digits."""
        self.assertEqual(round_float(1 / 3), 0.333333333333)
        self.assertEqual(round_float(123456.7890123456), 123456.789012)

    def test_numpy_and_sets(self):
        """Test numpy scalars and sets are converted."""
        text = to_canonical_json({"x": np.float64(0.5), "n": np.int64(3), "s": {"b", "a"}})
        self.assertIn('"x": 0.5', text)
        self.assertIn('"n": 3', text)
        self.assertIn('"a",\n    "b"', text)

    def test_non_finite(self):
        """Test NaN is rejected."""
        with self.assertRaises(ValueError):
            to_canonical_json({"x": float("nan")})


class TestRecords(unittest.TestCase):
    """Test the per-module artifacts."""

    def test_strategic_diagram(self):
        """Test rows with top terms and occurrences."""
        partition = PeriodPartition(0, (small_graph().clusters[0],))
        rows = strategic_diagram_record(partition, [TermStats("a", 7), TermStats("b", 3)])
        self.assertEqual(rows[0]["cluster_id"], "P1-C1")
        self.assertEqual(rows[0]["quadrant"], "motor")
        self.assertEqual(rows[0]["top_terms"][0], {"term": "a", "pagerank": 0.6, "occurrence": 7})

    def test_membership_text(self):
        """Test header and row layout."""
        m = MembershipMatrix(0, ("d1", "d2"), ((0, 0), (0, 1)), np.array([[1.0, 0.0], [0.25, 0.75]]))
        lines = membership_text(m).splitlines()
        self.assertEqual(lines[0], "doc_id\tP1-C1\tP1-C2")
        self.assertEqual(lines[2], "d2\t0.25\t0.75")

    def test_sankey(self):
        """Test nodes and links."""
        record = sankey_record(small_graph())
        self.assertEqual([n["id"] for n in record["nodes"]], ["P1-C1", "P2-C1", "P2-C2"])
        self.assertEqual(record["links"][0], {"src": "P1-C1", "dst": "P2-C1", "value": 0.7})

    def test_pathway_report(self):
        """Test ranking order and the trivial marker."""
        g = small_graph()
        text = pathway_report_text(extract_pathways(g), g)
        lines = text.splitlines()
        self.assertTrue(lines[0].startswith("rank\tstrength"))
        self.assertIn("P1-C1 -> P2-C1", lines[1])
        self.assertEqual(len(lines), 3)

    def test_truncated_marker(self):
        """Test truncated reports say so."""
        text = pathway_report_text(PathwayReport((), truncated=True), small_graph())
        self.assertIn("truncated", text)

    def test_graphml(self):
        """Test the GraphML file reads back as the same DAG."""
        g = small_graph()
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "evolution.graphml")
            write_graphml(g, classify_patterns(g), path)
            back = nx.read_graphml(path)
        self.assertEqual(sorted(back.nodes), ["P1-C1", "P2-C1", "P2-C2"])
        self.assertEqual(sorted(back.edges), [("P1-C1", "P2-C1"), ("P1-C1", "P2-C2")])
        self.assertEqual(back.nodes["P1-C1"]["patterns"], "split-source")
        self.assertEqual(back.nodes["P2-C1"]["period"], 2)
        self.assertAlmostEqual(back.edges["P1-C1", "P2-C2"]["L"], 0.5)
        self.assertTrue(nx.is_directed_acyclic_graph(back))


if __name__ == '__main__':
    unittest.main()
