"""
Tests for the command-line interface.
"""

import io
import json
import os
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout

from cli import main
from export import to_canonical_json
from synthetic import planted_evolution_corpus, tabular_text


class TestCli(unittest.TestCase):
    """Test commands end to end on the planted corpus."""

    def setUp(self):
        tmp = tempfile.TemporaryDirectory()
        self.addCleanup(tmp.cleanup)
        self.tmp = tmp.name
        self.json_path = os.path.join(self.tmp, "corpus.json")
        with open(self.json_path, "w", encoding="utf-8") as fh:
            fh.write(to_canonical_json(planted_evolution_corpus()))
        self.output = os.path.join(self.tmp, "out")
        self.common = ["--input", self.json_path, "--format", "canonical-json",
                       "--periods", "2001-2003,2004-2006,2007-2009", "--output", self.output, "--no-svg", "-q"]

    def call(self, *argv):
        out, err = io.StringIO(), io.StringIO()
        with redirect_stdout(out), redirect_stderr(err):
            status = main(list(argv))
        return status, out.getvalue(), err.getvalue()

    def test_analyze(self):
        """Test a full run writes the manifest."""
        status, out, _ = self.call("analyze", *self.common)
        self.assertEqual(status, 0)
        self.assertIn("lineage-matrix", out)
        with open(os.path.join(self.output, "manifest.json"), encoding="utf-8") as fh:
            manifest = json.load(fh)
        self.assertEqual(manifest["parameters"]["alpha"], 0.5)

    def test_flag_overrides(self):
        """Test flags reach the configuration echo."""
        status, _, _ = self.call("analyze", *self.common, "--alpha", "0.3", "--top-k", "2")
        self.assertEqual(status, 0)
        with open(os.path.join(self.output, "manifest.json"), encoding="utf-8") as fh:
            parameters = json.load(fh)["parameters"]
        self.assertEqual((parameters["alpha"], parameters["top_k"]), (0.3, 2))

    def test_tabular_input(self):
        """Test the default tabular format."""
        path = os.path.join(self.tmp, "records.txt")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(tabular_text(planted_evolution_corpus()))
        status, _, err = self.call("validate", "--input", path, "--periods", "2001-2009",
                                   "--output", self.output, "-q")
        self.assertEqual(status, 0, err)

    def test_sensitivity(self):
        """Test the alpha sweep report."""
        status, out, _ = self.call("sensitivity", *self.common, "--alphas", "0.3,0.5,0.7")
        self.assertEqual(status, 0)
        self.assertIn("Base edges preserved: True", out)
        with open(os.path.join(self.output, "sensitivity.json"), encoding="utf-8") as fh:
            report = json.load(fh)
        self.assertEqual(len(report["variants"]), 3)
        self.assertFalse(report["backbone_changed"])

    def test_sensitivity_manifest(self):
        """Test the sensitivity report is listed in its own manifest."""
        status, _, err = self.call("sensitivity", *self.common, "--alphas", "0.3,0.7")
        self.assertEqual(status, 0, err)
        with open(os.path.join(self.output, "sensitivity-manifest.json"), encoding="utf-8") as fh:
            manifest = json.load(fh)
        self.assertEqual(manifest["artifacts"], [{"path": "sensitivity.json", "kind": "sensitivity"}])
        self.assertEqual(manifest["sweep"]["alphas"], [0.3, 0.7])
        self.assertEqual(manifest["parameters"]["alpha"], 0.5)

    def test_export(self):
        """Test re-export after analyze."""
        self.assertEqual(self.call("analyze", *self.common)[0], 0)
        status, out, _ = self.call("export", *self.common)
        self.assertEqual(status, 0)
        self.assertIn("Re-exported", out)

    def test_validate(self):
        """Test input checks print period counts."""
        status, out, _ = self.call("validate", *self.common)
        self.assertEqual(status, 0)
        self.assertIn("Documents: 120", out)

    def test_empty_corpus_exit(self):
        """Test the empty-corpus diagnostic and exit status."""
        status, _, err = self.call("analyze", *self.common[:4], "--periods", "1990-1995",
                                   "--output", self.output, "-q")
        self.assertEqual(status, 1)
        self.assertIn("[ingest] empty-corpus", err)

    def test_config_error(self):
        """Test invalid parameters exit with status 1."""
        status, _, err = self.call("analyze", *self.common, "--alpha", "3")
        self.assertEqual(status, 1)
        self.assertIn("config-error", err)

    def test_usage(self):
        """Test no command prints help."""
        status, out, _ = self.call()
        self.assertEqual(status, 2)
        self.assertIn("usage", out)

    def test_bad_flag(self):
        """Test argparse usage errors exit with 2."""
        with self.assertRaises(SystemExit) as ctx:
            self.call("analyze", "--alpha", "high")
        self.assertEqual(ctx.exception.code, 2)


if __name__ == '__main__':
    unittest.main()
