#!/usr/bin/env python3
"""
Command-line interface for themeflow - thematic evolution analysis
"""

import sys
import os
import argparse
import logging

from config import RunConfig, config_from_mapping, load_config
from corpus import CorpusFormat, KeywordField
from errors import StageError, ThemeFlowError
from lineage import SENSITIVITY_ALPHAS
from pipeline import export_from_cache, run, sensitivity, validate, write_sensitivity
from themes import AxisOrigin, cluster_key

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

# argparse destination -> RunConfig field
OVERRIDES = {
    "input": "input_path",
    "format": "input_format",
    "field": "keyword_field",
    "synonyms": "synonyms_path",
    "periods": "periods",
    "min_occurrence": "min_occurrence",
    "max_terms": "max_terms",
    "min_cumulative_freq": "min_cumulative_freq",
    "resolution": "resolution",
    "seed": "seed",
    "damping": "damping",
    "alpha": "alpha",
    "theta_abs": "theta_abs",
    "top_k": "top_k",
    "axis_origin": "axis_origin",
    "max_pathways": "max_pathways",
    "output": "output_dir",
}


def diagnostic(error: ThemeFlowError) -> str:
    """One-line message with stage and error code, e.g. '[ingest] empty-corpus: ...'."""
    if isinstance(error, StageError):
        return str(error)
    return f"{error.code}: {error}"


def float_list(text: str):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def build_config(args) -> RunConfig:
    """Defaults, then the YAML file, then explicit flags."""
    config = RunConfig()
    if args.config:
        config = load_config(args.config, config)
    overrides = {}
    for dest, name in OVERRIDES.items():
        value = getattr(args, dest, None)
        if value is not None:
            overrides[name] = value
    if args.no_svg:
        overrides["render_svg"] = False
    return config_from_mapping(overrides, config)


def configure_logging(args) -> None:
    level = logging.INFO
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr)


def print_manifest(manifest) -> None:
    counts = {}
    for entry in manifest["artifacts"]:
        counts[entry["kind"]] = counts.get(entry["kind"], 0) + 1
    print(f"Artifacts: {len(manifest['artifacts'])}")
    for kind in sorted(counts):
        print(f"  {kind:24s} {counts[kind]}")


def cmd_analyze(args, config):
    """Run the full analysis and write all artifacts."""
    outcome = run(config)
    if not outcome.ok:
        print(f"Error: {outcome.error}", file=sys.stderr)
        return outcome.status
    print(f"=== Thematic evolution written to {config.output_dir} ===\n")
    print_manifest(outcome.manifest)
    return 0


def cmd_export(args, config):
    """Re-emit artifacts from the cached detection stage."""
    outcome = export_from_cache(config)
    if not outcome.ok:
        print(f"Error: {outcome.error}", file=sys.stderr)
        return outcome.status
    print(f"Re-exported artifacts to {config.output_dir}\n")
    print_manifest(outcome.manifest)
    return 0


def cmd_sensitivity(args, config):
    """Re-run lineage and graph stages for several alpha/theta values."""
    report = sensitivity(config, args.alphas, args.thetas, args.resolutions)

    manifest = write_sensitivity(report, config)
    path = os.path.join(config.output_dir, manifest["artifacts"][0]["path"])

    print(f"=== Sensitivity (base alpha={report.base_alpha:g}, theta={report.base_theta_abs:g}) ===\n")
    print(f"{'alpha':>6} | {'theta':>6} | {'edges':>5} | {'added':>5} | {'removed':>7}")
    print("-" * 42)
    for v in report.variants:
        print(f"{v.alpha:6.3g} | {v.theta_abs:6.3g} | {len(v.edges):5d} | {len(v.added):5d} | {len(v.removed):7d}")
    print(f"\nBackbone edges: {len(report.backbone)}")
    print(f"Base edges preserved: {report.base_preserved}")
    if args.verbose:
        for a, b in sorted(report.backbone):
            print(f"  {cluster_key(a)} -> {cluster_key(b)}")
    for resolution, counts in report.resolution_clusters:
        print(f"Resolution {resolution:g}: clusters per period {list(counts)}")
    print(f"\nReport: {path}")
    return 0


def cmd_validate(args, config):
    """Check configuration and input only."""
    report = validate(config)
    print(f"Documents: {report['documents']}")
    for p in report["periods"]:
        print(f"  {p['label']:>12s}: {p['documents']}")
    if report["dropped_records"]:
        print("Dropped records:")
        for reason, n in sorted(report["dropped_records"].items()):
            print(f"  {reason}: {n}")
    print("OK")
    return 0


def add_run_options(p):
    """Flags shared by all commands; each mirrors a RunConfig field."""
    p.add_argument('-c', '--config', help='YAML configuration file')
    p.add_argument('-i', '--input', help='Bibliographic input file')
    p.add_argument('--format', choices=[f.value for f in CorpusFormat],
                   help='Input format (default: tabular-bibliographic)')
    p.add_argument('--field', choices=[f.value for f in KeywordField],
                   help='Keyword field (default: author-keywords)')
    p.add_argument('--synonyms', help='Two-column synonym file (variant<TAB>canonical)')
    p.add_argument('-p', '--periods', help='Periods, e.g. 2007-2012,2013-2018,2019-2025')
    p.add_argument('--min-occurrence', type=int, help='Minimum documents per term (default: 5)')
    p.add_argument('--max-terms', type=int, help='Maximum terms per period (default: 250)')
    p.add_argument('--min-cumulative-freq', type=int, help='Minimum cluster frequency (default: 10)')
    p.add_argument('--resolution', type=float, help='Louvain resolution (default: 1.0)')
    p.add_argument('--seed', type=int, help='Louvain seed (default: 42)')
    p.add_argument('--damping', type=float, help='PageRank damping (default: 0.85)')
    p.add_argument('--alpha', type=float, help='Inclusion/importance balance (default: 0.5)')
    p.add_argument('--theta-abs', type=float, help='Absolute lineage threshold (default: 0.10)')
    p.add_argument('--top-k', type=int, help='Strongest successors always kept (default: 1)')
    p.add_argument('--axis-origin', choices=[o.value for o in AxisOrigin],
                   help='Strategic diagram origin (default: median)')
    p.add_argument('--max-pathways', type=int, help='Pathway enumeration cap (default: 100000)')
    p.add_argument('--no-svg', action='store_true', help='Skip SVG rendering')
    p.add_argument('-o', '--output', help='Output directory (default: $THEMEFLOW_OUTPUT_DIR or themeflow-output)')
    p.add_argument('-v', '--verbose', action='store_true', help='Debug logging')
    p.add_argument('-q', '--quiet', action='store_true', help='Warnings only')


def main(argv=None):
    """Main CLI entry point."""
    parser = argparse.ArgumentParser(
        description='themeflow - thematic evolution analysis of keyword corpora',
        epilog='Lineage: L = alpha * weighted inclusion + (1 - alpha) * importance index'
    )

    subparsers = parser.add_subparsers(dest='command', help='Commands')

    # analyze command
    p_analyze = subparsers.add_parser('analyze', help='Full run, writes all artifacts')
    add_run_options(p_analyze)

    # sensitivity command
    p_sens = subparsers.add_parser('sensitivity', help='Alpha/threshold sweep on lineage and graph stages')
    add_run_options(p_sens)
    p_sens.add_argument('--alphas', type=float_list, default=list(SENSITIVITY_ALPHAS),
                        help='Alpha values (default: 0.3,0.5,0.7)')
    p_sens.add_argument('--thetas', type=float_list, help='theta_abs values (default: the configured one)')
    p_sens.add_argument('--resolutions', type=float_list, help='Louvain resolutions to compare cluster counts')

    # export command
    p_export = subparsers.add_parser('export', help='Re-emit artifacts from the detection cache')
    add_run_options(p_export)

    # validate command
    p_validate = subparsers.add_parser('validate', help='Check configuration and input only')
    add_run_options(p_validate)

    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        return 2

    configure_logging(args)

    try:
        config = build_config(args)
        if args.command == 'analyze':
            return cmd_analyze(args, config)
        elif args.command == 'sensitivity':
            return cmd_sensitivity(args, config)
        elif args.command == 'export':
            return cmd_export(args, config)
        elif args.command == 'validate':
            return cmd_validate(args, config)
    except ThemeFlowError as e:
        print(f"Error: {diagnostic(e)}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"Error: {e}", file=sys.stderr)
        return 1
    return 2


if __name__ == '__main__':
    sys.exit(main())
