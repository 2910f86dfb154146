"""
Run configuration.

A RunConfig is assembled from field defaults, the THEMEFLOW_OUTPUT_DIR
environment variable, an optional YAML file and command-line overrides, in
that order of precedence. Example YAML:

    input: records.txt
    format: tabular-bibliographic
    field: author-keywords
    synonyms: synonyms.tsv
    periods:
      first_year: 2007
      cuts: [2012, 2018]
      last_year: 2025
    min_occurrence: 5
    max_terms: 250
    alpha: 0.5
    output: results
"""

import os
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any, Dict, List, Mapping, Optional, Tuple

import yaml

from corpus import ColumnMap, CorpusFormat, KeywordField, PeriodSpec, periods_from_cuts, validate_periods
from errors import ConfigError, ValidationError
from themes import AxisOrigin

OUTPUT_DIR_ENV = "THEMEFLOW_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "themeflow-output"


def default_output_dir() -> str:
    return os.environ.get(OUTPUT_DIR_ENV, DEFAULT_OUTPUT_DIR)


@dataclass(frozen=True)
class RunConfig:
    """All parameters of an analysis run."""

    input_path: str = ""
    input_format: CorpusFormat = CorpusFormat.TABULAR
    keyword_field: KeywordField = KeywordField.AUTHOR_KEYWORDS
    synonyms_path: Optional[str] = None
    periods: Tuple[PeriodSpec, ...] = ()
    min_occurrence: int = 5
    max_terms: int = 250
    min_cumulative_freq: int = 10
    resolution: float = 1.0
    seed: int = 42
    damping: float = 0.85
    tolerance: float = 1e-10
    max_iterations: int = 1000
    alpha: float = 0.5
    theta_abs: float = 0.10
    top_k: int = 1
    axis_origin: AxisOrigin = AxisOrigin.MEDIAN
    max_pathways: int = 100_000
    render_svg: bool = True
    delimiter: str = "\t"
    columns: ColumnMap = field(default_factory=ColumnMap)
    output_dir: str = field(default_factory=default_output_dir)

    def problems(self) -> List[str]:
        """All violated parameter ranges, empty when the config is valid."""
        issues = []
        if not self.input_path:
            issues.append("input path is required")
        if not self.periods:
            issues.append("at least one period is required")
        else:
            try:
                validate_periods(self.periods)
            except ValidationError as e:
                issues.append(str(e))
        if self.min_occurrence < 1:
            issues.append(f"min_occurrence must be >= 1 (got {self.min_occurrence})")
        if self.max_terms < 1:
            issues.append(f"max_terms must be >= 1 (got {self.max_terms})")
        if self.min_cumulative_freq < 0:
            issues.append(f"min_cumulative_freq must be >= 0 (got {self.min_cumulative_freq})")
        if self.resolution <= 0:
            issues.append(f"resolution must be > 0 (got {self.resolution})")
        if not 0 < self.damping < 1:
            issues.append(f"damping must lie in (0, 1) (got {self.damping})")
        if self.tolerance <= 0:
            issues.append(f"tolerance must be > 0 (got {self.tolerance})")
        if self.max_iterations < 1:
            issues.append(f"max_iterations must be >= 1 (got {self.max_iterations})")
        if not 0 <= self.alpha <= 1:
            issues.append(f"alpha must lie in [0, 1] (got {self.alpha})")
        if not 0 <= self.theta_abs <= 1:
            issues.append(f"theta_abs must lie in [0, 1] (got {self.theta_abs})")
        if self.top_k < 1:
            issues.append(f"top_k must be >= 1 (got {self.top_k})")
        if self.max_pathways < 1:
            issues.append(f"max_pathways must be >= 1 (got {self.max_pathways})")
        if len(self.delimiter) != 1:
            issues.append(f"delimiter must be a single character (got {self.delimiter!r})")
        return issues

    def validate(self) -> "RunConfig":
        """
        Raises:
            ConfigError: Listing every problem found
        """
        issues = self.problems()
        if issues:
            raise ConfigError("; ".join(issues))
        return self

    def detection_fingerprint(self) -> Dict[str, Any]:
        """Parameters that determine the detection stage (and so the cache)."""
        m = config_to_mapping(self)
        for key in ("alpha", "theta_abs", "top_k", "max_pathways", "render_svg", "output"):
            m.pop(key, None)
        return m


# ============================================================================
# Mapping conversion
# ============================================================================

_ALIASES = {
    "input": "input_path",
    "format": "input_format",
    "field": "keyword_field",
    "synonyms": "synonyms_path",
    "output": "output_dir",
}


def parse_periods(value: Any) -> Tuple[PeriodSpec, ...]:
    """
    Periods from a list of {label, start, end} mappings, a mapping with
    first_year/cuts/last_year, or a string such as '2007-2012,2013-2018'.
    """
    try:
        if isinstance(value, str):
            specs = []
            for part in value.split(","):
                start, end = part.strip().split("-")
                specs.append(PeriodSpec(f"{int(start)}-{int(end)}", int(start), int(end)))
            return tuple(specs)
        if isinstance(value, Mapping):
            return tuple(periods_from_cuts(int(value["first_year"]),
                                           [int(c) for c in value.get("cuts", [])],
                                           int(value["last_year"])))
        specs = []
        for item in value or []:
            start, end = int(item["start"]), int(item["end"])
            specs.append(PeriodSpec(str(item.get("label", f"{start}-{end}")), start, end))
        return tuple(specs)
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"invalid periods specification {value!r}: {e}") from e


def config_from_mapping(data: Mapping[str, Any], base: Optional[RunConfig] = None) -> RunConfig:
    """
    Overlay a mapping (YAML document or CLI overrides) on a base config.

    Keys may use field names or the short aliases input/format/field/synonyms/output.

    Raises:
        ConfigError: On unknown keys or invalid values
    """
    base = base or RunConfig()
    known = {f.name for f in fields(RunConfig)}
    updates: Dict[str, Any] = {}
    for key, value in data.items():
        name = _ALIASES.get(key, key)
        if name not in known:
            raise ConfigError(f"unknown configuration key {key!r}")
        if value is None and name != "synonyms_path":
            continue
        try:
            if name == "periods":
                value = parse_periods(value)
            elif name == "input_format":
                value = CorpusFormat(value)
            elif name == "keyword_field":
                value = KeywordField(value)
            elif name == "axis_origin":
                value = AxisOrigin(value)
            elif name == "columns":
                value = ColumnMap(**value) if isinstance(value, Mapping) else value
            elif name in ("min_occurrence", "max_terms", "min_cumulative_freq", "seed", "top_k",
                          "max_iterations", "max_pathways"):
                value = int(value)
            elif name in ("resolution", "damping", "tolerance", "alpha", "theta_abs"):
                value = float(value)
            elif name == "render_svg":
                value = bool(value)
            elif name in ("input_path", "output_dir", "synonyms_path", "delimiter"):
                value = None if value is None else str(value)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"invalid value for {key!r}: {value!r}") from e
        updates[name] = value
    return replace(base, **updates)


def load_config(path: str, base: Optional[RunConfig] = None) -> RunConfig:
    """
    Read a YAML configuration file.

    Relative input, synonym and output paths are resolved against the
    directory of the config file.

    Raises:
        ConfigError: If the file cannot be read or parsed
    """
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh) or {}
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    except yaml.YAMLError as e:
        raise ConfigError(f"invalid YAML in {path}: {e}") from e
    if not isinstance(data, Mapping):
        raise ConfigError(f"config {path} must contain a mapping")
    root = os.path.dirname(os.path.abspath(path))
    data = dict(data)
    for key in ("input", "input_path", "synonyms", "synonyms_path", "output", "output_dir"):
        value = data.get(key)
        if isinstance(value, str) and value and not os.path.isabs(value):
            data[key] = os.path.join(root, value)
    return config_from_mapping(data, base)


def config_to_mapping(config: RunConfig) -> Dict[str, Any]:
    """Plain, YAML/JSON-serialisable form of a config (used for the manifest echo)."""
    return {
        "input": config.input_path,
        "format": config.input_format.value,
        "field": config.keyword_field.value,
        "synonyms": config.synonyms_path,
        "periods": [
            {"label": p.label, "start": p.start_year, "end": p.end_year} for p in config.periods
        ],
        "min_occurrence": config.min_occurrence,
        "max_terms": config.max_terms,
        "min_cumulative_freq": config.min_cumulative_freq,
        "resolution": config.resolution,
        "seed": config.seed,
        "damping": config.damping,
        "tolerance": config.tolerance,
        "max_iterations": config.max_iterations,
        "alpha": config.alpha,
        "theta_abs": config.theta_abs,
        "top_k": config.top_k,
        "axis_origin": config.axis_origin.value,
        "max_pathways": config.max_pathways,
        "render_svg": config.render_svg,
        "delimiter": config.delimiter,
        "columns": asdict(config.columns),
        "output": config.output_dir,
    }
