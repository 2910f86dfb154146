"""
Corpus ingestion for co-word analysis.

Bibliographic records are parsed from a tabular export (Web of Science style,
one record per row with a header) or from the canonical JSON interchange
format, keyword strings are normalised (trimmed, lowercased, deduplicated),
optionally harmonised through a synonym table, and the documents are
partitioned into ordered, disjoint time periods.

Canonical JSON corpus:
    {"documents": [{"id": "d1", "year": 2010, "terms": ["h-index", ...]}, ...]}
"""

import csv
import io
import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from errors import EmptyCorpusError, ParseError, ValidationError

logger = logging.getLogger(__name__)

KEYWORD_DELIMITER = ";"


# ============================================================================
# Formats
# ============================================================================

class CorpusFormat(Enum):
    """Supported input formats."""

    TABULAR = "tabular-bibliographic"
    CANONICAL_JSON = "canonical-json"

    @property
    def description(self) -> str:
        """Get description of this format."""
        descriptions = {
            CorpusFormat.TABULAR: "Delimiter-separated export with a header row",
            CorpusFormat.CANONICAL_JSON: "{'documents': [{'id', 'year', 'terms'}]}",
        }
        return descriptions[self]


class KeywordField(Enum):
    """Which keyword field of a bibliographic record supplies the terms."""

    AUTHOR_KEYWORDS = "author-keywords"
    INDEX_KEYWORDS = "index-keywords"


@dataclass(frozen=True)
class ColumnMap:
    """Column names of a tabular export (Web of Science tags by default)."""

    id: str = "UT"
    year: str = "PY"
    author_keywords: str = "DE"
    index_keywords: str = "ID"

    def keyword_column(self, keyword_field: KeywordField) -> str:
        if keyword_field is KeywordField.AUTHOR_KEYWORDS:
            return self.author_keywords
        return self.index_keywords


# ============================================================================
# Domain types
# ============================================================================

@dataclass(frozen=True)
class Document:
    """One publication: identifier, publication year and normalised term set."""

    id: str
    year: int
    terms: FrozenSet[str] = frozenset()

    def __post_init__(self):
        if not isinstance(self.terms, frozenset):
            object.__setattr__(self, "terms", frozenset(self.terms))
        if not self.id:
            raise ValidationError("document id must be non-empty")
        if any(not term for term in self.terms):
            raise ValidationError(f"document {self.id} contains an empty term")


@dataclass(frozen=True)
class PeriodSpec:
    """A time period with inclusive year bounds."""

    label: str
    start_year: int
    end_year: int

    def __post_init__(self):
        if self.start_year > self.end_year:
            raise ValidationError(
                f"period {self.label}: start year {self.start_year} after end year {self.end_year}"
            )

    def contains(self, year: int) -> bool:
        return self.start_year <= year <= self.end_year


@dataclass(frozen=True)
class Corpus:
    """
    A set of documents, optionally partitioned into periods.

    ``period_of`` is empty until slice_periods assigns every retained document
    to exactly one period. ``dropped`` counts discarded records by reason.
    """

    documents: Tuple[Document, ...]
    periods: Tuple[PeriodSpec, ...] = ()
    period_of: Mapping[str, int] = field(default_factory=dict)
    dropped: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "documents", tuple(self.documents))
        object.__setattr__(self, "periods", tuple(self.periods))
        seen = set()
        for doc in self.documents:
            if doc.id in seen:
                raise ValidationError(f"duplicate document id: {doc.id}")
            seen.add(doc.id)

    def __len__(self) -> int:
        return len(self.documents)

    def documents_in(self, period: int) -> List[Document]:
        """Documents of one period, in corpus order."""
        if not 0 <= period < len(self.periods):
            raise ValidationError(f"period index {period} out of range")
        return [doc for doc in self.documents if self.period_of.get(doc.id) == period]

    def total_dropped(self) -> int:
        return sum(self.dropped.values())


def _merge_counts(*counts: Mapping[str, int]) -> Dict[str, int]:
    merged: Counter = Counter()
    for c in counts:
        merged.update(c)
    return dict(sorted(merged.items()))


# ============================================================================
# Normalisation
# ============================================================================

def normalize_terms(raw_terms: Iterable[str]) -> FrozenSet[str]:
    """Trim and lowercase every term; drop empty strings and duplicates."""
    return frozenset(t.strip().lower() for t in raw_terms if t and t.strip())


def split_keywords(cell: str) -> FrozenSet[str]:
    """Split a ';'-delimited keyword cell into normalised terms."""
    if not cell:
        return frozenset()
    return normalize_terms(cell.split(KEYWORD_DELIMITER))


# ============================================================================
# Parsing
# ============================================================================

def _decode(data: Union[bytes, str]) -> str:
    if isinstance(data, str):
        return data
    try:
        return data.decode("utf-8-sig")
    except UnicodeDecodeError as e:
        line = data[:e.start].count(b"\n") + 1
        raise ParseError(f"input is not valid UTF-8 ({e.reason})", line=line) from e


def _parse_year(value, line: int) -> Optional[int]:
    if value is None:
        return None
    if isinstance(value, bool):
        raise ParseError(f"invalid year {value!r}", line=line)
    if isinstance(value, int):
        return value
    text = str(value).strip()
    if not text:
        return None
    try:
        return int(text)
    except ValueError:
        raise ParseError(f"invalid year {text!r}", line=line) from None


def _parse_tabular(text: str, keyword_field: KeywordField, columns: ColumnMap,
                   delimiter: str) -> Tuple[List[Document], Counter]:
    reader = csv.reader(io.StringIO(text, newline=""), delimiter=delimiter)
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("missing header row", line=1) from None
    except csv.Error as e:
        raise ParseError(f"malformed header: {e}", line=1) from e

    header = [h.strip() for h in header]
    keyword_column = columns.keyword_column(keyword_field)
    for required in (columns.id, columns.year, keyword_column):
        if required not in header:
            raise ParseError(f"malformed header: missing column {required!r}", line=1)
    id_idx = header.index(columns.id)
    year_idx = header.index(columns.year)
    kw_idx = header.index(keyword_column)

    documents: List[Document] = []
    dropped: Counter = Counter()
    seen = set()
    try:
        for row in reader:
            line = reader.line_num
            if not any(cell.strip() for cell in row):
                continue

            def cell(idx: int) -> str:
                return row[idx] if idx < len(row) else ""

            year = _parse_year(cell(year_idx), line)
            if year is None:
                dropped["missing_year"] += 1
                continue
            terms = split_keywords(cell(kw_idx))
            if not terms:
                dropped["no_terms"] += 1
                continue
            doc_id = cell(id_idx).strip()
            if not doc_id:
                raise ParseError(f"record without {columns.id!r} identifier", line=line)
            if doc_id in seen:
                raise ParseError(f"duplicate identifier {doc_id!r}", line=line)
            seen.add(doc_id)
            documents.append(Document(doc_id, year, terms))
    except csv.Error as e:
        raise ParseError(f"malformed record: {e}", line=reader.line_num) from e
    return documents, dropped


def _parse_canonical_json(text: str) -> Tuple[List[Document], Counter]:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e.msg}", line=e.lineno) from e
    if not isinstance(payload, dict) or not isinstance(payload.get("documents"), list):
        raise ParseError("top-level object must contain a 'documents' list", line=1)

    documents: List[Document] = []
    dropped: Counter = Counter()
    seen = set()
    for position, record in enumerate(payload["documents"]):
        where = f"record {position}"
        if not isinstance(record, dict):
            raise ParseError(f"{where}: expected an object")
        year = _parse_year(record.get("year"), line=None)
        if year is None:
            dropped["missing_year"] += 1
            continue
        raw_terms = record.get("terms") or []
        if not isinstance(raw_terms, list) or not all(isinstance(t, str) for t in raw_terms):
            raise ParseError(f"{where}: 'terms' must be a list of strings")
        terms = normalize_terms(raw_terms)
        if not terms:
            dropped["no_terms"] += 1
            continue
        raw_id = record.get("id")
        doc_id = "" if raw_id is None else str(raw_id).strip()
        if not doc_id:
            raise ParseError(f"{where}: missing 'id'")
        if doc_id in seen:
            raise ParseError(f"{where}: duplicate identifier {doc_id!r}")
        seen.add(doc_id)
        documents.append(Document(doc_id, year, terms))
    return documents, dropped


def parse_corpus(data: Union[bytes, str],
                 fmt: Union[str, CorpusFormat] = CorpusFormat.CANONICAL_JSON,
                 keyword_field: Union[str, KeywordField] = KeywordField.AUTHOR_KEYWORDS,
                 columns: Optional[ColumnMap] = None,
                 delimiter: str = "\t") -> Corpus:
    """
    Parse bibliographic records into a Corpus.

    Args:
        data: Raw input (bytes are decoded as UTF-8)
        fmt: Input format
        keyword_field: Keyword field used as term source (tabular input only)
        columns: Column names for tabular input
        delimiter: Field delimiter for tabular input

    Returns:
        Corpus without period assignment; records lacking a year or terms
        are dropped and counted in ``Corpus.dropped``.

    Raises:
        ParseError: If the input cannot be decoded or the header is malformed
        EmptyCorpusError: If no valid record remains
    """
    fmt = CorpusFormat(fmt)
    keyword_field = KeywordField(keyword_field)
    text = _decode(data)

    if fmt is CorpusFormat.TABULAR:
        documents, dropped = _parse_tabular(text, keyword_field, columns or ColumnMap(), delimiter)
    else:
        documents, dropped = _parse_canonical_json(text)

    if not documents:
        raise EmptyCorpusError(f"no valid records ({sum(dropped.values())} dropped)")
    logger.info("parsed %d documents (%d dropped)", len(documents), sum(dropped.values()))
    return Corpus(documents=tuple(documents), dropped=_merge_counts(dropped))


# ============================================================================
# Harmonisation
# ============================================================================

@dataclass(frozen=True)
class SynonymTable:
    """Mapping from variant terms to canonical terms, looked up case-insensitively."""

    entries: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        normalized = {}
        for variant, canonical in self.entries.items():
            v, c = variant.strip().lower(), canonical.strip().lower()
            if not v or not c:
                raise ValidationError(f"empty synonym entry: {variant!r} -> {canonical!r}")
            if v != c:
                normalized[v] = c
        object.__setattr__(self, "entries", dict(sorted(normalized.items())))

    def __len__(self) -> int:
        return len(self.entries)

    def validate(self) -> None:
        """
        Check that no canonical target is itself a variant.

        Raises:
            ValidationError: On a variant -> variant chain
        """
        chains = sorted(v for v, c in self.entries.items() if c in self.entries)
        if chains:
            first = chains[0]
            raise ValidationError(
                f"synonym chain: {first!r} -> {self.entries[first]!r} -> "
                f"{self.entries[self.entries[first]]!r}"
            )

    def lookup(self, term: str) -> str:
        key = term.strip().lower()
        return self.entries.get(key, key)


def load_synonyms(data: Union[bytes, str], delimiter: str = "\t") -> SynonymTable:
    """
    Read a two-column synonym file: variant, then canonical.

    Blank lines and lines starting with '#' are ignored.
    """
    text = _decode(data)
    entries: Dict[str, str] = {}
    for line_no, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split(delimiter)
        if len(parts) != 2:
            raise ParseError(f"expected 2 columns, found {len(parts)}", line=line_no)
        entries[parts[0]] = parts[1]
    table = SynonymTable(entries)
    table.validate()
    return table


def harmonize(corpus: Corpus, table: SynonymTable) -> Corpus:
    """
    Replace every variant term by its canonical form.

    Raises:
        ValidationError: If the table contains a variant -> variant chain
    """
    table.validate()
    if not table.entries:
        return corpus
    documents = tuple(
        Document(doc.id, doc.year, frozenset(table.lookup(t) for t in doc.terms))
        for doc in corpus.documents
    )
    return Corpus(documents, corpus.periods, corpus.period_of, corpus.dropped)


# ============================================================================
# Periods
# ============================================================================

def validate_periods(specs: Sequence[PeriodSpec]) -> None:
    """
    Check that period specs are non-empty, ascending and disjoint.

    Raises:
        ValidationError: On overlapping or unordered specs
    """
    if not specs:
        raise ValidationError("at least one period is required")
    for prev, cur in zip(specs, specs[1:]):
        if cur.start_year <= prev.end_year:
            raise ValidationError(
                f"periods {prev.label} ({prev.start_year}-{prev.end_year}) and "
                f"{cur.label} ({cur.start_year}-{cur.end_year}) overlap or are unordered"
            )


def periods_from_cuts(first_year: int, cuts: Sequence[int], last_year: int) -> List[PeriodSpec]:
    """
    Build periods from cut points; each cut year closes a period.

    Example:
        >>> [(p.start_year, p.end_year) for p in periods_from_cuts(2007, [2012, 2018], 2025)]
        [(2007, 2012), (2013, 2018), (2019, 2025)]
    """
    bounds = [first_year - 1] + sorted(cuts) + [last_year]
    specs = [PeriodSpec(f"{lo + 1}-{hi}", lo + 1, hi) for lo, hi in zip(bounds, bounds[1:])]
    validate_periods(specs)
    return specs


def slice_periods(corpus: Corpus, specs: Sequence[PeriodSpec]) -> Corpus:
    """
    Assign each document to the period containing its year.

    Documents outside every period are dropped and counted as ``out_of_range``.

    Raises:
        ValidationError: If specs overlap or are not ascending
    """
    specs = tuple(specs)
    validate_periods(specs)
    kept: List[Document] = []
    period_of: Dict[str, int] = {}
    out_of_range = 0
    for doc in corpus.documents:
        index = next((i for i, spec in enumerate(specs) if spec.contains(doc.year)), None)
        if index is None:
            out_of_range += 1
            continue
        kept.append(doc)
        period_of[doc.id] = index
    if out_of_range:
        logger.info("%d documents fall outside all periods", out_of_range)
    dropped = _merge_counts(corpus.dropped, {"out_of_range": out_of_range} if out_of_range else {})
    return Corpus(tuple(kept), specs, period_of, dropped)


def annual_production(corpus: Corpus) -> Dict[int, int]:
    """Number of documents per publication year, ascending by year."""
    return dict(sorted(Counter(doc.year for doc in corpus.documents).items()))


def period_sizes(corpus: Corpus) -> List[int]:
    """Number of documents per period."""
    counts = Counter(corpus.period_of.values())
    return [counts.get(i, 0) for i in range(len(corpus.periods))]
