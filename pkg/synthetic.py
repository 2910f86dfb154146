"""
Synthetic corpora with known thematic structure.

``planted_evolution_corpus`` builds three periods whose themes continue,
split, emerge, merge and disappear in a known way:

    period 1 (2001-2003): S {s1..s4}, X {x1..x6}
    period 2 (2004-2006): S, Xa {x1..x3}, Xb {x4..x6}, Ma {m1..m3}, Mb {m4..m6}
    period 3 (2007-2009): S, M {m1..m6}

Every theme document carries all terms of its theme plus one unique noise
term, so each theme forms a uniform clique and the noise never survives term
filtering.
"""

from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from corpus import PeriodSpec

PLANTED_PERIODS = (
    PeriodSpec("2001-2003", 2001, 2003),
    PeriodSpec("2004-2006", 2004, 2006),
    PeriodSpec("2007-2009", 2007, 2009),
)

S = ("s1", "s2", "s3", "s4")
X = ("x1", "x2", "x3", "x4", "x5", "x6")
XA, XB = X[:3], X[3:]
M = ("m1", "m2", "m3", "m4", "m5", "m6")
MA, MB = M[:3], M[3:]

# (first year, [(theme terms, number of documents), ...]) per period
PLANTED_LAYOUT = (
    (2001, [(S, 20), (X, 20)]),
    (2004, [(S, 10), (XA, 8), (XB, 8), (MA, 7), (MB, 7)]),
    (2007, [(S, 15), (M, 25)]),
)


def planted_evolution_corpus() -> Dict[str, Any]:
    """
    Canonical-JSON corpus with the planted themes above (40 documents per period).

    Example:
        >>> corpus = parse_corpus(to_canonical_json(planted_evolution_corpus()))
        >>> len(corpus)
        120
    """
    documents = []
    n = 0
    for first_year, themes in PLANTED_LAYOUT:
        for terms, count in themes:
            for i in range(count):
                n += 1
                documents.append({
                    "id": f"d{n:04d}",
                    "year": first_year + i % 3,
                    "terms": list(terms) + [f"noise-{n:04d}"],
                })
    return {"documents": documents}


def planted_themes() -> Dict[str, Tuple[str, ...]]:
    """Name -> term tuple of every planted theme."""
    return {"S": S, "X": X, "Xa": XA, "Xb": XB, "Ma": MA, "Mb": MB, "M": M}


def random_corpus(rng: np.random.Generator, n_docs: int = 60, vocabulary: int = 30,
                  years: Sequence[int] = (2001, 2002, 2003), max_terms: int = 6,
                  id_prefix: str = "r") -> Dict[str, Any]:
    """
    Random canonical-JSON corpus.

    Term popularity follows a Zipf-like profile so that some terms are
    frequent and many are rare.

    Args:
        rng: Random generator (use a fixed seed in tests)
        n_docs: Number of documents
        vocabulary: Number of distinct candidate terms
        years: Publication years to draw from
        max_terms: Maximum number of terms per document
        id_prefix: Prefix of document identifiers
    """
    terms = [f"t{i:03d}" for i in range(vocabulary)]
    popularity = 1.0 / np.arange(1, vocabulary + 1)
    popularity /= popularity.sum()
    documents: List[Dict[str, Any]] = []
    for i in range(n_docs):
        k = int(rng.integers(1, max_terms + 1))
        chosen = rng.choice(vocabulary, size=min(k, vocabulary), replace=False, p=popularity)
        documents.append({
            "id": f"{id_prefix}{i:04d}",
            "year": int(rng.choice(list(years))),
            "terms": sorted(terms[j] for j in chosen),
        })
    return {"documents": documents}


def tabular_text(corpus: Dict[str, Any], delimiter: str = "\t",
                 keyword_column: str = "DE", extra: Optional[Dict[str, str]] = None) -> str:
    """Render a canonical-JSON corpus as a Web of Science style tabular export."""
    header = ["UT", "PY", keyword_column] + list(extra or {})
    lines = [delimiter.join(header)]
    for doc in corpus["documents"]:
        row = [doc["id"], str(doc["year"]), "; ".join(doc["terms"])] + list((extra or {}).values())
        lines.append(delimiter.join(row))
    return "\n".join(lines) + "\n"
