"""Bibliometric reports over a corpus: frequency rankings, co-word pairs,
and per-year term trends.

All counts are document frequencies, matching the metric substrate: a term
occurring five times in one document still counts once.
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import Corpus, CorpusDocument, normalize_term
from .errors import InputValidationError

FIELDS = ("free", "subject")


def _doc_terms(doc: CorpusDocument, fieldname: str):
    if fieldname == "free":
        return doc.term_bag.keys()
    return doc.subject_terms


def _check_field(fieldname: str) -> None:
    if fieldname not in FIELDS:
        raise InputValidationError(
            f"unknown field {fieldname!r}; expected one of {', '.join(FIELDS)}"
        )


def top_terms(corpus: Corpus, fieldname: str = "subject", k: int = 10) -> list[tuple[str, int]]:
    """The k highest-document-frequency terms, ties in term order."""
    _check_field(fieldname)
    if k < 1:
        raise InputValidationError("k must be >= 1")
    counts: dict[str, int] = {}
    for doc in corpus.documents:
        for term in _doc_terms(doc, fieldname):
            counts[term] = counts.get(term, 0) + 1
    ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
    return ranked[:k]


def coword_pairs(corpus: Corpus, k: int = 10) -> list[tuple[tuple[str, str], int]]:
    """The k most frequent (free term, controlled term) co-occurrences."""
    if k < 1:
        raise InputValidationError("k must be >= 1")
    counts: dict[tuple[str, str], int] = {}
    for doc in corpus.documents:
        for free in doc.term_bag.keys():
            for subject in doc.subject_terms:
                key = (free, subject)
                counts[key] = counts.get(key, 0) + 1
    ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
    return ranked[:k]


@dataclass(frozen=True)
class TrendSeries:
    """Per-year document counts for one term.

    ``excluded`` counts matching documents without a parseable date, so
    bucket counts plus excluded always equals the term's document frequency.
    """

    term: str
    fieldname: str
    buckets: tuple[tuple[int, int], ...]
    excluded: int

    @property
    def total(self) -> int:
        return sum(count for _, count in self.buckets) + self.excluded


def term_trend(corpus: Corpus, term: str, fieldname: str = "subject") -> TrendSeries:
    """Count documents containing the term per calendar year.

    The term is normalized the same way stored subject terms were, so callers
    may pass raw input; free-field keys are analyzer stems and only match
    verbatim. A term absent from the corpus yields an empty series; absence
    is a valid answer for reporting, unlike in scoring.
    """
    _check_field(fieldname)
    term = normalize_term(term)
    by_year: dict[int, int] = {}
    excluded = 0
    for doc in corpus.documents:
        if term not in _doc_terms(doc, fieldname):
            continue
        if doc.date is None:
            excluded += 1
        else:
            year = doc.date.year
            by_year[year] = by_year.get(year, 0) + 1
    return TrendSeries(
        term=term,
        fieldname=fieldname,
        buckets=tuple(sorted(by_year.items())),
        excluded=excluded,
    )
