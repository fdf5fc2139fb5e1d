"""Typed corpus construction from harvested records.

Free text (titles + descriptions) becomes analyzed term bags; dc:subject
values become controlled-term assignments, optionally filtered by an
uploaded vocabulary. Controlled terms are normalized for identity but never
stemmed, so they can be returned to users as-is.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone

from .errors import CorpusBuildError, DisjointVocabularyError, VocabularyUploadError
from .oai import RawOaiRecord
from .text import AnalyzerConfig, analyze

logger = logging.getLogger(__name__)

HARVESTED_VOCABULARY_NAME = "harvested-subjects"

_TRAILING_CODE = re.compile(r"\s*\(\d+\)$")

_DATE_LAYOUTS = ("%d.%m.%Y %H:%M", "%d.%m.%Y", "%Y")


def normalize_term(term: str) -> str:
    """Vocabulary identity: collapse whitespace, trim, case-fold. Idempotent."""
    return " ".join(term.split()).casefold()


def parse_dc_date(value: str) -> datetime | None:
    """Lenient dc:date parsing; returns None when no layout matches."""
    value = value.strip()
    if not value:
        return None
    try:
        parsed = datetime.fromisoformat(value.replace("Z", "+00:00"))
        if parsed.tzinfo is None:
            parsed = parsed.replace(tzinfo=timezone.utc)
        return parsed.astimezone(timezone.utc)
    except ValueError:
        pass
    for layout in _DATE_LAYOUTS:
        try:
            return datetime.strptime(value, layout).replace(tzinfo=timezone.utc)
        except ValueError:
            continue
    return None


@dataclass(frozen=True)
class DCRecord:
    identifier: str
    titles: tuple[str, ...] = ()
    descriptions: tuple[str, ...] = ()
    subjects: tuple[str, ...] = ()
    creators: tuple[str, ...] = ()
    date: datetime | None = None
    language: str | None = None
    extras: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self):
        if not self.identifier:
            raise ValueError("record identifier must be non-empty")
        for values in (self.titles, self.descriptions, self.subjects, self.creators):
            if any(not v for v in values):
                raise ValueError("field lists must not contain empty strings")


def to_dc_record(raw: RawOaiRecord) -> DCRecord:
    """Map a harvested record's element multimap into typed fields."""
    if raw.deleted:
        raise ValueError(f"deletion tombstone cannot become a document: {raw.identifier}")

    def values_of(name: str) -> tuple[str, ...]:
        return tuple(v for v in raw.dc_fields.get(name, ()) if v)

    date = None
    for value in values_of("date"):
        date = parse_dc_date(value)
        if date is not None:
            break
    languages = values_of("language")
    extras = {
        name: tuple(v for v in values if v)
        for name, values in raw.dc_fields.items()
        if name not in ("title", "description", "subject", "creator", "date", "language")
        and any(values)
    }
    return DCRecord(
        identifier=raw.identifier,
        titles=values_of("title"),
        descriptions=values_of("description"),
        subjects=values_of("subject"),
        creators=values_of("creator"),
        date=date,
        language=languages[0] if languages else None,
        extras=extras,
    )


@dataclass(frozen=True)
class SubjectSplitConfig:
    delimiter: str = ";"
    strip_codes: bool = True


def split_subjects(record: DCRecord, config: SubjectSplitConfig = SubjectSplitConfig()) -> list[str]:
    """Split dc:subject values into candidate controlled terms.

    Values are split on the delimiter and trimmed; with code stripping on, a
    single trailing "(digits)" classification code is removed. Duplicates
    within one record collapse, first occurrence wins.
    """
    terms: list[str] = []
    seen: set[str] = set()
    for value in record.subjects:
        for part in value.split(config.delimiter):
            term = part.strip()
            if config.strip_codes:
                term = _TRAILING_CODE.sub("", term).strip()
            if not term or term in seen:
                continue
            seen.add(term)
            terms.append(term)
    return terms


@dataclass(frozen=True)
class ControlledVocabulary:
    name: str
    terms: frozenset[str]
    explicit: bool

    def __post_init__(self):
        broken = [t for t in self.terms if normalize_term(t) != t]
        if broken:
            raise ValueError(f"terms must be normalization-fixed: {sorted(broken)[:3]}")


def parse_vocabulary_upload(body: str, name: str = "uploaded") -> ControlledVocabulary:
    """Parse an uploaded vocabulary: one term per line, '#' comments."""
    terms = set()
    for line in body.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        terms.add(normalize_term(line))
    terms.discard("")
    if not terms:
        raise VocabularyUploadError("vocabulary upload contains no usable terms")
    return ControlledVocabulary(name=name, terms=frozenset(terms), explicit=True)


@dataclass(frozen=True)
class CorpusDocument:
    doc_id: str
    term_bag: dict[str, int]
    subject_terms: frozenset[str]
    date: datetime | None


@dataclass(frozen=True)
class Corpus:
    documents: tuple[CorpusDocument, ...]
    vocabulary: ControlledVocabulary
    language: str

    @property
    def n_docs(self) -> int:
        return len(self.documents)


def build_corpus(
    records: list[DCRecord],
    analyzer: AnalyzerConfig,
    vocabulary_filter: ControlledVocabulary | None = None,
    split_config: SubjectSplitConfig = SubjectSplitConfig(),
) -> Corpus:
    """Build the corpus: analyzed term bags plus filtered subject assignments.

    Documents with neither free-text terms nor subject terms are dropped.
    Duplicate identifiers keep the last record (harvest update semantics);
    final ordering is by identifier, which makes rebuilds deterministic.
    """
    if not records:
        raise CorpusBuildError("cannot build a corpus from zero records")
    by_id: dict[str, DCRecord] = {}
    for record in records:
        by_id[record.identifier] = record

    documents: list[CorpusDocument] = []
    observed: set[str] = set()
    any_subject_before_filter = False
    for identifier in sorted(by_id):
        record = by_id[identifier]
        text = " ".join(tuple(record.titles) + tuple(record.descriptions))
        bag_terms = analyze(text, analyzer)
        bag: dict[str, int] = {}
        for term in bag_terms:
            bag[term] = bag.get(term, 0) + 1
        subjects = {normalize_term(t) for t in split_subjects(record, split_config)}
        subjects.discard("")
        if subjects:
            any_subject_before_filter = True
        if vocabulary_filter is not None:
            subjects &= vocabulary_filter.terms
        if not bag and not subjects:
            logger.debug("dropping empty document %s", identifier)
            continue
        observed |= subjects
        documents.append(
            CorpusDocument(
                doc_id=identifier,
                term_bag=bag,
                subject_terms=frozenset(subjects),
                date=record.date,
            )
        )

    if not observed:
        if vocabulary_filter is not None and any_subject_before_filter:
            raise DisjointVocabularyError(
                "vocabulary/corpus disjoint: the uploaded vocabulary matches no "
                "subject term in the corpus"
            )
        raise CorpusBuildError("corpus has no controlled subject terms")

    vocabulary = vocabulary_filter or ControlledVocabulary(
        name=HARVESTED_VOCABULARY_NAME, terms=frozenset(observed), explicit=False
    )
    return Corpus(
        documents=tuple(documents),
        vocabulary=vocabulary,
        language=analyzer.language,
    )
