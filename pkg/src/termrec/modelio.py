"""Serialization for records and models.

One canonical JSON encoding (sorted keys, sorted tables, compact separators)
backs three things: the line-delimited record archive written by the CLI,
the self-contained model file, and the snapshot payload the service stores.
Snapshot ids are content-addressed: the SHA-256 of the canonical encoding of
analyzer + vocabulary + index + documents, truncated to 32 hex digits. Two
builds over identical inputs therefore share an id no matter where or when
they ran, while volatile fields (build time, owning repository, chosen
metric) stay outside the hash.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .corpus import ControlledVocabulary, Corpus, CorpusDocument, DCRecord
from .engine import CooccurrenceIndex, ModelSnapshot, build_index, validate_metric
from .errors import InputValidationError
from .text import AnalyzerConfig

MODEL_FORMAT = "termrec-model"
MODEL_VERSION = 1


def canonical_json(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def dt_to_str(value: datetime) -> str:
    return value.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


def dt_from_str(value: str) -> datetime:
    parsed = datetime.fromisoformat(value.replace("Z", "+00:00"))
    if parsed.tzinfo is None:
        parsed = parsed.replace(tzinfo=timezone.utc)
    return parsed.astimezone(timezone.utc)


# --- DCRecord codec (archive lines and the service's record rows) ----------


def record_to_obj(record: DCRecord) -> dict:
    return {
        "identifier": record.identifier,
        "titles": list(record.titles),
        "descriptions": list(record.descriptions),
        "subjects": list(record.subjects),
        "creators": list(record.creators),
        "date": dt_to_str(record.date) if record.date is not None else None,
        "language": record.language,
        "extras": {name: list(values) for name, values in sorted(record.extras.items())},
    }


def record_from_obj(obj: dict) -> DCRecord:
    return DCRecord(
        identifier=obj["identifier"],
        titles=tuple(obj.get("titles", ())),
        descriptions=tuple(obj.get("descriptions", ())),
        subjects=tuple(obj.get("subjects", ())),
        creators=tuple(obj.get("creators", ())),
        date=dt_from_str(obj["date"]) if obj.get("date") else None,
        language=obj.get("language"),
        extras={name: tuple(values) for name, values in obj.get("extras", {}).items()},
    )


def record_to_line(record: DCRecord) -> str:
    return canonical_json(record_to_obj(record))


def record_from_line(line: str) -> DCRecord:
    return record_from_obj(json.loads(line))


# --- model parts ------------------------------------------------------------


def analyzer_to_obj(analyzer: AnalyzerConfig) -> dict:
    return {
        "language": analyzer.language,
        "stopwords": sorted(analyzer.stopwords),
        "stemmer": analyzer.stemmer,
        "min_token_len": analyzer.min_token_len,
        "max_token_len": analyzer.max_token_len,
    }


def analyzer_from_obj(obj: dict) -> AnalyzerConfig:
    return AnalyzerConfig(
        language=obj["language"],
        stopwords=frozenset(obj["stopwords"]),
        stemmer=obj["stemmer"],
        min_token_len=obj["min_token_len"],
        max_token_len=obj["max_token_len"],
    )


def vocabulary_to_obj(vocabulary: ControlledVocabulary) -> dict:
    return {
        "name": vocabulary.name,
        "terms": sorted(vocabulary.terms),
        "explicit": vocabulary.explicit,
    }


def vocabulary_from_obj(obj: dict) -> ControlledVocabulary:
    return ControlledVocabulary(
        name=obj["name"], terms=frozenset(obj["terms"]), explicit=obj["explicit"]
    )


def index_to_obj(index: CooccurrenceIndex) -> dict:
    """Sorted-table encoding; doc_subjects is derived from documents on load."""
    return {
        "n_docs": index.n_docs,
        "df_free": [[term, df] for term, df in sorted(index.df_free.items())],
        "df_ctrl": [[term, df] for term, df in sorted(index.df_ctrl.items())],
        "df_pair": [[x, y, co] for (x, y), co in sorted(index.df_pair.items())],
        "postings": [[term, sorted(docs)] for term, docs in sorted(index.postings.items())],
    }


def index_from_obj(obj: dict, documents: tuple[CorpusDocument, ...]) -> CooccurrenceIndex:
    return CooccurrenceIndex(
        n_docs=obj["n_docs"],
        df_free={term: df for term, df in obj["df_free"]},
        df_ctrl={term: df for term, df in obj["df_ctrl"]},
        df_pair={(x, y): co for x, y, co in obj["df_pair"]},
        postings={term: frozenset(docs) for term, docs in obj["postings"]},
        doc_subjects={doc.doc_id: doc.subject_terms for doc in documents},
    )


def document_to_obj(doc: CorpusDocument) -> dict:
    return {
        "doc_id": doc.doc_id,
        "term_bag": [[term, count] for term, count in sorted(doc.term_bag.items())],
        "subjects": sorted(doc.subject_terms),
        "date": dt_to_str(doc.date) if doc.date is not None else None,
    }


def document_from_obj(obj: dict) -> CorpusDocument:
    return CorpusDocument(
        doc_id=obj["doc_id"],
        term_bag={term: count for term, count in obj["term_bag"]},
        subject_terms=frozenset(obj["subjects"]),
        date=dt_from_str(obj["date"]) if obj.get("date") else None,
    )


def compute_snapshot_id(
    analyzer_obj: dict, vocabulary_obj: dict, index_obj: dict, documents_obj: list[dict]
) -> str:
    content = canonical_json(
        {
            "analyzer": analyzer_obj,
            "vocabulary": vocabulary_obj,
            "index": index_obj,
            "documents": documents_obj,
        }
    )
    return hashlib.sha256(content.encode("utf-8")).hexdigest()[:32]


@dataclass(frozen=True)
class ModelBundle:
    """A servable snapshot together with the documents it was built from.

    The documents power the bibliometric reports and incremental rebuilds;
    the snapshot alone answers recommendation queries.
    """

    snapshot: ModelSnapshot
    documents: tuple[CorpusDocument, ...]

    @property
    def corpus(self) -> Corpus:
        return Corpus(
            documents=self.documents,
            vocabulary=self.snapshot.vocabulary,
            language=self.snapshot.analyzer.language,
        )


def build_bundle(
    corpus: Corpus,
    analyzer: AnalyzerConfig,
    default_metric: str = "jaccard",
    repository_id: str | None = None,
    built_at: datetime | None = None,
    min_pair_count: int = 1,
) -> ModelBundle:
    """Index the corpus and wrap it as a publishable, content-addressed model."""
    validate_metric(default_metric)
    index = build_index(corpus, min_pair_count=min_pair_count)
    documents = tuple(sorted(corpus.documents, key=lambda d: d.doc_id))
    snapshot_id = compute_snapshot_id(
        analyzer_to_obj(analyzer),
        vocabulary_to_obj(corpus.vocabulary),
        index_to_obj(index),
        [document_to_obj(d) for d in documents],
    )
    snapshot = ModelSnapshot(
        snapshot_id=snapshot_id,
        repository_id=repository_id,
        index=index,
        vocabulary=corpus.vocabulary,
        analyzer=analyzer,
        default_metric=default_metric,
        built_at=built_at if built_at is not None else datetime.now(timezone.utc),
    )
    return ModelBundle(snapshot=snapshot, documents=documents)


def dumps_model(bundle: ModelBundle) -> str:
    """Canonical single-line model encoding; stable across dump/load cycles."""
    snapshot = bundle.snapshot
    obj = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "built_at": dt_to_str(snapshot.built_at),
        "repository_id": snapshot.repository_id,
        "default_metric": snapshot.default_metric,
        "analyzer": analyzer_to_obj(snapshot.analyzer),
        "vocabulary": vocabulary_to_obj(snapshot.vocabulary),
        "index": index_to_obj(snapshot.index),
        "documents": [
            document_to_obj(d) for d in sorted(bundle.documents, key=lambda d: d.doc_id)
        ],
    }
    return canonical_json(obj) + "\n"


def loads_model(text: str) -> ModelBundle:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputValidationError(f"model file is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict) or obj.get("format") != MODEL_FORMAT:
        raise InputValidationError("not a model file")
    if obj.get("version") != MODEL_VERSION:
        raise InputValidationError(f"unsupported model version: {obj.get('version')!r}")
    try:
        analyzer = analyzer_from_obj(obj["analyzer"])
        vocabulary = vocabulary_from_obj(obj["vocabulary"])
        documents = tuple(document_from_obj(d) for d in obj["documents"])
        index = index_from_obj(obj["index"], documents)
        built_at = dt_from_str(obj["built_at"])
        default_metric = obj["default_metric"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputValidationError(f"malformed model file: {exc}") from exc
    if index.n_docs != len(documents):
        raise InputValidationError(
            f"model file is inconsistent: index says {index.n_docs} documents, "
            f"file carries {len(documents)}"
        )
    snapshot_id = compute_snapshot_id(
        obj["analyzer"], obj["vocabulary"], obj["index"], obj["documents"]
    )
    snapshot = ModelSnapshot(
        snapshot_id=snapshot_id,
        repository_id=obj.get("repository_id"),
        index=index,
        vocabulary=vocabulary,
        analyzer=analyzer,
        default_metric=default_metric,
        built_at=built_at,
    )
    return ModelBundle(snapshot=snapshot, documents=documents)


def save_model(bundle: ModelBundle, path: str | Path) -> None:
    Path(path).write_text(dumps_model(bundle), encoding="utf-8")


def load_model(path: str | Path) -> ModelBundle:
    return loads_model(Path(path).read_text(encoding="utf-8"))
