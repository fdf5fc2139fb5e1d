"""Co-occurrence index and the association metrics computed over it.

Everything here is document-frequency based: f(x) is the number of documents
whose analyzed text contains the free term x, f(y) the number of documents
annotated with the controlled term y, f(x,y) the number where both hold, and
N the corpus size. Two metrics are shipped:

* Jaccard similarity  f(x,y) / (f(x) + f(y) - f(x,y)), already in [0,1].
* A normalized log-frequency distance
  [max(log f(x), log f(y)) - log f(x,y)] / [log N - min(log f(x), log f(y))],
  in [0, +inf), mapped to a confidence via max(0, 1 - distance).

A third metric tag, "ml", is reserved for an external learned module and
always reports itself as unavailable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime

from .corpus import ControlledVocabulary, Corpus
from .errors import (
    EmptyQueryError,
    IndexBuildError,
    InputValidationError,
    MetricUnavailableError,
    ModelTooSmallError,
    UnknownTermError,
)
from .text import AnalyzerConfig, analyze, tokenize

AVAILABLE_METRICS = ("jaccard", "nwd")
RESERVED_METRICS = ("ml",)

DEFAULT_LIMIT = 10
DEFAULT_EXPANSION = 5
DEFAULT_CLOUD_SIZE = 30


def validate_metric(metric: str) -> str:
    if metric in AVAILABLE_METRICS:
        return metric
    if metric in RESERVED_METRICS:
        raise MetricUnavailableError(
            f"metric {metric!r} is reserved for an external module and is unavailable"
        )
    raise InputValidationError(
        f"unknown metric {metric!r}; available: {', '.join(AVAILABLE_METRICS)}"
    )


@dataclass(frozen=True)
class CooccurrenceIndex:
    """Document-frequency substrate for both metrics.

    ``doc_subjects`` mirrors the corpus assignments so phrase queries can be
    scored as virtual terms without keeping the corpus itself around.
    """

    n_docs: int
    df_free: dict[str, int]
    df_ctrl: dict[str, int]
    df_pair: dict[tuple[str, str], int]
    postings: dict[str, frozenset[str]]
    doc_subjects: dict[str, frozenset[str]]


def build_index(corpus: Corpus, min_pair_count: int = 1) -> CooccurrenceIndex:
    """Count document frequencies and co-occurrences for one corpus.

    Presence counts, not token multiplicities. Pairs observed fewer than
    ``min_pair_count`` times are pruned; the default keeps every observed
    pair, and pairs that never co-occur are never stored at all.
    """
    if min_pair_count < 1:
        raise InputValidationError("min_pair_count must be >= 1")
    postings: dict[str, set[str]] = {}
    df_ctrl: dict[str, int] = {}
    df_pair: dict[tuple[str, str], int] = {}
    doc_subjects: dict[str, frozenset[str]] = {}
    for doc in corpus.documents:
        free_terms = doc.term_bag.keys()
        for term in free_terms:
            postings.setdefault(term, set()).add(doc.doc_id)
        for subject in doc.subject_terms:
            df_ctrl[subject] = df_ctrl.get(subject, 0) + 1
        doc_subjects[doc.doc_id] = doc.subject_terms
        for term in free_terms:
            for subject in doc.subject_terms:
                key = (term, subject)
                df_pair[key] = df_pair.get(key, 0) + 1
    if not df_ctrl:
        raise IndexBuildError("corpus has no controlled-term assignments to index")
    if min_pair_count > 1:
        df_pair = {k: v for k, v in df_pair.items() if v >= min_pair_count}
    return CooccurrenceIndex(
        n_docs=corpus.n_docs,
        df_free={term: len(docs) for term, docs in postings.items()},
        df_ctrl=df_ctrl,
        df_pair=df_pair,
        postings={term: frozenset(docs) for term, docs in postings.items()},
        doc_subjects=doc_subjects,
    )


def jaccard(x: str, y: str, index: CooccurrenceIndex) -> float:
    """Set-overlap similarity of the two terms' document sets, in [0,1].

    An unstored pair means an empty intersection and scores 0.0; an unknown
    term is an error, which keeps "never seen" distinct from "never together".
    """
    fx = index.df_free.get(x)
    fy = index.df_ctrl.get(y)
    if fx is None:
        raise UnknownTermError(f"unknown free term: {x!r}")
    if fy is None:
        raise UnknownTermError(f"unknown controlled term: {y!r}")
    co = index.df_pair.get((x, y), 0)
    return _jaccard_value(co, fx, fy)


def nwd(x: str, y: str, index: CooccurrenceIndex) -> float | None:
    """Normalized log-frequency distance, or None where it is undefined.

    Undefined cases: the pair never co-occurs (no evidence), or
    min(f(x), f(y)) equals N (zero denominator). Natural logarithms are used
    internally; the ratio is invariant under any other log base.
    """
    fx = index.df_free.get(x)
    fy = index.df_ctrl.get(y)
    if fx is None:
        raise UnknownTermError(f"unknown free term: {x!r}")
    if fy is None:
        raise UnknownTermError(f"unknown controlled term: {y!r}")
    if index.n_docs < 2:
        raise ModelTooSmallError("the distance metric needs at least two documents")
    co = index.df_pair.get((x, y), 0)
    return _nwd_value(co, fx, fy, index.n_docs)


def _jaccard_value(co: int, fx: int, fy: int) -> float:
    if co == 0:
        return 0.0
    return co / (fx + fy - co)


def _nwd_value(co: int, fx: int, fy: int, n_docs: int) -> float | None:
    if co == 0 or min(fx, fy) == n_docs or n_docs < 2:
        return None
    numerator = max(math.log(fx), math.log(fy)) - math.log(co)
    denominator = math.log(n_docs) - min(math.log(fx), math.log(fy))
    return numerator / denominator


def _confidence(metric: str, co: int, fx: int, fy: int, n_docs: int) -> tuple[float, float] | None:
    """(confidence, raw_score) for one candidate, or None when undefined."""
    if metric == "jaccard":
        value = _jaccard_value(co, fx, fy)
        return value, value
    distance = _nwd_value(co, fx, fy, n_docs)
    if distance is None:
        return None
    return max(0.0, 1.0 - distance), distance


@dataclass(frozen=True)
class Recommendation:
    name: str
    confidence: float
    raw_score: float
    vocabulary: str
    metric: str


@dataclass(frozen=True)
class ModelSnapshot:
    """An immutable, servable recommender model."""

    snapshot_id: str
    repository_id: str | None
    index: CooccurrenceIndex
    vocabulary: ControlledVocabulary
    analyzer: AnalyzerConfig
    default_metric: str
    built_at: datetime


@dataclass(frozen=True)
class QueryDocSet:
    """The document evidence behind one query."""

    tokens: tuple[str, ...]
    doc_ids: frozenset[str]
    fallback: bool


def query_doc_set(query: str, snapshot: ModelSnapshot) -> QueryDocSet:
    """Resolve a query to the documents matching all of its analyzed tokens.

    Multi-token queries use the conjunction of per-token postings. When the
    conjunction is empty but at least one token is known, the fallback flag
    tells scoring to average per-token scores instead, trading precision for
    recall.
    """
    tokens = analyze(query, snapshot.analyzer)
    if not tokens:
        raise EmptyQueryError("query analyzed to zero tokens")
    index = snapshot.index
    sets = [index.postings.get(token, frozenset()) for token in set(tokens)]
    sets.sort(key=len)
    conjunction = sets[0]
    for s in sets[1:]:
        conjunction = conjunction & s
        if not conjunction:
            break
    fallback = not conjunction and any(sets)
    return QueryDocSet(tokens=tuple(tokens), doc_ids=frozenset(conjunction), fallback=fallback)


def _co_counts(doc_ids: frozenset[str], index: CooccurrenceIndex) -> dict[str, int]:
    counts: dict[str, int] = {}
    for doc_id in doc_ids:
        for subject in index.doc_subjects[doc_id]:
            counts[subject] = counts.get(subject, 0) + 1
    return counts


def recommend(
    query: str,
    snapshot: ModelSnapshot,
    metric: str | None = None,
    limit: int = DEFAULT_LIMIT,
) -> list[Recommendation]:
    """Rank controlled terms against the query's document evidence.

    The query doc set acts as a virtual free term: f(q) is its size and
    f(q,y) the overlap with each controlled term's documents. Candidates
    scoring 0 or undefined are dropped; the rest sort by confidence
    descending, ties broken by term order, truncated to ``limit``.

    Under the averaging fallback (empty conjunction, some known tokens) each
    known token is scored on its own and confidences are averaged; the
    reported raw score is then the confidence itself (Jaccard) or its
    distance-scale mirror 1 - confidence.
    """
    if limit < 1:
        raise InputValidationError("limit must be >= 1")
    chosen = validate_metric(metric if metric is not None else snapshot.default_metric)
    qds = query_doc_set(query, snapshot)
    index = snapshot.index

    scored: list[tuple[float, float, str]] = []
    if not qds.fallback:
        fq = len(qds.doc_ids)
        for name, co in _co_counts(qds.doc_ids, index).items():
            result = _confidence(chosen, co, fq, index.df_ctrl[name], index.n_docs)
            if result is None:
                continue
            confidence, raw = result
            if confidence > 0.0:
                scored.append((confidence, raw, name))
    else:
        known = [t for t in set(qds.tokens) if index.postings.get(t)]
        sums: dict[str, float] = {}
        for token in known:
            token_docs = index.postings[token]
            for name, co in _co_counts(token_docs, index).items():
                result = _confidence(chosen, co, len(token_docs), index.df_ctrl[name], index.n_docs)
                if result is None:
                    continue
                sums[name] = sums.get(name, 0.0) + result[0]
        for name, total in sums.items():
            confidence = total / len(known)
            if confidence > 0.0:
                raw = confidence if chosen == "jaccard" else 1.0 - confidence
                scored.append((confidence, raw, name))

    scored.sort(key=lambda item: (-item[0], item[2]))
    return [
        Recommendation(
            name=name,
            confidence=confidence,
            raw_score=raw,
            vocabulary=snapshot.vocabulary.name,
            metric=chosen,
        )
        for confidence, raw, name in scored[:limit]
    ]


@dataclass(frozen=True)
class ExpandedQuery:
    original: tuple[str, ...]
    added: tuple[str, ...]

    @property
    def terms(self) -> tuple[str, ...]:
        return self.original + self.added


def expand_query(
    query: str,
    snapshot: ModelSnapshot,
    metric: str | None = None,
    n: int = DEFAULT_EXPANSION,
) -> ExpandedQuery:
    """Append the top n recommended terms to the query's surface tokens.

    The original side keeps the query as typed (tokenized and case-folded,
    but neither stop-word-filtered nor stemmed), so n=0 echoes the query.
    Recommended names already present among the originals are not added
    twice.
    """
    if n < 0:
        raise InputValidationError("n must be >= 0")
    analyzed = analyze(query, snapshot.analyzer)
    if not analyzed:
        raise EmptyQueryError("query analyzed to zero tokens")
    original = tuple(tokenize(query, snapshot.analyzer))
    if n == 0:
        return ExpandedQuery(original=original, added=())
    present = set(original)
    added = tuple(
        rec.name
        for rec in recommend(query, snapshot, metric=metric, limit=n)
        if rec.name not in present
    )
    return ExpandedQuery(original=original, added=added)


@dataclass(frozen=True)
class CloudEntry:
    term: str
    weight: float
    bucket: int


def cloud_weights(
    query: str,
    snapshot: ModelSnapshot,
    metric: str | None = None,
    k: int = DEFAULT_CLOUD_SIZE,
) -> list[CloudEntry]:
    """Weight the top-k recommendations for a five-step font scale.

    Weights rescale confidence so the best term maps to 1.0 (a single or
    all-equal result set is all 1.0); buckets are 1 + floor(weight * 4)
    clamped to 5, so confidence order and bucket order never disagree.
    """
    if k < 1:
        raise InputValidationError("k must be >= 1")
    recs = recommend(query, snapshot, metric=metric, limit=k)
    if not recs:
        return []
    top = recs[0].confidence
    entries = []
    for rec in recs:
        weight = rec.confidence / top
        bucket = min(5, 1 + math.floor(weight * 4))
        entries.append(CloudEntry(term=rec.name, weight=weight, bucket=bucket))
    return entries
