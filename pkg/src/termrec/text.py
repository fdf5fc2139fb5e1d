"""Deterministic linguistic normalization: tokenize, remove stop words, stem.

The order is fixed: stop words are removed on the case-folded surface tokens
*before* stemming, so no stemmed form of a stop word can leak into a term
bag.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field
from importlib import resources

from .stem import german_light_stem, porter_stem

SUPPORTED_LANGUAGES = ("en", "de")

_STEMMERS = {
    "porter": porter_stem,
    "german-light": german_light_stem,
    "none": lambda token: token,
}

_DEFAULT_STEMMER = {"en": "porter", "de": "german-light"}


@dataclass(frozen=True)
class AnalyzerConfig:
    """Configuration for one repository's text analysis.

    ``stopwords`` entries must already be case-folded; token length bounds
    apply to the case-folded surface token before stemming.
    """

    language: str
    stopwords: frozenset[str] = field(default_factory=frozenset)
    stemmer: str = "none"
    min_token_len: int = 2
    max_token_len: int = 64

    def __post_init__(self):
        if self.language not in SUPPORTED_LANGUAGES:
            raise ValueError(f"unsupported language: {self.language!r}")
        if self.stemmer not in _STEMMERS:
            raise ValueError(f"unknown stemmer: {self.stemmer!r}")
        if not 1 <= self.min_token_len <= self.max_token_len:
            raise ValueError(
                "token length bounds must satisfy 1 <= min <= max, got "
                f"[{self.min_token_len}, {self.max_token_len}]"
            )


def load_stopword_file(text: str) -> frozenset[str]:
    """Parse a stop list: one token per line, '#' comments, blank lines ignored."""
    words = set()
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        words.add(line.casefold())
    return frozenset(words)


def builtin_stopwords(language: str) -> frozenset[str]:
    if language not in SUPPORTED_LANGUAGES:
        raise ValueError(f"unsupported language: {language!r}")
    text = (
        resources.files("termrec.data")
        .joinpath(f"stopwords_{language}.txt")
        .read_text(encoding="utf-8")
    )
    return load_stopword_file(text)


def default_analyzer(
    language: str,
    extra_stopwords: tuple[str, ...] = (),
    min_token_len: int = 2,
    max_token_len: int = 64,
) -> AnalyzerConfig:
    """Analyzer with the built-in stop list and the language's default stemmer."""
    stopwords = builtin_stopwords(language) | {w.casefold() for w in extra_stopwords}
    return AnalyzerConfig(
        language=language,
        stopwords=frozenset(stopwords),
        stemmer=_DEFAULT_STEMMER[language],
        min_token_len=min_token_len,
        max_token_len=max_token_len,
    )


def _is_token_char(ch: str) -> bool:
    if ch.isalpha() or ch.isdigit():
        return True
    return unicodedata.category(ch) in ("Mn", "Mc", "Me")


def tokenize(text: str, config: AnalyzerConfig) -> list[str]:
    """Split into case-folded tokens.

    Tokens are maximal runs of letters, digits and combining marks; a hyphen
    survives only between two such characters ("co-operation"). Tokens
    without a single letter are dropped, as are tokens whose surface length
    falls outside the configured bounds.
    """
    chunks: list[str] = []
    buf: list[str] = []
    for ch in text:
        if _is_token_char(ch) or ch == "-":
            buf.append(ch)
        elif buf:
            chunks.append("".join(buf))
            buf = []
    if buf:
        chunks.append("".join(buf))

    tokens: list[str] = []
    for chunk in chunks:
        parts = chunk.split("-")
        run: list[str] = []
        for part in parts + [""]:
            if part:
                run.append(part)
                continue
            if run:
                tokens.append("-".join(run))
                run = []
    out: list[str] = []
    for token in tokens:
        token = token.casefold()
        if not any(c.isalpha() for c in token):
            continue
        if not config.min_token_len <= len(token) <= config.max_token_len:
            continue
        out.append(token)
    return out


def remove_stopwords(tokens: list[str], config: AnalyzerConfig) -> list[str]:
    """Order-preserving removal of stop words; idempotent."""
    return [t for t in tokens if t not in config.stopwords]


def stem(token: str, config: AnalyzerConfig) -> str:
    return _STEMMERS[config.stemmer](token)


def analyze(text: str, config: AnalyzerConfig) -> list[str]:
    """tokenize -> remove_stopwords -> stem, multiplicities preserved."""
    return [stem(t, config) for t in remove_stopwords(tokenize(text, config), config)]
