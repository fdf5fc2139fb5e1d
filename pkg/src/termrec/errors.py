"""Exception hierarchy shared across the harvesting, modelling and serving layers."""

from __future__ import annotations


class TermrecError(Exception):
    """Base class for all errors raised by this package."""


# --- harvesting ---------------------------------------------------------


class TransportError(TermrecError):
    """Network-level failure: unreachable host, timeout, retry budget exhausted."""


class ProtocolError(TermrecError):
    """The peer answered, but not with a usable OAI-PMH document."""


class OaiParseError(ProtocolError):
    """The response body is not well-formed XML."""

    def __init__(self, message: str, byte_offset: int | None = None):
        super().__init__(message)
        self.byte_offset = byte_offset


class HarvestError(TermrecError):
    """A harvest failed mid-stream; carries the resumption token that was rejected."""

    def __init__(self, message: str, token: str | None = None):
        super().__init__(message)
        self.token = token


# --- corpus building -----------------------------------------------------


class CorpusBuildError(TermrecError):
    """The record set cannot be turned into a usable corpus."""


class DisjointVocabularyError(CorpusBuildError):
    """An uploaded vocabulary shares no term with the harvested subjects."""


class VocabularyUploadError(TermrecError):
    """An uploaded vocabulary file contains no usable terms."""


# --- recommendation engine ------------------------------------------------


class IndexBuildError(TermrecError):
    """The corpus has no controlled-term assignments to index."""


class UnknownTermError(TermrecError):
    """A term is absent from the index; distinct from a similarity of zero."""


class EmptyQueryError(TermrecError):
    """The query analyzed to zero tokens (e.g. it was all stop words)."""


class ModelTooSmallError(TermrecError):
    """The distance metric needs at least two documents."""


class MetricUnavailableError(TermrecError):
    """The requested recommender module is reserved but not shipped."""


# --- service --------------------------------------------------------------


class AuthenticationError(TermrecError):
    """Missing, malformed, unknown or revoked credential."""


class ConflictError(TermrecError):
    """The request collides with existing state (duplicate name, running job)."""


class NotFoundError(TermrecError):
    """The entity does not exist or is not visible to the caller."""


class NoModelError(TermrecError):
    """The repository has no published model snapshot yet."""


class InputValidationError(TermrecError):
    """A request or configuration value fails validation."""


class ConfigError(TermrecError):
    """A configuration file or environment override is invalid."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key
