"""OAI-PMH harvesting client: paged ListRecords, resumption tokens, polite retry.

Only the ``oai_dc`` metadata format is supported. All requests are plain
HTTP GETs; pagination follows the resumptionToken chain until it is absent
or empty.
"""

from __future__ import annotations

import logging
import time
import urllib.parse
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Callable, Iterator
from xml.parsers import expat

import requests

from .errors import HarvestError, OaiParseError, ProtocolError, TransportError

logger = logging.getLogger(__name__)

OAI_NS = "http://www.openarchives.org/OAI/2.0/"
OAI_DC_NS = "http://www.openarchives.org/OAI/2.0/oai_dc/"
DC_NS = "http://purl.org/dc/elements/1.1/"

DC_ELEMENTS = frozenset(
    (
        "title", "creator", "subject", "description", "publisher",
        "contributor", "date", "type", "format", "identifier", "source",
        "language", "relation", "coverage", "rights",
    )
)

OAI_ERROR_CODES = frozenset(
    (
        "badArgument", "badResumptionToken", "badVerb",
        "cannotDisseminateFormat", "idDoesNotExist", "noRecordsMatch",
        "noMetadataFormats", "noSetHierarchy",
    )
)

MAX_PAGE_BYTES = 64 * 1024 * 1024


def parse_utc_datestamp(value: str) -> datetime:
    """Parse an OAI datestamp at day or second granularity, normalized to UTC."""
    value = value.strip()
    for fmt in ("%Y-%m-%dT%H:%M:%SZ", "%Y-%m-%d"):
        try:
            return datetime.strptime(value, fmt).replace(tzinfo=timezone.utc)
        except ValueError:
            continue
    try:
        parsed = datetime.fromisoformat(value.replace("Z", "+00:00"))
    except ValueError:
        raise ValueError(f"unparseable datestamp: {value!r}") from None
    if parsed.tzinfo is None:
        parsed = parsed.replace(tzinfo=timezone.utc)
    return parsed.astimezone(timezone.utc)


def format_utc_datestamp(value: datetime) -> str:
    """Second-granularity OAI datestamp in UTC."""
    if value.tzinfo is None:
        value = value.replace(tzinfo=timezone.utc)
    return value.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _to_wire_precision(value: datetime | None) -> datetime | None:
    # Window bounds must be compared at the same second granularity they are
    # transmitted at, or records stamped inside the truncated second would be
    # fetched and then wrongly dropped client-side.
    if value is None:
        return None
    if value.tzinfo is None:
        value = value.replace(tzinfo=timezone.utc)
    return value.astimezone(timezone.utc).replace(microsecond=0)


@dataclass(frozen=True)
class OaiEndpoint:
    base_url: str
    set_spec: str | None = None
    metadata_prefix: str = "oai_dc"

    def __post_init__(self):
        parsed = urllib.parse.urlparse(self.base_url)
        if parsed.scheme not in ("http", "https") or not parsed.netloc:
            raise ValueError(f"base_url must be an absolute http(s) URL: {self.base_url!r}")
        if not self.metadata_prefix:
            raise ValueError("metadata_prefix must be non-empty")


@dataclass(frozen=True)
class RawOaiRecord:
    identifier: str
    datestamp: datetime
    set_specs: tuple[str, ...] = ()
    dc_fields: dict[str, tuple[str, ...]] = field(default_factory=dict)
    deleted: bool = False

    def __post_init__(self):
        if not self.identifier:
            raise ValueError("record identifier must be non-empty")
        unknown = set(self.dc_fields) - DC_ELEMENTS
        if unknown:
            raise ValueError(f"unknown Dublin Core elements: {sorted(unknown)}")
        if self.deleted and self.dc_fields:
            raise ValueError("deleted records must carry no metadata")


@dataclass(frozen=True)
class OaiIdentity:
    repository_name: str
    base_url: str
    admin_emails: tuple[str, ...]
    earliest_datestamp: str
    granularity: str


@dataclass(frozen=True)
class OaiPage:
    records: tuple[RawOaiRecord, ...]
    resumption_token: str | None
    error_code: str | None


@dataclass(frozen=True)
class HarvestResult:
    records: tuple[RawOaiRecord, ...]
    pages_fetched: int
    completed_at: datetime
    endpoint: OaiEndpoint

    def __post_init__(self):
        if self.records and self.pages_fetched < 1:
            raise ValueError("non-empty harvest must have fetched at least one page")


@dataclass(frozen=True)
class RetryPolicy:
    max_attempts: int = 5
    initial_delay: float = 1.0
    max_delay: float = 60.0


class HttpTransport:
    """Requests-backed GET transport with 5xx retry and Retry-After support."""

    def __init__(
        self,
        retry: RetryPolicy = RetryPolicy(),
        timeout: float = 60.0,
        session: requests.Session | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.retry = retry
        self.timeout = timeout
        self.session = session or requests.Session()
        self._sleep = sleep

    def get(self, url: str, params: dict[str, str]) -> bytes:
        delay = self.retry.initial_delay
        last_error: str = "no attempts made"
        for attempt in range(1, self.retry.max_attempts + 1):
            try:
                response = self.session.get(url, params=params, timeout=self.timeout)
            except requests.RequestException as exc:
                last_error = str(exc)
                logger.warning("request to %s failed (attempt %d): %s", url, attempt, exc)
                if attempt < self.retry.max_attempts:
                    self._sleep(min(delay, self.retry.max_delay))
                    delay *= 2
                continue
            if response.status_code >= 500:
                last_error = f"HTTP {response.status_code}"
                if attempt < self.retry.max_attempts:
                    self._sleep(self._retry_delay(response, delay))
                    delay *= 2
                continue
            if response.status_code != 200:
                raise ProtocolError(f"HTTP {response.status_code} from {url}")
            content_type = response.headers.get("Content-Type", "")
            if content_type and "xml" not in content_type.split(";")[0]:
                raise ProtocolError(
                    f"not an OAI-PMH response (content-type {content_type.split(';')[0]})"
                )
            return response.content
        raise TransportError(f"retry budget exhausted for {url}: {last_error}")

    def _retry_delay(self, response: requests.Response, fallback: float) -> float:
        retry_after = response.headers.get("Retry-After")
        if retry_after is not None:
            try:
                return min(float(retry_after), self.retry.max_delay)
            except ValueError:
                pass
        return min(fallback, self.retry.max_delay)


def _local_name(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _parse_xml(body: bytes) -> ET.Element:
    if len(body) > MAX_PAGE_BYTES:
        raise ProtocolError(f"page body exceeds {MAX_PAGE_BYTES} bytes")
    try:
        return ET.fromstring(body)
    except ET.ParseError as exc:
        parser = expat.ParserCreate()
        offset = None
        try:
            parser.Parse(body, True)
        except expat.ExpatError:
            offset = parser.ErrorByteIndex
        raise OaiParseError(
            f"not well-formed XML at byte {offset}: {exc}", byte_offset=offset
        ) from exc


def _oai_root(body: bytes) -> ET.Element:
    root = _parse_xml(body)
    if root.tag != f"{{{OAI_NS}}}OAI-PMH":
        raise ProtocolError(f"not an OAI-PMH response (root element {root.tag!r})")
    return root


def _parse_record(elem: ET.Element) -> RawOaiRecord | None:
    header = elem.find(f"{{{OAI_NS}}}header")
    if header is None:
        logger.warning("record without header skipped")
        return None
    identifier_elem = header.find(f"{{{OAI_NS}}}identifier")
    identifier = (identifier_elem.text or "").strip() if identifier_elem is not None else ""
    if not identifier:
        logger.warning("record without identifier skipped")
        return None
    datestamp_elem = header.find(f"{{{OAI_NS}}}datestamp")
    if datestamp_elem is None or not (datestamp_elem.text or "").strip():
        logger.warning("record %s without datestamp skipped", identifier)
        return None
    try:
        datestamp = parse_utc_datestamp(datestamp_elem.text)
    except ValueError as exc:
        logger.warning("record %s skipped: %s", identifier, exc)
        return None
    set_specs = tuple(
        (s.text or "").strip()
        for s in header.findall(f"{{{OAI_NS}}}setSpec")
        if (s.text or "").strip()
    )
    deleted = header.get("status") == "deleted"
    dc_fields: dict[str, tuple[str, ...]] = {}
    if not deleted:
        dc = elem.find(f"{{{OAI_NS}}}metadata/{{{OAI_DC_NS}}}dc")
        if dc is not None:
            collected: dict[str, list[str]] = {}
            for child in dc:
                if not child.tag.startswith(f"{{{DC_NS}}}"):
                    continue
                name = _local_name(child.tag)
                if name not in DC_ELEMENTS:
                    logger.debug("ignoring non-DC element %s in record %s", name, identifier)
                    continue
                collected.setdefault(name, []).append((child.text or "").strip())
            dc_fields = {name: tuple(values) for name, values in collected.items()}
    return RawOaiRecord(
        identifier=identifier,
        datestamp=datestamp,
        set_specs=set_specs,
        dc_fields=dc_fields,
        deleted=deleted,
    )


def parse_oai_page(body: bytes, max_page_bytes: int = MAX_PAGE_BYTES) -> OaiPage:
    """Parse one ListRecords response body.

    Returns the records, the resumption token (None when absent or empty,
    i.e. the list is complete) and the OAI error code if the response was a
    protocol-level error document.
    """
    if len(body) > max_page_bytes:
        raise ProtocolError(f"page body exceeds {max_page_bytes} bytes")
    root = _oai_root(body)
    error = root.find(f"{{{OAI_NS}}}error")
    if error is not None:
        code = error.get("code", "")
        return OaiPage(records=(), resumption_token=None, error_code=code)
    list_records = root.find(f"{{{OAI_NS}}}ListRecords")
    if list_records is None:
        raise ProtocolError("response carries neither ListRecords nor error")
    records = []
    seen: set[str] = set()
    for elem in list_records.findall(f"{{{OAI_NS}}}record"):
        record = _parse_record(elem)
        if record is None:
            continue
        if record.identifier in seen:
            logger.warning("duplicate identifier %s within one page", record.identifier)
        seen.add(record.identifier)
        records.append(record)
    token_elem = list_records.find(f"{{{OAI_NS}}}resumptionToken")
    token = None
    if token_elem is not None and (token_elem.text or "").strip():
        token = token_elem.text.strip()
    return OaiPage(records=tuple(records), resumption_token=token, error_code=None)


def parse_identify(body: bytes) -> OaiIdentity:
    root = _oai_root(body)
    error = root.find(f"{{{OAI_NS}}}error")
    if error is not None:
        raise ProtocolError(f"Identify failed: {error.get('code')} {error.text or ''}".strip())
    identify = root.find(f"{{{OAI_NS}}}Identify")
    if identify is None:
        raise ProtocolError("response carries no Identify element")

    def text_of(name: str) -> str:
        elem = identify.find(f"{{{OAI_NS}}}{name}")
        return (elem.text or "").strip() if elem is not None else ""

    return OaiIdentity(
        repository_name=text_of("repositoryName"),
        base_url=text_of("baseURL"),
        admin_emails=tuple(
            (e.text or "").strip()
            for e in identify.findall(f"{{{OAI_NS}}}adminEmail")
            if (e.text or "").strip()
        ),
        earliest_datestamp=text_of("earliestDatestamp"),
        granularity=text_of("granularity"),
    )


def identify(endpoint: OaiEndpoint, http: HttpTransport | None = None) -> OaiIdentity:
    """Fetch and parse the repository's Identify document."""
    http = http or HttpTransport()
    body = http.get(endpoint.base_url, {"verb": "Identify"})
    return parse_identify(body)


def _iter_pages(
    endpoint: OaiEndpoint,
    from_: datetime | None,
    until: datetime | None,
    http: HttpTransport,
) -> Iterator[OaiPage]:
    params: dict[str, str] = {
        "verb": "ListRecords",
        "metadataPrefix": endpoint.metadata_prefix,
    }
    if from_ is not None:
        params["from"] = format_utc_datestamp(from_)
    if until is not None:
        params["until"] = format_utc_datestamp(until)
    if endpoint.set_spec:
        params["set"] = endpoint.set_spec
    token: str | None = None
    first = True
    while True:
        if not first:
            params = {"verb": "ListRecords", "resumptionToken": token}
        body = http.get(endpoint.base_url, params)
        page = parse_oai_page(body)
        if page.error_code == "noRecordsMatch":
            return
        if page.error_code == "badResumptionToken":
            raise HarvestError(
                f"resumption token rejected: {token!r}", token=token
            )
        if page.error_code is not None:
            raise ProtocolError(f"OAI error: {page.error_code}")
        yield page
        if page.resumption_token is None:
            return
        token = page.resumption_token
        first = False


def _in_window(
    record: RawOaiRecord, from_: datetime | None, until: datetime | None
) -> bool:
    if from_ is not None and record.datestamp < from_:
        return False
    if until is not None and record.datestamp > until:
        return False
    return True


def list_records(
    endpoint: OaiEndpoint,
    from_: datetime | None = None,
    until: datetime | None = None,
    http: HttpTransport | None = None,
) -> Iterator[RawOaiRecord]:
    """Stream records, following the resumption token chain to the end."""
    from_ = _to_wire_precision(from_)
    until = _to_wire_precision(until)
    if from_ is not None and until is not None and from_ > until:
        raise ValueError("from must not be later than until")
    http = http or HttpTransport()
    for page in _iter_pages(endpoint, from_, until, http):
        for record in page.records:
            if _in_window(record, from_, until):
                yield record


def harvest(
    endpoint: OaiEndpoint,
    since: datetime | None = None,
    http: HttpTransport | None = None,
    progress: Callable[[int], None] | None = None,
) -> HarvestResult:
    """Run a full or incremental harvest to completion.

    Pages are collected before anything is returned, so a mid-stream failure
    surfaces as an exception and never as a half-filled result. Deleted
    records are kept as tombstones so callers can drop documents on
    incremental re-harvests.
    """
    http = http or HttpTransport()
    since = _to_wire_precision(since)
    by_identifier: dict[str, RawOaiRecord] = {}
    pages = 0
    for page in _iter_pages(endpoint, since, None, http):
        pages += 1
        for record in page.records:
            if _in_window(record, since, None):
                by_identifier[record.identifier] = record
        if progress is not None:
            progress(len(by_identifier))
    return HarvestResult(
        records=tuple(by_identifier.values()),
        pages_fetched=pages,
        completed_at=datetime.now(timezone.utc),
        endpoint=endpoint,
    )


def record_to_element(record: RawOaiRecord) -> ET.Element:
    """Render a record back to its oai_dc XML form (inverse of page parsing)."""
    elem = ET.Element(f"{{{OAI_NS}}}record")
    header = ET.SubElement(elem, f"{{{OAI_NS}}}header")
    if record.deleted:
        header.set("status", "deleted")
    ET.SubElement(header, f"{{{OAI_NS}}}identifier").text = record.identifier
    ET.SubElement(header, f"{{{OAI_NS}}}datestamp").text = format_utc_datestamp(
        record.datestamp
    )
    for spec in record.set_specs:
        ET.SubElement(header, f"{{{OAI_NS}}}setSpec").text = spec
    if not record.deleted:
        metadata = ET.SubElement(elem, f"{{{OAI_NS}}}metadata")
        dc = ET.SubElement(metadata, f"{{{OAI_DC_NS}}}dc")
        for name, values in record.dc_fields.items():
            for value in values:
                ET.SubElement(dc, f"{{{DC_NS}}}{name}").text = value
    return elem
