"""Protocol-layer tests: page parsing, pagination, retry, harvest flows."""

import xml.etree.ElementTree as ET
from datetime import datetime, timezone

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fixture_oai import PAGE_SIZE
from termrec.errors import HarvestError, OaiParseError, ProtocolError, TransportError
from termrec.oai import (
    DC_ELEMENTS,
    MAX_PAGE_BYTES,
    OAI_NS,
    HttpTransport,
    OaiEndpoint,
    RawOaiRecord,
    RetryPolicy,
    format_utc_datestamp,
    harvest,
    identify,
    list_records,
    parse_identify,
    parse_oai_page,
    parse_utc_datestamp,
    record_to_element,
)

FAST_RETRY = RetryPolicy(max_attempts=5, initial_delay=0.01, max_delay=2.0)


def fast_http(**kwargs) -> HttpTransport:
    return HttpTransport(retry=kwargs.pop("retry", FAST_RETRY), **kwargs)


def render_page(records, token=None) -> bytes:
    root = ET.Element(f"{{{OAI_NS}}}OAI-PMH")
    ET.SubElement(root, f"{{{OAI_NS}}}responseDate").text = "2012-01-01T00:00:00Z"
    listing = ET.SubElement(root, f"{{{OAI_NS}}}ListRecords")
    for record in records:
        listing.append(record_to_element(record))
    if token is not None:
        ET.SubElement(listing, f"{{{OAI_NS}}}resumptionToken").text = token
    return ET.tostring(root, encoding="unicode").encode("utf-8")


def render_error(code: str, message: str = "nope") -> bytes:
    root = ET.Element(f"{{{OAI_NS}}}OAI-PMH")
    err = ET.SubElement(root, f"{{{OAI_NS}}}error")
    err.set("code", code)
    err.text = message
    return ET.tostring(root, encoding="unicode").encode("utf-8")


class FakeTransport:
    """Canned page responder keyed by resumption token."""

    def __init__(self, pages: dict):
        self.pages = pages
        self.calls: list[dict] = []

    def get(self, url: str, params: dict) -> bytes:
        self.calls.append(dict(params))
        key = params.get("resumptionToken", "__start__")
        return self.pages[key]


def make_record(num: int, stamp: str = "2010-06-01T00:00:00Z", **fields) -> RawOaiRecord:
    dc = {"title": (f"Title {num}",), "subject": (f"Subject {num}",)}
    dc.update({k: tuple(v) for k, v in fields.items()})
    return RawOaiRecord(
        identifier=f"oai:test:{num:04d}",
        datestamp=parse_utc_datestamp(stamp),
        set_specs=("main",),
        dc_fields=dc,
    )


class TestDatestamps:
    def test_second_granularity(self):
        parsed = parse_utc_datestamp("2011-01-10T13:46:00Z")
        assert parsed == datetime(2011, 1, 10, 13, 46, tzinfo=timezone.utc)

    def test_day_granularity_is_midnight_utc(self):
        parsed = parse_utc_datestamp("2011-01-10")
        assert parsed == datetime(2011, 1, 10, tzinfo=timezone.utc)

    def test_offset_forms_normalize_to_utc(self):
        parsed = parse_utc_datestamp("2011-01-10T14:46:00+01:00")
        assert parsed == datetime(2011, 1, 10, 13, 46, tzinfo=timezone.utc)

    def test_garbage_raises(self):
        with pytest.raises(ValueError):
            parse_utc_datestamp("last tuesday")

    @given(
        st.datetimes(
            min_value=datetime(1990, 1, 1),
            max_value=datetime(2035, 1, 1),
        ).map(lambda d: d.replace(microsecond=0, tzinfo=timezone.utc))
    )
    def test_format_parse_round_trip(self, stamp):
        assert parse_utc_datestamp(format_utc_datestamp(stamp)) == stamp


class TestParsePage:
    def test_sample_page_field_counts(self, sample_page_bytes):
        page = parse_oai_page(sample_page_bytes)
        assert page.error_code is None
        assert page.resumption_token is None
        assert len(page.records) == 1
        record = page.records[0]
        assert record.identifier == "oai:geis.izsoz.de:19389"
        assert record.datestamp == datetime(2011, 1, 10, 13, 46, tzinfo=timezone.utc)
        assert record.set_specs == ("SSOAR",)
        assert not record.deleted
        assert len(record.dc_fields["title"]) == 1
        assert len(record.dc_fields["description"]) == 1
        assert len(record.dc_fields["subject"]) == 5
        assert len(record.dc_fields["creator"]) == 2
        assert record.dc_fields["creator"] == (
            "Mostert, Erik",
            "Deutsches Institut für Entwicklungspolitik gGmbH",
        )
        assert record.dc_fields["date"] == ("10.01.2011 13:46",)

    def test_resumption_token_extracted(self):
        body = render_page([make_record(1)], token="p2")
        page = parse_oai_page(body)
        assert page.resumption_token == "p2"

    def test_empty_token_element_means_done(self):
        body = render_page([make_record(1)], token="")
        page = parse_oai_page(body)
        assert page.resumption_token is None

    def test_error_document(self):
        page = parse_oai_page(render_error("noRecordsMatch"))
        assert page.error_code == "noRecordsMatch"
        assert page.records == ()

    def test_deleted_record_is_tombstone(self):
        record = RawOaiRecord(
            identifier="oai:test:gone",
            datestamp=parse_utc_datestamp("2012-02-03T04:05:06Z"),
            deleted=True,
        )
        page = parse_oai_page(render_page([record]))
        assert page.records[0].deleted
        assert page.records[0].dc_fields == {}

    def test_malformed_xml_reports_byte_offset(self):
        with pytest.raises(OaiParseError) as excinfo:
            parse_oai_page(b"<OAI-PMH><broken")
        assert excinfo.value.byte_offset is not None

    def test_non_oai_root_rejected(self):
        with pytest.raises(ProtocolError):
            parse_oai_page(b"<html><body>hello</body></html>")

    def test_oversized_page_rejected(self):
        body = render_page([make_record(1)])
        with pytest.raises(ProtocolError):
            parse_oai_page(body, max_page_bytes=16)
        assert len(body) < MAX_PAGE_BYTES

    def test_missing_listrecords_rejected(self):
        body = (
            f'<OAI-PMH xmlns="{OAI_NS}"><responseDate>x</responseDate></OAI-PMH>'
        ).encode()
        with pytest.raises(ProtocolError):
            parse_oai_page(body)


_xml_text = st.text(
    alphabet=st.characters(blacklist_categories=("Cc", "Cs")),
    max_size=30,
).map(str.strip)

_record_strategy = st.builds(
    RawOaiRecord,
    identifier=st.text(
        alphabet="abcdefghijklmnopqrstuvwxyz0123456789:.-", min_size=1, max_size=30
    ).filter(lambda s: s.strip() == s),
    datestamp=st.datetimes(
        min_value=datetime(2000, 1, 1), max_value=datetime(2030, 1, 1)
    ).map(lambda d: d.replace(microsecond=0, tzinfo=timezone.utc)),
    set_specs=st.lists(
        st.text(alphabet="abcdefgh", min_size=1, max_size=8), max_size=3
    ).map(tuple),
    dc_fields=st.dictionaries(
        st.sampled_from(sorted(DC_ELEMENTS)),
        st.lists(_xml_text, min_size=1, max_size=3).map(tuple),
        max_size=5,
    ),
    deleted=st.just(False),
)


class TestRecordRoundTrip:
    @given(st.lists(_record_strategy, min_size=1, max_size=5, unique_by=lambda r: r.identifier))
    def test_serialize_parse_identity(self, records):
        page = parse_oai_page(render_page(records))
        assert page.records == tuple(records)

    def test_deleted_round_trip(self):
        record = RawOaiRecord(
            identifier="oai:test:tomb",
            datestamp=parse_utc_datestamp("2011-05-06T07:08:09Z"),
            set_specs=("a", "b"),
            deleted=True,
        )
        page = parse_oai_page(render_page([record]))
        assert page.records == (record,)


class TestTransport:
    def test_html_response_is_a_protocol_error(self, fixture_oai):
        fixture_oai.state.serve_html = True
        with pytest.raises(ProtocolError, match="not an OAI-PMH response"):
            fast_http().get(fixture_oai.url, {"verb": "Identify"})

    def test_persistent_500_exhausts_budget(self, fixture_oai):
        fixture_oai.state.always_500 = True
        policy = RetryPolicy(max_attempts=3, initial_delay=0.01, max_delay=0.05)
        with pytest.raises(TransportError, match="retry budget exhausted"):
            HttpTransport(retry=policy).get(fixture_oai.url, {"verb": "Identify"})
        assert fixture_oai.state.request_count == 3

    def test_retry_after_header_sets_the_delay(self, fixture_oai):
        sleeps: list[float] = []
        fixture_oai.state.inject_503(at_request=1, retry_after="1")
        http = HttpTransport(
            retry=RetryPolicy(max_attempts=3, initial_delay=30.0, max_delay=60.0),
            sleep=sleeps.append,
        )
        body = http.get(fixture_oai.url, {"verb": "Identify"})
        assert b"Identify" in body
        assert sleeps == [1.0]

    def test_backoff_doubles_without_header(self, fixture_oai):
        sleeps: list[float] = []
        fixture_oai.state.always_500 = True
        http = HttpTransport(
            retry=RetryPolicy(max_attempts=3, initial_delay=0.2, max_delay=60.0),
            sleep=sleeps.append,
        )
        fixture_oai.state.retry_after = None
        with pytest.raises(TransportError):
            http.get(fixture_oai.url, {"verb": "Identify"})
        assert sleeps == [0.2, 0.4]

    def test_connection_refused_becomes_transport_error(self):
        policy = RetryPolicy(max_attempts=2, initial_delay=0.01, max_delay=0.01)
        with pytest.raises(TransportError):
            HttpTransport(retry=policy).get("http://127.0.0.1:9/oai", {"verb": "Identify"})


class TestIdentify:
    def test_fixture_identity(self, fixture_oai):
        ident = identify(OaiEndpoint(fixture_oai.url), http=fast_http())
        assert ident.repository_name == "fixture"
        assert ident.granularity == "YYYY-MM-DDThh:mm:ssZ"
        assert ident.admin_emails == ("admin@fixture.invalid",)

    def test_error_document_rejected(self):
        with pytest.raises(ProtocolError):
            parse_identify(render_error("badVerb"))


class TestPagination:
    def test_full_harvest_counts(self, fixture_oai):
        result = harvest(OaiEndpoint(fixture_oai.url), http=fast_http())
        assert len(result.records) == 15
        assert result.pages_fetched == 3
        assert fixture_oai.state.request_count == 3
        identifiers = [r.identifier for r in result.records]
        assert identifiers == sorted(identifiers)

    def test_continuation_requests_carry_only_the_token(self, fixture_oai):
        harvest(OaiEndpoint(fixture_oai.url), http=fast_http())
        first, *rest = fixture_oai.state.requests
        assert first["verb"] == "ListRecords"
        assert first["metadataPrefix"] == "oai_dc"
        assert "resumptionToken" not in first
        assert rest, "expected continuation requests"
        for params in rest:
            assert set(params) == {"verb", "resumptionToken"}

    def test_set_spec_forwarded(self, fixture_oai):
        harvest(OaiEndpoint(fixture_oai.url, set_spec="main"), http=fast_http())
        assert fixture_oai.state.requests[0]["set"] == "main"

    def test_window_is_sent_and_respected(self, fixture_oai):
        got = list(
            list_records(
                OaiEndpoint(fixture_oai.url),
                from_=parse_utc_datestamp("2010-01-01T00:00:00Z"),
                until=parse_utc_datestamp("2010-12-31T23:59:59Z"),
                http=fast_http(),
            )
        )
        assert [r.identifier[-4:] for r in got] == ["0006", "0007", "0008", "0009", "0010"]
        first = fixture_oai.state.requests[0]
        assert first["from"] == "2010-01-01T00:00:00Z"
        assert first["until"] == "2010-12-31T23:59:59Z"

    def test_inverted_window_rejected(self, fixture_oai):
        with pytest.raises(ValueError):
            list(
                list_records(
                    OaiEndpoint(fixture_oai.url),
                    from_=parse_utc_datestamp("2011-01-01T00:00:00Z"),
                    until=parse_utc_datestamp("2010-01-01T00:00:00Z"),
                    http=fast_http(),
                )
            )

    def test_no_records_match_is_an_empty_success(self, fixture_oai):
        result = harvest(
            OaiEndpoint(fixture_oai.url),
            since=parse_utc_datestamp("2031-01-01T00:00:00Z"),
            http=fast_http(),
        )
        assert result.records == ()
        assert result.pages_fetched == 0

    def test_rejected_token_is_a_typed_error(self, fixture_oai):
        fixture_oai.state.reject_tokens = True
        with pytest.raises(HarvestError) as excinfo:
            harvest(OaiEndpoint(fixture_oai.url), http=fast_http())
        assert excinfo.value.token == "p2"

    def test_other_oai_errors_are_protocol_errors(self, fixture_oai):
        endpoint = OaiEndpoint(fixture_oai.url, metadata_prefix="marcxml")
        with pytest.raises(ProtocolError, match="cannotDisseminateFormat"):
            harvest(endpoint, http=fast_http())

    def test_injected_503_adds_exactly_one_request(self, fixture_oai):
        fixture_oai.state.inject_503(at_request=2, retry_after="0")
        result = harvest(OaiEndpoint(fixture_oai.url), http=fast_http())
        assert len(result.records) == 15
        assert fixture_oai.state.request_count == 4


class TestHarvestSemantics:
    def test_duplicate_identifier_last_page_wins(self):
        old = make_record(1, title=("Old",))
        new = make_record(1, title=("New",))
        other = make_record(2)
        transport = FakeTransport({
            "__start__": render_page([old, other], token="next"),
            "next": render_page([new]),
        })
        result = harvest(OaiEndpoint("http://fake.invalid/oai"), http=transport)
        by_id = {r.identifier: r for r in result.records}
        assert len(result.records) == 2
        assert by_id["oai:test:0001"].dc_fields["title"] == ("New",)

    def test_out_of_window_records_filtered_client_side(self):
        inside = make_record(1, stamp="2010-06-01T00:00:00Z")
        outside = make_record(2, stamp="2005-01-01T00:00:00Z")
        transport = FakeTransport({"__start__": render_page([inside, outside])})
        result = harvest(
            OaiEndpoint("http://fake.invalid/oai"),
            since=parse_utc_datestamp("2010-01-01T00:00:00Z"),
            http=transport,
        )
        assert [r.identifier for r in result.records] == ["oai:test:0001"]

    def test_window_filter_uses_wire_granularity(self):
        # A bound with sub-second precision is truncated on the wire; the
        # client-side check must keep records stamped in that same second.
        record = make_record(1, stamp="2020-01-01T00:00:05Z")
        transport = FakeTransport({"__start__": render_page([record])})
        since = datetime(2020, 1, 1, 0, 0, 5, 700_000, tzinfo=timezone.utc)
        result = harvest(OaiEndpoint("http://fake.invalid/oai"), since=since,
                         http=transport)
        assert [r.identifier for r in result.records] == ["oai:test:0001"]
        assert transport.calls[0]["from"] == "2020-01-01T00:00:05Z"

    def test_progress_reports_cumulative_counts(self, fixture_oai):
        seen: list[int] = []
        harvest(OaiEndpoint(fixture_oai.url), http=fast_http(), progress=seen.append)
        assert seen == [5, 10, 15]
        assert seen == sorted(seen)

    @given(
        st.lists(_record_strategy, min_size=0, max_size=12, unique_by=lambda r: r.identifier),
        st.integers(min_value=1, max_value=5),
    )
    def test_pagination_conserves_records(self, records, page_size):
        pages = {}
        chunks = [records[i:i + page_size] for i in range(0, len(records), page_size)] or [[]]
        for idx, chunk in enumerate(chunks):
            key = "__start__" if idx == 0 else f"t{idx}"
            token = f"t{idx + 1}" if idx + 1 < len(chunks) else None
            pages[key] = render_page(chunk, token=token)
        transport = FakeTransport(pages)
        result = harvest(OaiEndpoint("http://fake.invalid/oai"), http=transport)
        assert sorted(r.identifier for r in result.records) == sorted(
            r.identifier for r in records
        )
        assert len(transport.calls) == len(chunks)


def test_fixture_page_size_matches_contract():
    assert PAGE_SIZE == 5
