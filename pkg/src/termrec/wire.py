"""Response payloads and their JSON/XML renderings.

The CLI's ``--format json`` output and the service's JSON bodies must match
byte for byte, so both call the builders and renderers here. XML is the
service's default answer format; its recommendation shape is fixed:

    <recommendations term="..." metric="..." snapshot="...">
      <recommendation>
        <name>...</name><confidence>...</confidence><vocabulary>...</vocabulary>
      </recommendation>
    </recommendations>
"""

from __future__ import annotations

import json
from xml.etree import ElementTree as ET

from .biblio import TrendSeries
from .engine import CloudEntry, ExpandedQuery, Recommendation

XML_DECLARATION = '<?xml version="1.0" encoding="UTF-8"?>\n'


def render_json(payload: dict) -> str:
    return json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=2) + "\n"


def _number(value: float) -> str:
    return repr(float(value))


def _render_xml(root: ET.Element) -> str:
    return XML_DECLARATION + ET.tostring(root, encoding="unicode") + "\n"


def _child(parent: ET.Element, tag: str, text: str) -> ET.Element:
    element = ET.SubElement(parent, tag)
    element.text = text
    return element


# --- recommend --------------------------------------------------------------


def recommend_payload(
    term: str, metric: str, snapshot_id: str, recommendations: list[Recommendation]
) -> dict:
    return {
        "term": term,
        "metric": metric,
        "snapshot": snapshot_id,
        "recommendations": [
            {"name": rec.name, "confidence": rec.confidence, "vocabulary": rec.vocabulary}
            for rec in recommendations
        ],
    }


def recommend_xml(payload: dict) -> str:
    root = ET.Element(
        "recommendations",
        term=payload["term"],
        metric=payload["metric"],
        snapshot=payload["snapshot"],
    )
    for rec in payload["recommendations"]:
        element = ET.SubElement(root, "recommendation")
        _child(element, "name", rec["name"])
        _child(element, "confidence", _number(rec["confidence"]))
        _child(element, "vocabulary", rec["vocabulary"])
    return _render_xml(root)


# --- expand -----------------------------------------------------------------


def expand_payload(term: str, metric: str, snapshot_id: str, n: int, expansion: ExpandedQuery) -> dict:
    return {
        "term": term,
        "metric": metric,
        "snapshot": snapshot_id,
        "n": n,
        "original": list(expansion.original),
        "added": list(expansion.added),
        "expanded": list(expansion.terms),
    }


def expand_xml(payload: dict) -> str:
    root = ET.Element(
        "expansion",
        term=payload["term"],
        metric=payload["metric"],
        snapshot=payload["snapshot"],
        n=str(payload["n"]),
    )
    for group in ("original", "added", "expanded"):
        holder = ET.SubElement(root, group)
        for term in payload[group]:
            _child(holder, "term", term)
    return _render_xml(root)


# --- cloud ------------------------------------------------------------------


def cloud_payload(
    term: str, metric: str, snapshot_id: str, k: int, entries: list[CloudEntry]
) -> dict:
    return {
        "term": term,
        "metric": metric,
        "snapshot": snapshot_id,
        "k": k,
        "entries": [
            {"term": entry.term, "weight": entry.weight, "bucket": entry.bucket}
            for entry in entries
        ],
    }


def cloud_xml(payload: dict) -> str:
    root = ET.Element(
        "cloud",
        term=payload["term"],
        metric=payload["metric"],
        snapshot=payload["snapshot"],
        k=str(payload["k"]),
    )
    for entry in payload["entries"]:
        element = ET.SubElement(root, "entry")
        _child(element, "term", entry["term"])
        _child(element, "weight", _number(entry["weight"]))
        _child(element, "bucket", str(entry["bucket"]))
    return _render_xml(root)


# --- biblio -----------------------------------------------------------------


def top_terms_payload(
    fieldname: str, k: int, snapshot_id: str, rows: list[tuple[str, int]]
) -> dict:
    return {
        "field": fieldname,
        "k": k,
        "snapshot": snapshot_id,
        "terms": [{"term": term, "df": df} for term, df in rows],
    }


def top_terms_xml(payload: dict) -> str:
    root = ET.Element(
        "terms", field=payload["field"], k=str(payload["k"]), snapshot=payload["snapshot"]
    )
    for row in payload["terms"]:
        element = ET.SubElement(root, "entry")
        _child(element, "term", row["term"])
        _child(element, "df", str(row["df"]))
    return _render_xml(root)


def coword_payload(k: int, snapshot_id: str, rows: list[tuple[tuple[str, str], int]]) -> dict:
    return {
        "k": k,
        "snapshot": snapshot_id,
        "pairs": [
            {"free": free, "subject": subject, "count": count}
            for (free, subject), count in rows
        ],
    }


def coword_xml(payload: dict) -> str:
    root = ET.Element("pairs", k=str(payload["k"]), snapshot=payload["snapshot"])
    for row in payload["pairs"]:
        element = ET.SubElement(root, "pair")
        _child(element, "free", row["free"])
        _child(element, "subject", row["subject"])
        _child(element, "count", str(row["count"]))
    return _render_xml(root)


def trend_payload(snapshot_id: str, series: TrendSeries) -> dict:
    return {
        "term": series.term,
        "field": series.fieldname,
        "snapshot": snapshot_id,
        "excluded": series.excluded,
        "buckets": [{"year": year, "count": count} for year, count in series.buckets],
    }


def trend_xml(payload: dict) -> str:
    root = ET.Element(
        "trend",
        term=payload["term"],
        field=payload["field"],
        snapshot=payload["snapshot"],
        excluded=str(payload["excluded"]),
    )
    for bucket in payload["buckets"]:
        element = ET.SubElement(root, "bucket")
        _child(element, "year", str(bucket["year"]))
        _child(element, "count", str(bucket["count"]))
    return _render_xml(root)
