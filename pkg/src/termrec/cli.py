"""Command-line driver: harvest to an archive, build a model file, query it,
report on it, or launch the HTTP service.

Exit codes are part of the contract: 2 usage or protocol errors, 3 transport
failures, 4 build failures, 5 queries that analyze to nothing, 6 serve
configuration problems (bad config key, unusable port).
"""

from __future__ import annotations

import socket
import sys
from datetime import datetime, timezone
from pathlib import Path

import click

from . import biblio as biblio_mod
from . import engine, wire
from .config import load_config
from .corpus import SubjectSplitConfig, build_corpus, parse_vocabulary_upload, to_dc_record
from .errors import (
    ConfigError,
    CorpusBuildError,
    EmptyQueryError,
    HarvestError,
    InputValidationError,
    MetricUnavailableError,
    ProtocolError,
    TransportError,
    VocabularyUploadError,
)
from .modelio import (
    ModelBundle,
    build_bundle,
    load_model,
    record_from_line,
    record_to_line,
    save_model,
)
from .oai import HttpTransport, OaiEndpoint, RetryPolicy, harvest, parse_utc_datestamp
from .text import SUPPORTED_LANGUAGES, default_analyzer, load_stopword_file

EXIT_PROTOCOL = 2
EXIT_TRANSPORT = 3
EXIT_BUILD = 4
EXIT_EMPTY_QUERY = 5
EXIT_SERVE = 6


def _fail(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _parse_since(value: str | None) -> datetime | None:
    if value is None:
        return None
    try:
        return parse_utc_datestamp(value)
    except ValueError as exc:
        raise click.UsageError(f"--since: {exc}") from exc


@click.group()
def cli() -> None:
    """Search-term recommendation toolkit."""


@cli.command("harvest")
@click.argument("oai_url")
@click.option("-o", "--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--since", default=None, help="Only records with a datestamp at or after this.")
@click.option("--set", "set_spec", default=None, help="OAI set to harvest.")
@click.option("--retry-attempts", default=5, show_default=True, type=click.IntRange(1, 10))
@click.option("--retry-base-delay", default=1.0, show_default=True,
              type=click.FloatRange(min=0, min_open=True))
def cmd_harvest(
    oai_url: str,
    out_path: str,
    since: str | None,
    set_spec: str | None,
    retry_attempts: int,
    retry_base_delay: float,
) -> None:
    """Harvest OAI_URL into a line-delimited record archive."""
    try:
        endpoint = OaiEndpoint(base_url=oai_url, set_spec=set_spec)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc
    http = HttpTransport(
        retry=RetryPolicy(max_attempts=retry_attempts, initial_delay=retry_base_delay)
    )
    try:
        result = harvest(endpoint, since=_parse_since(since), http=http)
    except (HarvestError, ProtocolError) as exc:
        _fail(EXIT_PROTOCOL, str(exc))
    except TransportError as exc:
        _fail(EXIT_TRANSPORT, str(exc))
    kept = sorted(
        (record for record in result.records if not record.deleted),
        key=lambda record: record.identifier,
    )
    skipped = len(result.records) - len(kept)
    with open(out_path, "w", encoding="utf-8") as handle:
        for record in kept:
            handle.write(record_to_line(to_dc_record(record)) + "\n")
    if skipped:
        click.echo(f"skipped {skipped} deletion tombstones", err=True)
    click.echo(f"{len(kept)} records")


@cli.command("build")
@click.argument("archive", type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--language", required=True, type=click.Choice(SUPPORTED_LANGUAGES))
@click.option("--vocab", "vocab_path", default=None, type=click.Path(exists=True, dir_okay=False))
@click.option("--stopwords", "stopwords_path", default=None, type=click.Path(exists=True, dir_okay=False))
@click.option("--delimiter", default=";", show_default=True, help="dc:subject split delimiter.")
@click.option("--strip-codes/--no-strip-codes", default=True, show_default=True,
              help="Strip one trailing (digits) classification code per subject.")
@click.option("--min-pair-count", default=1, show_default=True, type=click.IntRange(1, 5))
@click.option("--metric", default="jaccard", show_default=True,
              type=click.Choice(engine.AVAILABLE_METRICS))
def cmd_build(
    archive: str,
    out_path: str,
    language: str,
    vocab_path: str | None,
    stopwords_path: str | None,
    delimiter: str,
    strip_codes: bool,
    min_pair_count: int,
    metric: str,
) -> None:
    """Build a model file from a record archive."""
    extra: tuple[str, ...] = ()
    if stopwords_path is not None:
        extra = tuple(load_stopword_file(Path(stopwords_path).read_text(encoding="utf-8")))
    vocabulary = None
    if vocab_path is not None:
        try:
            vocabulary = parse_vocabulary_upload(
                Path(vocab_path).read_text(encoding="utf-8"), name="uploaded-vocabulary"
            )
        except VocabularyUploadError as exc:
            _fail(EXIT_BUILD, str(exc))
    records = []
    try:
        with open(archive, encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if line:
                    records.append(record_from_line(line))
    except (ValueError, KeyError) as exc:
        _fail(EXIT_BUILD, f"archive does not parse: {exc}")
    analyzer = default_analyzer(language, extra)
    try:
        corpus = build_corpus(
            records,
            analyzer,
            vocabulary_filter=vocabulary,
            split_config=SubjectSplitConfig(delimiter=delimiter, strip_codes=strip_codes),
        )
        bundle = build_bundle(
            corpus,
            analyzer,
            default_metric=metric,
            built_at=datetime.now(timezone.utc),
            min_pair_count=min_pair_count,
        )
    except CorpusBuildError as exc:
        _fail(EXIT_BUILD, str(exc))
    save_model(bundle, out_path)
    click.echo(
        f"N={corpus.n_docs} vocabulary={len(corpus.vocabulary.terms)} "
        f"pairs={len(bundle.snapshot.index.df_pair)}"
    )


def _load_bundle(path: str) -> ModelBundle:
    try:
        return load_model(path)
    except (OSError, InputValidationError) as exc:
        raise click.UsageError(f"cannot load model {path}: {exc}") from exc


def _echo_table(rows: list[tuple[str, ...]]) -> None:
    if not rows:
        return
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    for row in rows:
        cells = [cell.ljust(widths[i]) for i, cell in enumerate(row)]
        click.echo("  ".join(cells).rstrip())


def _emit(payload: dict, output_format: str, table_rows: list[tuple[str, ...]]) -> None:
    if output_format == "json":
        click.echo(wire.render_json(payload), nl=False)
    else:
        _echo_table(table_rows)


_format_option = click.option(
    "--format", "output_format", default="table", show_default=True,
    type=click.Choice(("table", "json")),
)
_metric_option = click.option(
    "--metric", default=None, type=click.Choice(engine.AVAILABLE_METRICS + engine.RESERVED_METRICS)
)


def _run_query(fn):
    try:
        return fn()
    except EmptyQueryError as exc:
        _fail(EXIT_EMPTY_QUERY, str(exc))
    except (InputValidationError, MetricUnavailableError) as exc:
        raise click.UsageError(str(exc)) from exc


@cli.command("recommend")
@click.argument("model", type=click.Path(exists=True, dir_okay=False))
@click.option("--term", required=True)
@click.option("--limit", default=engine.DEFAULT_LIMIT, show_default=True, type=click.IntRange(1, 100))
@_metric_option
@_format_option
def cmd_recommend(model: str, term: str, limit: int, metric: str | None, output_format: str) -> None:
    """Rank controlled terms for TERM against a model."""
    bundle = _load_bundle(model)
    chosen = metric if metric is not None else bundle.snapshot.default_metric
    recs = _run_query(lambda: engine.recommend(term, bundle.snapshot, metric=chosen, limit=limit))
    payload = wire.recommend_payload(term, chosen, bundle.snapshot.snapshot_id, recs)
    rows = [(r.name, repr(r.confidence), repr(r.raw_score)) for r in recs]
    _emit(payload, output_format, rows)


@cli.command("expand")
@click.argument("model", type=click.Path(exists=True, dir_okay=False))
@click.option("--term", required=True)
@click.option("--n", default=engine.DEFAULT_EXPANSION, show_default=True, type=click.IntRange(0, 20))
@_metric_option
@_format_option
def cmd_expand(model: str, term: str, n: int, metric: str | None, output_format: str) -> None:
    """Expand TERM with up to N recommended terms."""
    bundle = _load_bundle(model)
    chosen = metric if metric is not None else bundle.snapshot.default_metric
    expansion = _run_query(lambda: engine.expand_query(term, bundle.snapshot, metric=chosen, n=n))
    payload = wire.expand_payload(term, chosen, bundle.snapshot.snapshot_id, n, expansion)
    if output_format == "json":
        _emit(payload, output_format, [])
    else:
        click.echo(" ".join(expansion.terms))


@cli.command("cloud")
@click.argument("model", type=click.Path(exists=True, dir_okay=False))
@click.option("--term", required=True)
@click.option("--k", default=engine.DEFAULT_CLOUD_SIZE, show_default=True, type=click.IntRange(1, 100))
@_metric_option
@_format_option
def cmd_cloud(model: str, term: str, k: int, metric: str | None, output_format: str) -> None:
    """Weighted tag-cloud terms for TERM."""
    bundle = _load_bundle(model)
    chosen = metric if metric is not None else bundle.snapshot.default_metric
    entries = _run_query(lambda: engine.cloud_weights(term, bundle.snapshot, metric=chosen, k=k))
    payload = wire.cloud_payload(term, chosen, bundle.snapshot.snapshot_id, k, entries)
    rows = [(e.term, repr(e.weight), str(e.bucket)) for e in entries]
    _emit(payload, output_format, rows)


@cli.group("biblio")
def cmd_biblio() -> None:
    """Bibliometric reports over a model's documents."""


_field_option = click.option(
    "--field", "fieldname", default="subject", show_default=True,
    type=click.Choice(biblio_mod.FIELDS),
)


@cmd_biblio.command("top-terms")
@click.argument("model", type=click.Path(exists=True, dir_okay=False))
@_field_option
@click.option("--k", default=10, show_default=True, type=click.IntRange(1, 100))
@_format_option
def cmd_top_terms(model: str, fieldname: str, k: int, output_format: str) -> None:
    """Highest-document-frequency terms."""
    bundle = _load_bundle(model)
    ranked = biblio_mod.top_terms(bundle.corpus, fieldname, k)
    payload = wire.top_terms_payload(fieldname, k, bundle.snapshot.snapshot_id, ranked)
    _emit(payload, output_format, [(term, str(df)) for term, df in ranked])


@cmd_biblio.command("coword")
@click.argument("model", type=click.Path(exists=True, dir_okay=False))
@click.option("--k", default=10, show_default=True, type=click.IntRange(1, 100))
@_format_option
def cmd_coword(model: str, k: int, output_format: str) -> None:
    """Most frequent free-term/controlled-term co-occurrences."""
    bundle = _load_bundle(model)
    ranked = biblio_mod.coword_pairs(bundle.corpus, k)
    payload = wire.coword_payload(k, bundle.snapshot.snapshot_id, ranked)
    rows = [(free, subject, str(count)) for (free, subject), count in ranked]
    _emit(payload, output_format, rows)


@cmd_biblio.command("trend")
@click.argument("model", type=click.Path(exists=True, dir_okay=False))
@click.option("--term", required=True)
@_field_option
@_format_option
def cmd_trend(model: str, term: str, fieldname: str, output_format: str) -> None:
    """Documents containing TERM per calendar year."""
    bundle = _load_bundle(model)
    series = biblio_mod.term_trend(bundle.corpus, term, fieldname)
    payload = wire.trend_payload(bundle.snapshot.snapshot_id, series)
    rows = [(str(year), str(count)) for year, count in series.buckets]
    if series.excluded:
        rows.append(("undated", str(series.excluded)))
    _emit(payload, output_format, rows)


@cli.command("serve")
@click.option("--config", "config_path", default=None, type=click.Path(exists=True, dir_okay=False))
@click.option("--host", default=None)
@click.option("--port", default=None, type=int)
@click.option("--store", "store_path", default=None, type=click.Path(dir_okay=False))
def cmd_serve(config_path: str | None, host: str | None, port: int | None, store_path: str | None) -> None:
    """Run the HTTP service."""
    import uvicorn

    from .service.app import create_app

    try:
        config = load_config(
            config_path,
            overrides={"host": host, "port": port, "store_path": store_path},
        )
    except ConfigError as exc:
        suffix = f" (key: {exc.key})" if exc.key else ""
        _fail(EXIT_SERVE, f"{exc}{suffix}")
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    try:
        probe.bind((config.host, config.port))
    except OSError as exc:
        _fail(EXIT_SERVE, f"cannot bind {config.host}:{config.port}: {exc}")
    finally:
        probe.close()
    app = create_app(config=config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")


def main() -> None:
    cli()


if __name__ == "__main__":
    main()
