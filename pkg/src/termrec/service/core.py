"""Application core behind both the HTTP layer and tests: accounts, keys,
sessions, repository profiles, the harvest/build job pipeline, and the
queryable model registry.

Serving reads the registry once per request, so every answer is consistent
with exactly one published snapshot; publishing swaps the registry entry and
the store pointer for a repository in one step while older requests keep the
bundle they already hold.
"""

from __future__ import annotations

import json
import logging
import threading
import uuid
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Callable

from .. import biblio, engine, wire
from ..config import ServiceConfig
from ..corpus import (
    ControlledVocabulary,
    SubjectSplitConfig,
    build_corpus,
    parse_vocabulary_upload,
    to_dc_record,
)
from ..errors import (
    AuthenticationError,
    ConflictError,
    InputValidationError,
    NoModelError,
    NotFoundError,
)
from ..modelio import (
    ModelBundle,
    build_bundle,
    dt_from_str,
    dt_to_str,
    dumps_model,
    loads_model,
    record_from_line,
    record_to_line,
    vocabulary_from_obj,
    vocabulary_to_obj,
)
from ..oai import HttpTransport, OaiEndpoint, RetryPolicy, harvest, identify
from ..text import SUPPORTED_LANGUAGES, default_analyzer
from . import auth
from .jobs import JobRunner
from .store import Store

logger = logging.getLogger(__name__)

MIN_PASSWORD_LENGTH = 10
UPLOADED_VOCABULARY_NAME = "uploaded-vocabulary"

JOB_STATES = ("queued", "harvesting", "building", "done", "failed")


def log_notifier(event: dict) -> None:
    """Default notification sink: one structured log line per job outcome."""
    logger.info("notification %s", json.dumps(event, ensure_ascii=False, sort_keys=True))


def _now() -> datetime:
    return datetime.now(timezone.utc)


def _new_id(prefix: str) -> str:
    return f"{prefix}_{uuid.uuid4().hex[:12]}"


@dataclass(frozen=True)
class Profile:
    repository_id: str
    account_id: str
    oai_url: str
    set_spec: str | None
    language: str
    extra_stopwords: tuple[str, ...]
    split_delimiter: str
    strip_codes: bool
    vocabulary: ControlledVocabulary | None
    chosen_metric: str
    last_harvest: datetime | None
    current_snapshot_id: str | None
    created_at: datetime


def _profile_from_row(row) -> Profile:
    vocabulary = None
    if row["vocabulary"]:
        vocabulary = vocabulary_from_obj(json.loads(row["vocabulary"]))
    return Profile(
        repository_id=row["repository_id"],
        account_id=row["account_id"],
        oai_url=row["oai_url"],
        set_spec=row["set_spec"],
        language=row["language"],
        extra_stopwords=tuple(json.loads(row["extra_stopwords"])),
        split_delimiter=row["split_delimiter"],
        strip_codes=bool(row["strip_codes"]),
        vocabulary=vocabulary,
        chosen_metric=row["chosen_metric"],
        last_harvest=dt_from_str(row["last_harvest"]) if row["last_harvest"] else None,
        current_snapshot_id=row["current_snapshot_id"],
        created_at=dt_from_str(row["created_at"]),
    )


def profile_view(profile: Profile) -> dict:
    vocabulary = None
    if profile.vocabulary is not None:
        vocabulary = {
            "name": profile.vocabulary.name,
            "terms": len(profile.vocabulary.terms),
            "explicit": profile.vocabulary.explicit,
        }
    return {
        "repository_id": profile.repository_id,
        "oai_url": profile.oai_url,
        "set_spec": profile.set_spec,
        "language": profile.language,
        "chosen_metric": profile.chosen_metric,
        "vocabulary": vocabulary,
        "last_harvest": dt_to_str(profile.last_harvest) if profile.last_harvest else None,
        "snapshot": profile.current_snapshot_id,
        "created_at": dt_to_str(profile.created_at),
    }


def _job_view(row) -> dict:
    return {
        "job_id": row["job_id"],
        "repository_id": row["repository_id"],
        "mode": row["mode"],
        "state": row["state"],
        "stage": row["stage"],
        "records_seen": row["records_seen"],
        "error": row["error"],
        "created_at": row["created_at"],
        "started_at": row["started_at"],
        "finished_at": row["finished_at"],
    }


class ServiceCore:
    def __init__(
        self,
        store: Store,
        config: ServiceConfig | None = None,
        http: HttpTransport | None = None,
        notifier: Callable[[dict], None] | None = None,
        password_iterations: int = auth.DEFAULT_ITERATIONS,
    ):
        self.store = store
        self.config = config or ServiceConfig()
        self._http = http or HttpTransport(
            retry=RetryPolicy(
                max_attempts=self.config.retry_attempts,
                initial_delay=self.config.retry_base_delay,
                max_delay=self.config.retry_max_delay,
            )
        )
        self._notifier = notifier or log_notifier
        self._password_iterations = password_iterations
        self.runner = JobRunner(parallelism=self.config.job_parallelism)
        self._registry: dict[str, ModelBundle] = {}
        self._registry_lock = threading.Lock()
        self._sessions: dict[str, str] = {}
        self._sessions_lock = threading.Lock()
        self._job_lock = threading.Lock()
        self._startup()

    def _startup(self) -> None:
        interrupted = self.store.fail_unfinished_jobs(
            "interrupted by service restart", dt_to_str(_now())
        )
        if interrupted:
            logger.warning("marked %d interrupted jobs as failed", interrupted)
        for row in self.store.all_repositories():
            payload = self.store.current_snapshot_payload(row["repository_id"])
            if payload is None:
                continue
            try:
                bundle = loads_model(payload.decode("utf-8"))
            except Exception:
                logger.exception(
                    "could not load stored snapshot for %s", row["repository_id"]
                )
                continue
            self._registry[row["repository_id"]] = bundle

    def close(self) -> None:
        self.runner.shutdown(wait=True)
        self.store.close()

    # --- accounts, keys, sessions -------------------------------------------

    def register_account(self, username: str, password: str, email: str) -> dict:
        username = username.strip()
        if not username:
            raise InputValidationError("username must be non-empty")
        if len(password) < MIN_PASSWORD_LENGTH:
            raise InputValidationError(
                f"password must be at least {MIN_PASSWORD_LENGTH} characters"
            )
        if "@" not in email:
            raise InputValidationError("contact email must contain '@'")
        if self.store.account_by_username(username) is not None:
            raise ConflictError(f"username {username!r} is taken")
        account_id = _new_id("acct")
        key = auth.new_api_key()
        created = dt_to_str(_now())
        try:
            self.store.create_account(
                account_id,
                username,
                auth.hash_password(password, self._password_iterations),
                email,
                created,
            )
        except Exception as exc:
            if "UNIQUE" in str(exc):
                raise ConflictError(f"username {username!r} is taken") from exc
            raise
        self.store.create_api_key(key, account_id, created)
        return {
            "account_id": account_id,
            "username": username,
            "email": email,
            "api_key": key,
            "created_at": created,
        }

    def authenticate_key(self, key: str) -> str:
        if not auth.plausible_key(key):
            raise AuthenticationError("invalid API key")
        row = self.store.api_key_row(key)
        if row is None or not auth.keys_equal(row["key"], key) or not row["active"]:
            raise AuthenticationError("invalid API key")
        return row["account_id"]

    def create_session(self, username: str, password: str) -> tuple[str, str]:
        row = self.store.account_by_username(username.strip())
        if row is None or not auth.verify_password(password, row["password_digest"]):
            raise AuthenticationError("unknown username or wrong password")
        token = auth.new_session_token()
        with self._sessions_lock:
            self._sessions[token] = row["account_id"]
        return token, row["account_id"]

    def destroy_session(self, token: str) -> None:
        with self._sessions_lock:
            self._sessions.pop(token, None)

    def account_for_session(self, token: str) -> str | None:
        with self._sessions_lock:
            return self._sessions.get(token)

    # --- repositories -----------------------------------------------------------

    def register_repository(
        self,
        account_id: str,
        oai_url: str,
        language: str,
        set_spec: str | None = None,
        split_delimiter: str = ";",
        strip_codes: bool = True,
        extra_stopwords: tuple[str, ...] = (),
    ) -> Profile:
        if language not in SUPPORTED_LANGUAGES:
            raise InputValidationError(
                f"unsupported language {language!r}; supported: "
                + ", ".join(SUPPORTED_LANGUAGES)
            )
        if not split_delimiter:
            raise InputValidationError("split delimiter must be non-empty")
        try:
            endpoint = OaiEndpoint(base_url=oai_url, set_spec=set_spec)
        except ValueError as exc:
            raise InputValidationError(str(exc)) from exc
        identity = identify(endpoint, http=self._http)
        repository_id = _new_id("repo")
        self.store.create_repository(
            {
                "repository_id": repository_id,
                "account_id": account_id,
                "oai_url": oai_url,
                "set_spec": set_spec,
                "language": language,
                "extra_stopwords": json.dumps(sorted(extra_stopwords)),
                "split_delimiter": split_delimiter,
                "strip_codes": int(strip_codes),
                "vocabulary": None,
                "chosen_metric": "jaccard",
                "last_harvest": None,
                "current_snapshot_id": None,
                "created_at": dt_to_str(_now()),
            }
        )
        logger.info(
            "registered repository %s (%s) for account %s",
            repository_id,
            identity.repository_name,
            account_id,
        )
        return self.profile(account_id, repository_id)

    def profile(self, account_id: str, repository_id: str) -> Profile:
        row = self.store.repository_by_id(repository_id)
        if row is None or row["account_id"] != account_id:
            raise NotFoundError(f"no repository {repository_id}")
        return _profile_from_row(row)

    def list_profiles(self, account_id: str) -> list[Profile]:
        return [
            _profile_from_row(row)
            for row in self.store.repositories_for_account(account_id)
        ]

    def set_metric(self, account_id: str, repository_id: str, metric: str) -> Profile:
        self.profile(account_id, repository_id)
        engine.validate_metric(metric)
        self.store.update_repository_metric(repository_id, metric)
        return self.profile(account_id, repository_id)

    def upload_vocabulary(self, account_id: str, repository_id: str, body: str) -> int:
        self.profile(account_id, repository_id)
        vocabulary = parse_vocabulary_upload(body, name=UPLOADED_VOCABULARY_NAME)
        self.store.update_repository_vocabulary(
            repository_id, json.dumps(vocabulary_to_obj(vocabulary))
        )
        return len(vocabulary.terms)

    # --- jobs ----------------------------------------------------------------------

    def start_job(self, account_id: str, repository_id: str, mode: str) -> dict:
        self.profile(account_id, repository_id)
        if mode not in ("full", "incremental"):
            raise InputValidationError(f"unknown job mode {mode!r}")
        job_id = _new_id("job")
        with self._job_lock:
            if self.runner.busy(repository_id):
                raise ConflictError(f"repository {repository_id} already has a job in flight")
            self.store.create_job(
                {
                    "job_id": job_id,
                    "repository_id": repository_id,
                    "mode": mode,
                    "state": "queued",
                    "stage": None,
                    "records_seen": 0,
                    "error": None,
                    "created_at": dt_to_str(_now()),
                    "started_at": None,
                    "finished_at": None,
                }
            )
            self.runner.submit(
                repository_id, job_id, lambda: self._run_job(job_id, repository_id, mode)
            )
        return self.job_status(account_id, job_id)

    def job_status(self, account_id: str, job_id: str) -> dict:
        row = self.store.job_by_id(job_id)
        if row is None:
            raise NotFoundError(f"no job {job_id}")
        repo = self.store.repository_by_id(row["repository_id"])
        if repo is None or repo["account_id"] != account_id:
            raise NotFoundError(f"no job {job_id}")
        return _job_view(row)

    def _run_job(self, job_id: str, repository_id: str, mode: str) -> None:
        stage = "harvest"
        try:
            row = self.store.repository_by_id(repository_id)
            profile = _profile_from_row(row)
            self.store.update_job(
                job_id, state="harvesting", stage=stage, started_at=dt_to_str(_now())
            )
            endpoint = OaiEndpoint(base_url=profile.oai_url, set_spec=profile.set_spec)
            since = profile.last_harvest if mode == "incremental" else None
            harvest_basis = _now()
            result = harvest(
                endpoint,
                since=since,
                http=self._http,
                progress=lambda total: self.store.update_job(job_id, records_seen=total),
            )
            live = [
                (record.identifier, record_to_line(to_dc_record(record)))
                for record in result.records
                if not record.deleted
            ]
            if mode == "full":
                self.store.replace_all_records(repository_id, live)
            else:
                deletes = [r.identifier for r in result.records if r.deleted]
                self.store.apply_record_changes(repository_id, live, deletes)

            stage = "build"
            self.store.update_job(job_id, state="building", stage=stage)
            records = [
                record_from_line(payload)
                for payload in self.store.record_payloads(repository_id)
            ]
            analyzer = default_analyzer(profile.language, profile.extra_stopwords)
            corpus = build_corpus(
                records,
                analyzer,
                vocabulary_filter=profile.vocabulary,
                split_config=SubjectSplitConfig(
                    delimiter=profile.split_delimiter, strip_codes=profile.strip_codes
                ),
            )
            bundle = build_bundle(
                corpus,
                analyzer,
                default_metric=profile.chosen_metric,
                repository_id=repository_id,
            )

            stage = "publish"
            self.publish_bundle(repository_id, bundle)
            self.store.set_last_harvest(repository_id, dt_to_str(harvest_basis))
            self.store.update_job(
                job_id, state="done", stage=None, finished_at=dt_to_str(_now())
            )
            self._notify(repository_id, job_id, "done", None, bundle.snapshot.snapshot_id)
        except Exception as exc:
            logger.exception("job %s failed during %s", job_id, stage)
            message = f"{stage}: {exc}"
            self.store.update_job(
                job_id,
                state="failed",
                stage=stage,
                error=message,
                finished_at=dt_to_str(_now()),
            )
            self._notify(repository_id, job_id, "failed", message, None)

    def publish_bundle(self, repository_id: str, bundle: ModelBundle) -> None:
        """Persist a snapshot and atomically make it the served model."""
        self.store.publish_snapshot(
            repository_id,
            bundle.snapshot.snapshot_id,
            dumps_model(bundle).encode("utf-8"),
            dt_to_str(bundle.snapshot.built_at),
        )
        with self._registry_lock:
            self._registry[repository_id] = bundle

    def _notify(
        self,
        repository_id: str,
        job_id: str,
        outcome: str,
        error: str | None,
        snapshot_id: str | None,
    ) -> None:
        try:
            repo = self.store.repository_by_id(repository_id)
            email = None
            if repo is not None:
                account = self.store.account_by_id(repo["account_id"])
                email = account["email"] if account is not None else None
            self._notifier(
                {
                    "event": "job-finished",
                    "job_id": job_id,
                    "repository_id": repository_id,
                    "outcome": outcome,
                    "error": error,
                    "snapshot_id": snapshot_id,
                    "contact": email,
                }
            )
        except Exception:
            logger.exception("notification hook failed for job %s", job_id)

    # --- query serving ----------------------------------------------------------------

    def _bundle(self, account_id: str, repository_id: str) -> tuple[Profile, ModelBundle]:
        profile = self.profile(account_id, repository_id)
        with self._registry_lock:
            bundle = self._registry.get(repository_id)
        if bundle is None:
            raise NoModelError(f"repository {repository_id} has no published model yet")
        return profile, bundle

    def recommend_response(
        self,
        account_id: str,
        repository_id: str,
        term: str,
        limit: int = engine.DEFAULT_LIMIT,
        metric: str | None = None,
    ) -> dict:
        profile, bundle = self._bundle(account_id, repository_id)
        chosen = metric if metric is not None else profile.chosen_metric
        recommendations = engine.recommend(term, bundle.snapshot, metric=chosen, limit=limit)
        return wire.recommend_payload(
            term, chosen, bundle.snapshot.snapshot_id, recommendations
        )

    def expand_response(
        self,
        account_id: str,
        repository_id: str,
        term: str,
        n: int = engine.DEFAULT_EXPANSION,
        metric: str | None = None,
    ) -> dict:
        profile, bundle = self._bundle(account_id, repository_id)
        chosen = engine.validate_metric(metric if metric is not None else profile.chosen_metric)
        expansion = engine.expand_query(term, bundle.snapshot, metric=chosen, n=n)
        return wire.expand_payload(term, chosen, bundle.snapshot.snapshot_id, n, expansion)

    def cloud_response(
        self,
        account_id: str,
        repository_id: str,
        term: str,
        k: int = engine.DEFAULT_CLOUD_SIZE,
        metric: str | None = None,
    ) -> dict:
        profile, bundle = self._bundle(account_id, repository_id)
        chosen = metric if metric is not None else profile.chosen_metric
        entries = engine.cloud_weights(term, bundle.snapshot, metric=chosen, k=k)
        return wire.cloud_payload(term, chosen, bundle.snapshot.snapshot_id, k, entries)

    def top_terms_response(
        self, account_id: str, repository_id: str, fieldname: str = "subject", k: int = 10
    ) -> dict:
        _, bundle = self._bundle(account_id, repository_id)
        rows = biblio.top_terms(bundle.corpus, fieldname, k)
        return wire.top_terms_payload(fieldname, k, bundle.snapshot.snapshot_id, rows)

    def coword_response(self, account_id: str, repository_id: str, k: int = 10) -> dict:
        _, bundle = self._bundle(account_id, repository_id)
        rows = biblio.coword_pairs(bundle.corpus, k)
        return wire.coword_payload(k, bundle.snapshot.snapshot_id, rows)

    def trend_response(
        self, account_id: str, repository_id: str, term: str, fieldname: str = "subject"
    ) -> dict:
        _, bundle = self._bundle(account_id, repository_id)
        series = biblio.term_trend(bundle.corpus, term, fieldname)
        return wire.trend_payload(bundle.snapshot.snapshot_id, series)
