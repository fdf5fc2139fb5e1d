"""Embedded transactional store for accounts, keys, repositories, harvested
records, jobs, and published model snapshots.

Backed by a single sqlite database file. Snapshot payloads are the canonical
model encoding (sorted tables, UTF-8 bytes), stored whole per snapshot;
publishing a snapshot and repointing the repository at it happen in one
transaction, so a restarted process always finds a complete current model.
A dedicated lock serializes access through the shared connection; at desk
scale every call here is microseconds.
"""

from __future__ import annotations

import sqlite3
import threading
from contextlib import contextmanager

_SCHEMA = """
CREATE TABLE IF NOT EXISTS accounts (
    account_id TEXT PRIMARY KEY,
    username TEXT NOT NULL UNIQUE,
    password_digest TEXT NOT NULL,
    email TEXT NOT NULL,
    created_at TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS api_keys (
    key TEXT PRIMARY KEY,
    account_id TEXT NOT NULL REFERENCES accounts(account_id),
    active INTEGER NOT NULL DEFAULT 1,
    created_at TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS repositories (
    repository_id TEXT PRIMARY KEY,
    account_id TEXT NOT NULL REFERENCES accounts(account_id),
    oai_url TEXT NOT NULL,
    set_spec TEXT,
    language TEXT NOT NULL,
    extra_stopwords TEXT NOT NULL DEFAULT '[]',
    split_delimiter TEXT NOT NULL DEFAULT ';',
    strip_codes INTEGER NOT NULL DEFAULT 1,
    vocabulary TEXT,
    chosen_metric TEXT NOT NULL DEFAULT 'jaccard',
    last_harvest TEXT,
    current_snapshot_id TEXT,
    created_at TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS records (
    repository_id TEXT NOT NULL,
    identifier TEXT NOT NULL,
    payload TEXT NOT NULL,
    PRIMARY KEY (repository_id, identifier)
);
CREATE TABLE IF NOT EXISTS jobs (
    job_id TEXT PRIMARY KEY,
    repository_id TEXT NOT NULL REFERENCES repositories(repository_id),
    mode TEXT NOT NULL,
    state TEXT NOT NULL,
    stage TEXT,
    records_seen INTEGER NOT NULL DEFAULT 0,
    error TEXT,
    created_at TEXT NOT NULL,
    started_at TEXT,
    finished_at TEXT
);
CREATE TABLE IF NOT EXISTS snapshots (
    repository_id TEXT NOT NULL REFERENCES repositories(repository_id),
    snapshot_id TEXT NOT NULL,
    payload BLOB NOT NULL,
    built_at TEXT NOT NULL,
    PRIMARY KEY (repository_id, snapshot_id)
);
"""


class Store:
    def __init__(self, path: str):
        self.path = path
        self._lock = threading.Lock()
        self._conn = sqlite3.connect(path, check_same_thread=False)
        self._conn.row_factory = sqlite3.Row
        with self._lock:
            self._conn.executescript(_SCHEMA)
            self._conn.commit()

    def close(self) -> None:
        with self._lock:
            self._conn.close()

    @contextmanager
    def _tx(self):
        with self._lock:
            try:
                yield self._conn
                self._conn.commit()
            except Exception:
                self._conn.rollback()
                raise

    # --- accounts and keys --------------------------------------------------

    def create_account(
        self, account_id: str, username: str, password_digest: str, email: str, created_at: str
    ) -> None:
        with self._tx() as conn:
            conn.execute(
                "INSERT INTO accounts VALUES (?, ?, ?, ?, ?)",
                (account_id, username, password_digest, email, created_at),
            )

    def account_by_username(self, username: str) -> sqlite3.Row | None:
        with self._tx() as conn:
            return conn.execute(
                "SELECT * FROM accounts WHERE username = ?", (username,)
            ).fetchone()

    def account_by_id(self, account_id: str) -> sqlite3.Row | None:
        with self._tx() as conn:
            return conn.execute(
                "SELECT * FROM accounts WHERE account_id = ?", (account_id,)
            ).fetchone()

    def create_api_key(self, key: str, account_id: str, created_at: str) -> None:
        with self._tx() as conn:
            conn.execute("INSERT INTO api_keys VALUES (?, ?, 1, ?)", (key, account_id, created_at))

    def api_key_row(self, key: str) -> sqlite3.Row | None:
        with self._tx() as conn:
            return conn.execute("SELECT * FROM api_keys WHERE key = ?", (key,)).fetchone()

    def revoke_api_key(self, key: str) -> None:
        with self._tx() as conn:
            conn.execute("UPDATE api_keys SET active = 0 WHERE key = ?", (key,))

    # --- repositories ---------------------------------------------------------

    def create_repository(self, row: dict) -> None:
        with self._tx() as conn:
            conn.execute(
                """INSERT INTO repositories
                   (repository_id, account_id, oai_url, set_spec, language,
                    extra_stopwords, split_delimiter, strip_codes, vocabulary,
                    chosen_metric, last_harvest, current_snapshot_id, created_at)
                   VALUES (:repository_id, :account_id, :oai_url, :set_spec, :language,
                    :extra_stopwords, :split_delimiter, :strip_codes, :vocabulary,
                    :chosen_metric, :last_harvest, :current_snapshot_id, :created_at)""",
                row,
            )

    def repository_by_id(self, repository_id: str) -> sqlite3.Row | None:
        with self._tx() as conn:
            return conn.execute(
                "SELECT * FROM repositories WHERE repository_id = ?", (repository_id,)
            ).fetchone()

    def repositories_for_account(self, account_id: str) -> list[sqlite3.Row]:
        with self._tx() as conn:
            return conn.execute(
                "SELECT * FROM repositories WHERE account_id = ? ORDER BY created_at, repository_id",
                (account_id,),
            ).fetchall()

    def all_repositories(self) -> list[sqlite3.Row]:
        with self._tx() as conn:
            return conn.execute("SELECT * FROM repositories").fetchall()

    def update_repository_vocabulary(self, repository_id: str, vocabulary_json: str) -> None:
        with self._tx() as conn:
            conn.execute(
                "UPDATE repositories SET vocabulary = ? WHERE repository_id = ?",
                (vocabulary_json, repository_id),
            )

    def update_repository_metric(self, repository_id: str, metric: str) -> None:
        with self._tx() as conn:
            conn.execute(
                "UPDATE repositories SET chosen_metric = ? WHERE repository_id = ?",
                (metric, repository_id),
            )

    def set_last_harvest(self, repository_id: str, when: str) -> None:
        with self._tx() as conn:
            conn.execute(
                "UPDATE repositories SET last_harvest = ? WHERE repository_id = ?",
                (when, repository_id),
            )

    # --- harvested records ------------------------------------------------------

    def replace_all_records(self, repository_id: str, rows: list[tuple[str, str]]) -> None:
        with self._tx() as conn:
            conn.execute("DELETE FROM records WHERE repository_id = ?", (repository_id,))
            conn.executemany(
                "INSERT INTO records VALUES (?, ?, ?)",
                [(repository_id, identifier, payload) for identifier, payload in rows],
            )

    def apply_record_changes(
        self, repository_id: str, upserts: list[tuple[str, str]], deletes: list[str]
    ) -> None:
        with self._tx() as conn:
            conn.executemany(
                "INSERT INTO records VALUES (?, ?, ?) "
                "ON CONFLICT(repository_id, identifier) DO UPDATE SET payload = excluded.payload",
                [(repository_id, identifier, payload) for identifier, payload in upserts],
            )
            conn.executemany(
                "DELETE FROM records WHERE repository_id = ? AND identifier = ?",
                [(repository_id, identifier) for identifier in deletes],
            )

    def record_payloads(self, repository_id: str) -> list[str]:
        with self._tx() as conn:
            rows = conn.execute(
                "SELECT payload FROM records WHERE repository_id = ? ORDER BY identifier",
                (repository_id,),
            ).fetchall()
            return [row["payload"] for row in rows]

    # --- jobs --------------------------------------------------------------------

    def create_job(self, row: dict) -> None:
        with self._tx() as conn:
            conn.execute(
                """INSERT INTO jobs
                   (job_id, repository_id, mode, state, stage, records_seen,
                    error, created_at, started_at, finished_at)
                   VALUES (:job_id, :repository_id, :mode, :state, :stage, :records_seen,
                    :error, :created_at, :started_at, :finished_at)""",
                row,
            )

    def update_job(self, job_id: str, **columns) -> None:
        if not columns:
            return
        assignments = ", ".join(f"{name} = :{name}" for name in columns)
        columns["job_id"] = job_id
        with self._tx() as conn:
            conn.execute(f"UPDATE jobs SET {assignments} WHERE job_id = :job_id", columns)

    def job_by_id(self, job_id: str) -> sqlite3.Row | None:
        with self._tx() as conn:
            return conn.execute("SELECT * FROM jobs WHERE job_id = ?", (job_id,)).fetchone()

    def fail_unfinished_jobs(self, message: str, finished_at: str) -> int:
        with self._tx() as conn:
            cursor = conn.execute(
                "UPDATE jobs SET state = 'failed', error = ?, finished_at = ? "
                "WHERE state IN ('queued', 'harvesting', 'building')",
                (message, finished_at),
            )
            return cursor.rowcount

    # --- snapshots -----------------------------------------------------------------

    def publish_snapshot(
        self, repository_id: str, snapshot_id: str, payload: bytes, built_at: str
    ) -> None:
        with self._tx() as conn:
            conn.execute(
                "INSERT OR REPLACE INTO snapshots VALUES (?, ?, ?, ?)",
                (repository_id, snapshot_id, payload, built_at),
            )
            conn.execute(
                "UPDATE repositories SET current_snapshot_id = ? WHERE repository_id = ?",
                (snapshot_id, repository_id),
            )

    def current_snapshot_payload(self, repository_id: str) -> bytes | None:
        with self._tx() as conn:
            row = conn.execute(
                "SELECT s.payload FROM repositories r "
                "JOIN snapshots s ON s.repository_id = r.repository_id "
                "AND s.snapshot_id = r.current_snapshot_id "
                "WHERE r.repository_id = ?",
                (repository_id,),
            ).fetchone()
            return row["payload"] if row is not None else None
