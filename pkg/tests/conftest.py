"""Shared fixtures: the OAI fixture server, reference corpora, service harness."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import pytest
from fastapi.testclient import TestClient
from hypothesis import HealthCheck, settings

from fixture_oai import FixtureOaiServer, records_as_dc
from termrec.config import ServiceConfig
from termrec.corpus import DCRecord, build_corpus
from termrec.modelio import ModelBundle, build_bundle
from termrec.service.app import create_app
from termrec.service.core import ServiceCore
from termrec.service.store import Store
from termrec.text import default_analyzer

settings.register_profile(
    "suite", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("suite")

DATA_DIR = Path(__file__).parent / "data"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance test at the end of the run."""
    rows: list[tuple[str, str]] = []
    for outcome in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance.py" not in nodeid:
                continue
            if getattr(report, "when", "call") != "call" and outcome == "passed":
                continue
            rows.append((nodeid.split("::")[-1], outcome))
    if not rows:
        return
    terminalreporter.section("acceptance")
    for name, outcome in rows:
        label = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{label}  {name}")


@pytest.fixture(scope="session")
def oai_server():
    server = FixtureOaiServer().start()
    yield server
    server.stop()


@pytest.fixture
def fixture_oai(oai_server):
    """The shared OAI server with state reset for each test."""
    oai_server.state.reset()
    return oai_server


@pytest.fixture(scope="session")
def sample_page_bytes() -> bytes:
    return (DATA_DIR / "sample_oai_page.xml").read_bytes()


@pytest.fixture(scope="session")
def german_bundle() -> ModelBundle:
    corpus = build_corpus(records_as_dc(), default_analyzer("de"))
    return build_bundle(corpus, default_analyzer("de"), repository_id="fixture-de")


def _dated(year: int, month: int) -> datetime:
    return datetime(year, month, 15, 12, 0, tzinfo=timezone.utc)


def usecase_records() -> list[DCRecord]:
    """English corpus in which youth unemployment texts are tagged with two
    controlled terms; other documents cover unrelated topics."""
    both = ("Labour market policy", "Training position")
    rows = [
        ("u01", "Unemployment of young people in Europe",
         "Young people face unemployment after school.", both, _dated(2009, 3)),
        ("u02", "Young people and unemployment",
         "Training schemes reduce unemployment among young people.", both, _dated(2009, 8)),
        ("u03", "Unemployment among young people",
         "A study of young people entering the labour market.", both, _dated(2010, 2)),
        ("u04", "Programmes for young people",
         "How unemployment of young people responds to policy.", both, _dated(2010, 9)),
        ("u05", "Young people out of work",
         "Unemployment, poverty and inequality among young people.",
         both + ("Social inequality",), _dated(2011, 4)),
        ("u06", "School leavers and unemployment",
         "Young people between school and work.",
         both + ("Social inequality",), _dated(2011, 10)),
        ("m01", "Monetary policy after the crisis",
         "Central banks, inflation and unemployment.", ("Monetary policy",), _dated(2009, 5)),
        ("m02", "Inflation targeting",
         "How central banks steer prices.", ("Monetary policy",), _dated(2010, 6)),
        ("m03", "The money supply",
         "Money, prices and output.", ("Monetary policy",), _dated(2011, 7)),
        ("w01", "Transboundary water management",
         "How donors promote water management.", ("Water management",), _dated(2010, 11)),
        ("w02", "Water policy in Africa",
         "Rivers, water and development.", ("Water management",), _dated(2011, 1)),
        ("s01", "Inequality in modern societies",
         "Income inequality and social mobility.", ("Social inequality",), _dated(2009, 12)),
    ]
    return [
        DCRecord(
            identifier=f"oai:usecase:{ident}",
            titles=(title,),
            descriptions=(desc,),
            subjects=subjects,
            creators=(),
            date=date,
            language="en",
            extras={},
        )
        for ident, title, desc, subjects, date in rows
    ]


@pytest.fixture(scope="session")
def usecase_bundle() -> ModelBundle:
    corpus = build_corpus(usecase_records(), default_analyzer("en"))
    return build_bundle(corpus, default_analyzer("en"), repository_id="fixture-en")


@dataclass
class ServiceHarness:
    core: ServiceCore
    client: TestClient
    store: Store
    config: ServiceConfig
    notifications: list[dict] = field(default_factory=list)

    def register_account(self, username: str = "alice",
                         password: str = "correct horse battery",
                         email: str = "alice@example.org") -> tuple[str, str]:
        resp = self.client.post("/api/v1/accounts", json={
            "username": username, "password": password, "email": email,
        })
        assert resp.status_code == 201, resp.text
        body = resp.json()
        return body["account_id"], body["api_key"]

    def register_repository(self, api_key: str, oai_url: str, *,
                            language: str = "de", **extra) -> str:
        payload = {"oai_url": oai_url, "language": language, **extra}
        resp = self.client.post("/api/v1/repositories", json=payload,
                                headers={"X-Api-Key": api_key})
        assert resp.status_code == 201, resp.text
        return resp.json()["repository_id"]

    def run_job(self, api_key: str, repo_id: str, mode: str = "full",
                timeout: float = 30.0) -> dict:
        resp = self.client.post(
            f"/api/v1/repositories/{repo_id}/jobs", params={"mode": mode},
            headers={"X-Api-Key": api_key})
        assert resp.status_code == 202, resp.text
        job_id = resp.json()["job_id"]
        return self.wait_for_job(api_key, job_id, timeout=timeout)

    def wait_for_job(self, api_key: str, job_id: str, timeout: float = 30.0) -> dict:
        deadline = time.monotonic() + timeout
        while True:
            resp = self.client.get(f"/api/v1/jobs/{job_id}",
                                   headers={"X-Api-Key": api_key})
            assert resp.status_code == 200, resp.text
            body = resp.json()
            if body["state"] in ("done", "failed"):
                return body
            if time.monotonic() > deadline:
                raise AssertionError(f"job did not finish in time: {body}")
            time.sleep(0.02)


def build_harness(store_path: Path, **config_overrides) -> ServiceHarness:
    config = ServiceConfig(
        store_path=str(store_path),
        job_parallelism=2,
        retry_attempts=config_overrides.pop("retry_attempts", 3),
        retry_base_delay=config_overrides.pop("retry_base_delay", 0.05),
        retry_max_delay=config_overrides.pop("retry_max_delay", 2.0),
        **config_overrides,
    )
    store = Store(config.store_path)
    notifications: list[dict] = []
    core = ServiceCore(store, config, notifier=notifications.append,
                       password_iterations=1_000)
    client = TestClient(create_app(config, core))
    return ServiceHarness(core=core, client=client, store=store,
                          config=config, notifications=notifications)


@pytest.fixture
def make_service(tmp_path):
    created: list[ServiceHarness] = []
    counter = 0

    def factory(store_path: Path | None = None, **overrides) -> ServiceHarness:
        nonlocal counter
        counter += 1
        path = store_path or tmp_path / f"store{counter}.db"
        harness = build_harness(path, **overrides)
        created.append(harness)
        return harness

    yield factory
    for harness in created:
        harness.core.close()


@pytest.fixture
def service(make_service) -> ServiceHarness:
    return make_service()
