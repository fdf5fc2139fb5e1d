"""HTTP layer: routes under /api/v1, credential resolution, error mapping,
and content negotiation (XML by default, JSON on Accept: application/json).

Handlers are synchronous on purpose; the framework runs them on a thread
pool, and every one reads a consistent model bundle exactly once.
"""

from __future__ import annotations

import logging
from contextlib import asynccontextmanager
from typing import Literal

from fastapi import Body, Depends, FastAPI, Query, Request, Response
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .. import wire
from ..config import ServiceConfig
from ..errors import (
    AuthenticationError,
    ConflictError,
    EmptyQueryError,
    InputValidationError,
    MetricUnavailableError,
    NoModelError,
    NotFoundError,
    ProtocolError,
    TermrecError,
    TransportError,
    VocabularyUploadError,
)
from .core import ServiceCore, profile_view
from .store import Store

logger = logging.getLogger(__name__)

SESSION_COOKIE = "termrec_session"

_STATUS_BY_ERROR: list[tuple[type, int]] = [
    (AuthenticationError, 401),
    (NotFoundError, 404),
    (ConflictError, 409),
    (NoModelError, 409),
    (EmptyQueryError, 422),
    (InputValidationError, 422),
    (VocabularyUploadError, 422),
    (MetricUnavailableError, 422),
    (ProtocolError, 422),
    (TransportError, 502),
]


def _status_for(exc: TermrecError) -> int:
    for error_type, status in _STATUS_BY_ERROR:
        if isinstance(exc, error_type):
            return status
    return 500


class AccountCreate(BaseModel):
    username: str
    password: str
    email: str


class SessionCreate(BaseModel):
    username: str
    password: str


class RepositoryCreate(BaseModel):
    oai_url: str
    language: str
    set_spec: str | None = None
    split_delimiter: str = ";"
    strip_codes: bool = True
    extra_stopwords: list[str] = Field(default_factory=list)


class MetricUpdate(BaseModel):
    chosen_metric: str


MetricParam = Literal["jaccard", "nwd", "ml"]
FieldParam = Literal["subject", "free"]


def create_app(
    config: ServiceConfig | None = None, core: ServiceCore | None = None
) -> FastAPI:
    config = config or ServiceConfig()
    if core is None:
        core = ServiceCore(Store(config.store_path), config=config)

    @asynccontextmanager
    async def lifespan(_app: FastAPI):
        yield
        core.close()

    app = FastAPI(
        title="termrec",
        docs_url=None,
        redoc_url=None,
        openapi_url=None,
        lifespan=lifespan,
    )
    app.state.core = core

    @app.exception_handler(TermrecError)
    def domain_error(_request: Request, exc: TermrecError) -> JSONResponse:
        return JSONResponse(status_code=_status_for(exc), content={"detail": str(exc)})

    def require_account(
        request: Request,
        api_key: str | None = Query(default=None),
    ) -> str:
        header_key = request.headers.get("X-Api-Key")
        key = header_key or api_key
        if key:
            return core.authenticate_key(key)
        token = request.cookies.get(SESSION_COOKIE)
        if token:
            account_id = core.account_for_session(token)
            if account_id is not None:
                return account_id
        raise AuthenticationError("missing or invalid credentials")

    def negotiated(request: Request, payload: dict, to_xml) -> Response:
        accept = request.headers.get("Accept", "")
        if "application/json" in accept:
            return Response(
                content=wire.render_json(payload), media_type="application/json"
            )
        return Response(content=to_xml(payload), media_type="application/xml")

    # --- accounts and sessions ----------------------------------------------

    @app.post("/api/v1/accounts", status_code=201)
    def create_account(body: AccountCreate) -> dict:
        return core.register_account(body.username, body.password, body.email)

    @app.post("/api/v1/session")
    def create_session(body: SessionCreate) -> Response:
        token, account_id = core.create_session(body.username, body.password)
        response = JSONResponse({"account_id": account_id})
        response.set_cookie(SESSION_COOKIE, token, httponly=True, samesite="lax")
        return response

    @app.delete("/api/v1/session")
    def destroy_session(request: Request) -> dict:
        token = request.cookies.get(SESSION_COOKIE)
        if token:
            core.destroy_session(token)
        return {"ok": True}

    @app.get("/api/v1/health")
    def health() -> dict:
        return {"status": "ok"}

    # --- repositories ---------------------------------------------------------

    @app.post("/api/v1/repositories", status_code=201)
    def create_repository(
        body: RepositoryCreate, account_id: str = Depends(require_account)
    ) -> dict:
        profile = core.register_repository(
            account_id,
            oai_url=body.oai_url,
            language=body.language,
            set_spec=body.set_spec,
            split_delimiter=body.split_delimiter,
            strip_codes=body.strip_codes,
            extra_stopwords=tuple(body.extra_stopwords),
        )
        return profile_view(profile)

    @app.get("/api/v1/repositories")
    def list_repositories(account_id: str = Depends(require_account)) -> list[dict]:
        return [profile_view(p) for p in core.list_profiles(account_id)]

    @app.get("/api/v1/repositories/{repository_id}")
    def get_repository(
        repository_id: str, account_id: str = Depends(require_account)
    ) -> dict:
        return profile_view(core.profile(account_id, repository_id))

    @app.patch("/api/v1/repositories/{repository_id}")
    def patch_repository(
        repository_id: str,
        body: MetricUpdate,
        account_id: str = Depends(require_account),
    ) -> dict:
        return profile_view(core.set_metric(account_id, repository_id, body.chosen_metric))

    @app.post("/api/v1/repositories/{repository_id}/vocabulary")
    def upload_vocabulary(
        repository_id: str,
        body: bytes = Body(..., media_type="text/plain"),
        account_id: str = Depends(require_account),
    ) -> dict:
        count = core.upload_vocabulary(
            account_id, repository_id, body.decode("utf-8", errors="replace")
        )
        return {"terms": count}

    # --- jobs --------------------------------------------------------------------

    @app.post("/api/v1/repositories/{repository_id}/jobs", status_code=202)
    def start_job(
        repository_id: str,
        mode: Literal["full", "incremental"] = Query(default="full"),
        account_id: str = Depends(require_account),
    ) -> dict:
        return core.start_job(account_id, repository_id, mode)

    @app.get("/api/v1/jobs/{job_id}")
    def job_status(job_id: str, account_id: str = Depends(require_account)) -> dict:
        return core.job_status(account_id, job_id)

    # --- recommendation API ---------------------------------------------------------

    @app.get("/api/v1/repositories/{repository_id}/recommend")
    def recommend(
        request: Request,
        repository_id: str,
        term: str = Query(...),
        limit: int = Query(default=10, ge=1, le=100),
        metric: MetricParam | None = Query(default=None),
        account_id: str = Depends(require_account),
    ) -> Response:
        payload = core.recommend_response(account_id, repository_id, term, limit, metric)
        return negotiated(request, payload, wire.recommend_xml)

    @app.get("/api/v1/repositories/{repository_id}/expand")
    def expand(
        request: Request,
        repository_id: str,
        term: str = Query(...),
        n: int = Query(default=5, ge=0, le=20),
        metric: MetricParam | None = Query(default=None),
        account_id: str = Depends(require_account),
    ) -> Response:
        payload = core.expand_response(account_id, repository_id, term, n, metric)
        return negotiated(request, payload, wire.expand_xml)

    @app.get("/api/v1/repositories/{repository_id}/cloud")
    def cloud(
        request: Request,
        repository_id: str,
        term: str = Query(...),
        k: int = Query(default=30, ge=1, le=100),
        metric: MetricParam | None = Query(default=None),
        account_id: str = Depends(require_account),
    ) -> Response:
        payload = core.cloud_response(account_id, repository_id, term, k, metric)
        return negotiated(request, payload, wire.cloud_xml)

    @app.get("/api/v1/repositories/{repository_id}/biblio/top-terms")
    def biblio_top_terms(
        request: Request,
        repository_id: str,
        field: FieldParam = Query(default="subject"),
        k: int = Query(default=10, ge=1, le=100),
        account_id: str = Depends(require_account),
    ) -> Response:
        payload = core.top_terms_response(account_id, repository_id, field, k)
        return negotiated(request, payload, wire.top_terms_xml)

    @app.get("/api/v1/repositories/{repository_id}/biblio/coword")
    def biblio_coword(
        request: Request,
        repository_id: str,
        k: int = Query(default=10, ge=1, le=100),
        account_id: str = Depends(require_account),
    ) -> Response:
        payload = core.coword_response(account_id, repository_id, k)
        return negotiated(request, payload, wire.coword_xml)

    @app.get("/api/v1/repositories/{repository_id}/biblio/trend")
    def biblio_trend(
        request: Request,
        repository_id: str,
        term: str = Query(...),
        field: FieldParam = Query(default="subject"),
        account_id: str = Depends(require_account),
    ) -> Response:
        payload = core.trend_response(account_id, repository_id, term, field)
        return negotiated(request, payload, wire.trend_xml)

    return app
