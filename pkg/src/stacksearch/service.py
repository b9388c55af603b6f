"""HTTP search service over a loaded, immutable index.

One loader, many concurrent readers: the engine is loaded once (or
injected) and never mutated by requests, so handlers need no locks.
Until a load completes the API answers 503 and /healthz reports
index_loaded false.
"""

from __future__ import annotations

import time
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .engine import RenderedResult, SearchEngine
from .ranking import DEFAULT_DISPLAY_K

MAX_BODY_BYTES = 1 << 20
MAX_DISPLAY_K = 30


class SearchRequestBody(BaseModel):
    stacktrace: str
    k: int | None = Field(default=None, ge=1, le=MAX_DISPLAY_K)


def _result_payload(result: RenderedResult) -> dict:
    return {
        "question_id": result.question_id,
        "title": result.title,
        "url": result.url,
        "similarity": result.similarity,
        "summary": result.summary,
        "has_accepted_answer": result.has_accepted_answer,
        "view_count": result.view_count,
        "score": result.score,
    }


def create_app(
    engine: SearchEngine | None = None,
    ui_dir: str | Path | None = None,
    default_k: int = DEFAULT_DISPLAY_K,
    max_body_bytes: int = MAX_BODY_BYTES,
) -> FastAPI:
    app = FastAPI(title="stacksearch", docs_url=None, redoc_url=None)
    app.state.engine = engine
    app.state.default_k = default_k

    @app.middleware("http")
    async def limit_body_size(request: Request, call_next):
        # Declared size is authoritative for the usual clients; bodies
        # without a Content-Length are left to the route handlers.
        length = request.headers.get("content-length")
        if length is not None and length.isdigit() and int(length) > max_body_bytes:
            return JSONResponse({"detail": "request body too large"}, status_code=413)
        return await call_next(request)

    def require_engine() -> SearchEngine:
        loaded = app.state.engine
        if loaded is None:
            raise HTTPException(status_code=503, detail="index not loaded")
        return loaded

    @app.post("/api/v1/search")
    def search(body: SearchRequestBody) -> JSONResponse:
        loaded = require_engine()
        stacktrace = body.stacktrace.strip()
        if not stacktrace:
            raise HTTPException(status_code=400, detail="stacktrace is empty")
        started = time.perf_counter()
        outcome = loaded.search(stacktrace, k=body.k or app.state.default_k)
        elapsed_ms = (time.perf_counter() - started) * 1000.0
        payload = {
            "results": [_result_payload(r) for r in outcome.results],
            "query_tokens_total": outcome.query_tokens_total,
            "query_tokens_known": outcome.query_tokens_known,
            "elapsed_ms": elapsed_ms,
        }
        if outcome.reason is not None:
            payload["reason"] = outcome.reason
        return JSONResponse(payload)

    @app.get("/api/v1/post/{question_id}")
    def post_lookup(question_id: int) -> JSONResponse:
        loaded = require_engine()
        found = loaded.lookup_question(question_id)
        if found is None:
            raise HTTPException(status_code=404, detail="unknown question id")
        meta, summary = found
        return JSONResponse(
            {
                "question_id": meta.post_id,
                "title": meta.title,
                "url": f"https://stackoverflow.com/q/{meta.post_id}",
                "creation_date": meta.creation_date.isoformat(),
                "score": meta.score,
                "view_count": meta.view_count,
                "accepted_answer_id": meta.accepted_answer_id,
                "summary": summary,
            }
        )

    @app.get("/api/v1/stats")
    def stats() -> JSONResponse:
        loaded = app.state.engine
        if loaded is None:
            return JSONResponse({"index_loaded": False})
        return JSONResponse({"index_loaded": True, **loaded.stats()})

    @app.get("/healthz")
    def healthz() -> JSONResponse:
        return JSONResponse({"status": "ok", "index_loaded": app.state.engine is not None})

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
