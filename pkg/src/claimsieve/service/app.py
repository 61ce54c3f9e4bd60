"""HTTP annotation service: task queue, label persistence, progress, export.

The API is the single source of truth for the annotation UI served at ``/``;
every accepted label hits disk before the response returns.
"""

from __future__ import annotations

import os
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query, Response
from fastapi.responses import HTMLResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles

from ..conformal import calibrate
from ..corpus import encode_extended
from ..errors import AlphaTooSmall, ClaimsieveError, UnannotatedExample
from ..scoring import parse_scorer
from .schemas import (
    CalibrateRequest,
    CalibrateResponse,
    LabelRequest,
    LabelResponse,
    ProgressResponse,
    TaskResponse,
)
from .store import (
    AnnotationTask,
    CorpusStore,
    RelabelConflict,
    UnknownLabelValue,
    UnknownSubClaimId,
)

_FALLBACK_PAGE = """<!doctype html>
<html><head><title>claimsieve annotation</title></head>
<body>
<h1>claimsieve annotation service</h1>
<p>The UI bundle was not found. Build it with <code>npm run build</code> in
<code>frontend/</code> and restart, or use the API directly:</p>
<ul>
<li><a href="/api/tasks/next">GET /api/tasks/next</a></li>
<li><a href="/api/progress">GET /api/progress</a></li>
<li><a href="/api/export">GET /api/export</a></li>
<li>POST /api/labels {"subclaim_id": ..., "raw_label": ...}</li>
</ul>
</body></html>
"""


def resolve_ui_dir(ui_dir: str | None = None) -> Path | None:
    candidates = [ui_dir, os.environ.get("CLAIMSIEVE_UI_DIR"), "frontend/dist"]
    for candidate in candidates:
        if candidate and Path(candidate).is_dir():
            return Path(candidate)
    return None


def create_app(corpus_path: Path, ui_dir: str | None = None) -> FastAPI:
    store = CorpusStore(Path(corpus_path))
    app = FastAPI(title="claimsieve annotation service")
    app.state.store = store

    @app.get("/api/tasks/next", response_model=TaskResponse)
    def next_task():
        task = store.next_unlabeled()
        if task is None:
            return Response(status_code=204)
        return _task_response(task)

    @app.get("/api/tasks/{subclaim_id}", response_model=TaskResponse)
    def get_task(subclaim_id: str):
        try:
            return _task_response(store.task(subclaim_id))
        except UnknownSubClaimId as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc

    @app.post("/api/labels", response_model=LabelResponse)
    def post_label(request: LabelRequest, overwrite: bool = Query(default=False)):
        try:
            store.set_label(request.subclaim_id, request.raw_label, overwrite=overwrite)
        except UnknownLabelValue as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        except UnknownSubClaimId as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        except RelabelConflict as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        return LabelResponse(
            subclaim_id=request.subclaim_id,
            raw_label=request.raw_label,
            progress=ProgressResponse(**store.progress()),
        )

    @app.get("/api/progress", response_model=ProgressResponse)
    def progress():
        return ProgressResponse(**store.progress())

    @app.get("/api/export")
    def export():
        return PlainTextResponse(store.export_text(), media_type="application/jsonl")

    @app.post("/api/calibrate", response_model=CalibrateResponse)
    def calibrate_endpoint(request: CalibrateRequest):
        corpus = store.snapshot()
        try:
            spec = parse_scorer(request.scorer, seed=request.seed)
            result = calibrate(corpus, spec, request.alpha, request.a)
        except (AlphaTooSmall, UnannotatedExample, ValueError, ClaimsieveError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return CalibrateResponse(
            q_hat=encode_extended(result.q_hat),
            alpha=result.alpha,
            a=result.a,
            n=result.n,
            scorer=result.scorer,
            seed=result.seed,
            created_at=result.created_at,
            min_alpha=1.0 / (result.n + 1),
        )

    resolved_ui = resolve_ui_dir(ui_dir)
    if resolved_ui is not None:
        app.mount("/", StaticFiles(directory=resolved_ui, html=True), name="ui")
    else:

        @app.get("/", response_class=HTMLResponse)
        def index():
            return _FALLBACK_PAGE

    return app


def _task_response(task: AnnotationTask) -> TaskResponse:
    return TaskResponse(
        example_id=task.example_id,
        subclaim_id=task.subclaim_id,
        claim=task.claim,
        input=task.input,
        original_output=task.original_output,
        position=task.position,
        total_claims=task.total_claims,
        current_label=task.current_label,
        siblings=[
            {"position": position, "text": text, "labeled": labeled}
            for position, text, labeled in task.siblings
        ],
    )
