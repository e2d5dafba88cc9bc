"""HTTP facade over the engine.

Endpoints (all JSON, UTF-8):

    POST /api/v1/search                     ranked keyframes for a text query
    POST /api/v1/temporal                   moment boundaries around an anchor
    POST /api/v1/qa                         append a QA submission, return a receipt
    GET  /api/v1/frames/{video_id}?from=&to=  keyframe strip for one video
    GET  /api/v1/corpus                     manifest summary
    GET  /healthz                           liveness probe

Request and response shapes mirror the engine dataclasses one to one; the
command line drives the same engine, so a search submitted here and the same
search run offline return identical entries.  Input errors map to 400,
unknown resources to 404, and encoder failures to 502.  Thumbnails are served
from the configured directory under /thumbs with a built-in placeholder at
/static/placeholder.svg for frames without one.
"""
from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Query, Request, Response
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, ConfigDict

from .engine import (
    Engine,
    EngineConfig,
    QASubmission,
    SearchOptions,
    TemporalOptions,
)
from .ensemble import ModelConfig
from .errors import ContractError, ParseError, TransportError, ValidationError
from .rerank import RerankConfig
from .temporal import MomentSelection

_PLACEHOLDER_SVG = (
    '<svg xmlns="http://www.w3.org/2000/svg" width="160" height="90">'
    '<rect width="160" height="90" fill="#2a2a2e"/>'
    '<text x="80" y="50" font-size="12" fill="#888" text-anchor="middle" '
    'font-family="sans-serif">no thumbnail</text></svg>'
)


class ModelSpec(BaseModel):
    model_config = ConfigDict(protected_namespaces=())

    model_id: str
    weight: float = 1.0
    enabled: bool = True


class RerankSpec(BaseModel):
    enabled: bool = True
    radius: int = 2
    include_center: bool = True


class SearchBody(BaseModel):
    query: str
    models: list[ModelSpec] | None = None
    rerank: RerankSpec | None = None
    limit: int = 100


class TemporalBody(BaseModel):
    model_config = ConfigDict(protected_namespaces=())

    anchor_key: int
    query_start: str
    query_end: str
    gap_c: int | None = None
    floor: float | None = None
    max_steps: int | None = None
    model_id: str | None = None


class MomentBody(BaseModel):
    video_id: str
    anchor_key: int
    start_key: int
    end_key: int
    start_score: float = 0.0
    end_score: float = 0.0


class QABody(BaseModel):
    session_id: str
    question: str
    answer: str
    moment: MomentBody
    viewed_frame_keys: list[int] = []


def _search_options(body: SearchBody) -> SearchOptions:
    models = None
    if body.models is not None:
        models = tuple(
            ModelConfig(model_id=m.model_id, weight=m.weight, enabled=m.enabled)
            for m in body.models
        )
    rerank = None
    if body.rerank is not None and body.rerank.enabled:
        rerank = RerankConfig(radius=body.rerank.radius, include_center=body.rerank.include_center)
    return SearchOptions(query=body.query, models=models, rerank=rerank, limit=body.limit)


def create_app(
    config: EngineConfig,
    engine: Engine | None = None,
    ui_dir: Path | str | None = None,
) -> FastAPI:
    """Build the application; pass a prebuilt ``engine`` to skip index loading."""
    engine = engine if engine is not None else Engine(config)
    app = FastAPI(title="momentseek", docs_url=None, redoc_url=None)
    app.state.engine = engine

    def _detail(status: int):
        def handler(request: Request, exc: Exception) -> JSONResponse:
            return JSONResponse(status_code=status, content={"detail": str(exc)})

        return handler

    app.add_exception_handler(ValidationError, _detail(400))
    app.add_exception_handler(ParseError, _detail(400))
    app.add_exception_handler(ContractError, _detail(502))
    app.add_exception_handler(TransportError, _detail(502))

    @app.post("/api/v1/search")
    def search(body: SearchBody) -> JSONResponse:
        outcome = engine.search(_search_options(body))
        return JSONResponse(outcome.to_dict())

    @app.post("/api/v1/temporal")
    def temporal(body: TemporalBody) -> JSONResponse:
        outcome = engine.temporal(
            TemporalOptions(
                anchor_key=body.anchor_key,
                query_start=body.query_start,
                query_end=body.query_end,
                model_id=body.model_id,
                max_span=body.gap_c,
                similarity_floor=body.floor,
                max_steps=body.max_steps,
            )
        )
        return JSONResponse(outcome.to_dict())

    @app.post("/api/v1/qa")
    def qa(body: QABody) -> JSONResponse:
        moment = MomentSelection(
            video_id=body.moment.video_id,
            anchor_key=body.moment.anchor_key,
            start_key=body.moment.start_key,
            end_key=body.moment.end_key,
            start_score=body.moment.start_score,
            end_score=body.moment.end_score,
        )
        submission = QASubmission(
            session_id=body.session_id,
            question=body.question,
            answer=body.answer,
            moment=moment,
            viewed_frame_keys=tuple(body.viewed_frame_keys),
        )
        return JSONResponse(engine.submit_qa(submission))

    @app.get("/api/v1/frames/{video_id}")
    def frames(
        video_id: str,
        from_index: int | None = Query(default=None, alias="from"),
        to_index: int | None = Query(default=None, alias="to"),
    ) -> JSONResponse:
        if not engine.manifest.has_video(video_id):
            return JSONResponse(status_code=404, content={"detail": f"unknown video {video_id!r}"})
        return JSONResponse({"frames": engine.frames_window(video_id, from_index, to_index)})

    @app.get("/api/v1/corpus")
    def corpus() -> JSONResponse:
        return JSONResponse(engine.corpus_summary())

    @app.get("/healthz")
    def healthz() -> JSONResponse:
        return JSONResponse(
            {
                "status": "ok",
                "frames": len(engine.manifest.frames),
                "models": sorted(engine.indexes),
            }
        )

    @app.get("/static/placeholder.svg")
    def placeholder() -> Response:
        return Response(content=_PLACEHOLDER_SVG, media_type="image/svg+xml")

    thumbs = config.thumbnail_dir
    if thumbs is not None and Path(thumbs).is_dir():
        app.mount("/thumbs", StaticFiles(directory=thumbs), name="thumbs")
    if ui_dir is not None:
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    return app
