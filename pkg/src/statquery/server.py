"""HTTP/JSON API over the session service.

Every response carries schema_version; errors are structured
{error_class, message, detail} with a 4xx status. Work within one
session is serialized by a per-session lock while separate sessions run
concurrently on the server's worker threads.
"""

from __future__ import annotations

from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .errors import (
    DanglingReferenceError,
    MigrationError,
    NoModelError,
    StatQueryError,
    UnknownVariableError,
)
from .hops import DEFAULT_DRAWS, draw_coefficients, predict_curves
from .inference import model_summary
from .session import (
    SCHEMA_VERSION,
    SessionStore,
    attach_dataset,
    chart_data,
    handle_query,
    json_safe,
    model_views,
)

_NOT_FOUND = (MigrationError, DanglingReferenceError)


class QueryBody(BaseModel):
    text: str


def _envelope(payload: dict) -> dict:
    return {"schema_version": SCHEMA_VERSION, **payload}


def create_app(store: SessionStore, auto_persist: bool = True) -> FastAPI:
    app = FastAPI(title="statquery", version="0.1.0")

    # the browser companion may be served from a different local port
    from fastapi.middleware.cors import CORSMiddleware

    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["GET", "POST"],
        allow_headers=["*"],
    )

    @app.exception_handler(StatQueryError)
    async def _stat_error(request: Request, err: StatQueryError):
        status = 404 if isinstance(err, _NOT_FOUND) else 400
        return JSONResponse(
            status_code=status,
            content=_envelope(
                {
                    "error_class": type(err).__name__,
                    "message": str(err),
                    "detail": getattr(err, "detail", None),
                }
            ),
        )

    @app.exception_handler(RequestValidationError)
    async def _validation_error(request: Request, err: RequestValidationError):
        return JSONResponse(
            status_code=422,
            content=_envelope(
                {
                    "error_class": "ValidationError",
                    "message": "request did not match the endpoint schema",
                    "detail": err.errors(),
                }
            ),
        )

    def _persist(session):
        if auto_persist:
            store.persist(session)

    @app.post("/sessions")
    def create_session():
        session = store.create()
        _persist(session)
        return _envelope({"session_id": session.id})

    @app.post("/sessions/{session_id}/dataset")
    async def upload_dataset(
        session_id: str,
        request: Request,
        name: str = Query(default=""),
        delimiter: str = Query(default=","),
    ):
        session = store.get(session_id)
        body = await request.body()
        with store.lock(session_id):
            summary = attach_dataset(
                session, body, source_name=name, delimiter=delimiter
            )
            _persist(session)
        return _envelope({"dataset": summary})

    @app.post("/sessions/{session_id}/query")
    def post_query(session_id: str, body: QueryBody):
        session = store.get(session_id)
        with store.lock(session_id):
            entry = handle_query(session, body.text)
            _persist(session)
        return _envelope({"response": entry.to_json()})

    @app.get("/sessions/{session_id}/model")
    def get_model(session_id: str):
        session = store.get(session_id)
        model = session.require_model()
        return _envelope({"model": json_safe(model_summary(model))})

    @app.get("/sessions/{session_id}/charts")
    def get_charts(
        session_id: str,
        vars: str = Query(...),
        mode: str = Query(default="aggregated"),
    ):
        session = store.get(session_id)
        variables = [v.strip() for v in vars.split(",") if v.strip()]
        return _envelope({"payload": json_safe(chart_data(session, variables, mode))})

    @app.get("/sessions/{session_id}/model/views")
    def get_model_views(session_id: str):
        session = store.get(session_id)
        return _envelope({"views": model_views(session)})

    @app.get("/sessions/{session_id}/hops")
    def get_hops(
        session_id: str,
        draws: int = Query(default=DEFAULT_DRAWS, ge=1),
        seed: int | None = Query(default=None),
        focus: str | None = Query(default=None),
    ):
        session = store.get(session_id)
        model = session.require_model()
        use_seed = session.default_seed if seed is None else seed
        drawset = draw_coefficients(model, draws, seed=use_seed)
        payload = {"hops": drawset.to_json()}
        focus_var = focus or next(iter(model.design.continuous_vars), None)
        if focus_var is not None:
            curves = predict_curves(drawset, session.require_dataset(), focus_var)
            payload["curves"] = curves.to_json()
        return _envelope(json_safe(payload))

    @app.get("/sessions/{session_id}/transcript")
    def get_transcript(session_id: str):
        session = store.get(session_id)
        return _envelope(
            {"transcript": [e.to_json() for e in session.transcript]}
        )

    return app
