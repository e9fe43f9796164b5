"""HTTP API: verify a pair, browse its explanation, chat about it.

Sessions are in-memory only and expire after ``ttl_s`` seconds without
access.  Error bodies are always ``{"error": {"code": ..., "message": ...}}``
and the response shapes are pinned by the JSON schemas under /schemas.
"""

from __future__ import annotations

import io
from importlib import resources

import numpy as np
from fastapi import FastAPI, File, Request, UploadFile
from fastapi.responses import JSONResponse, Response
from PIL import Image

from .config import ServiceConfig
from .errors import (
    BackendFailure,
    FaceXplainError,
    NoFaceFound,
    SessionExpired,
    UnknownSession,
)
from .pipeline import (
    Runtime,
    UndecodableImage,
    decode_image,
    explain_verified_pair,
    table_payload,
)
from .qa import ask_question
from .saliency import render_overlay
from .sessions import SessionStore

MAX_UPLOAD_BYTES = 10 * 1024 * 1024
MAX_QUESTION_CHARS = 512

SCHEMA_NAMES = (
    "verify_response.schema.json",
    "ask_response.schema.json",
    "session_summary.schema.json",
)


def _error(status: int, code: str, message: str, **extra) -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content={"error": {"code": code, "message": message, **extra}},
    )


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig()
    runtime = Runtime.from_config(config)
    store = SessionStore(ttl_s=config.ttl_s)

    app = FastAPI(title="facexplain", version="0.1.0")
    app.state.runtime = runtime
    app.state.store = store

    @app.post("/v1/verify", status_code=201)
    async def verify(
        image_a: UploadFile | None = File(default=None),
        image_b: UploadFile | None = File(default=None),
    ):
        for name, part in (("image_a", image_a), ("image_b", image_b)):
            if part is None:
                return _error(400, "MISSING_PART", f"multipart field {name!r} is required")
        data_a = await image_a.read()
        data_b = await image_b.read()
        for name, data in (("image_a", data_a), ("image_b", data_b)):
            if len(data) > MAX_UPLOAD_BYTES:
                return _error(400, "IMAGE_TOO_LARGE", f"{name} exceeds 10 MB")
        try:
            img_a = decode_image(data_a, "image_a")
            img_b = decode_image(data_b, "image_b")
        except UndecodableImage as exc:
            return _error(400, "UNDECODABLE_IMAGE", str(exc), image=exc.part)
        try:
            result = explain_verified_pair(img_a, img_b, runtime)
        except NoFaceFound as exc:
            return _error(422, "NO_FACE_FOUND", str(exc), image=exc.image)
        except BackendFailure as exc:
            return _error(503, "BACKEND_UNAVAILABLE", str(exc))

        session = store.create(
            record=result.record,
            table=result.table,
            maps=result.maps,
            context=result.context,
            probe_pixels=result.aligned_a.pixels,
            reference_pixels=result.aligned_b.pixels,
        )
        heatmap_urls = {
            key: f"/v1/sessions/{session.session_id}/heatmaps/{key}.png"
            for key in session.maps
        }
        return JSONResponse(
            status_code=201,
            content={
                "session_id": session.session_id,
                "score": result.record.score,
                "decision": result.record.decision,
                "confidence": result.confidence,
                "table": table_payload(result.table),
                "heatmap_urls": heatmap_urls,
            },
        )

    @app.post("/v1/sessions/{session_id}/ask")
    def ask(session_id: str, payload: dict, request: Request):
        try:
            session = store.get(session_id)
        except (UnknownSession, SessionExpired):
            return _error(404, "UNKNOWN_SESSION", "unknown or expired session")
        question = (payload.get("question") or "").strip()
        if not question:
            return _error(422, "EMPTY_QUESTION", "question must be 1-512 characters")
        if len(question) > MAX_QUESTION_CHARS:
            return _error(422, "QUESTION_TOO_LONG", "question must be 1-512 characters")
        with session.ask_lock:
            try:
                result = ask_question(
                    question,
                    session.context,
                    runtime.qa,
                    runtime.sentence_embedder,
                    tau=config.tau,
                    k=config.top_k,
                )
            except BackendFailure as exc:
                return _error(503, "BACKEND_UNAVAILABLE", str(exc))
            except FaceXplainError as exc:
                return _error(422, "CANNOT_ANSWER", str(exc))
            session.turns.append((question, result))
        return {
            "answer": result.answer,
            "confidence": result.confidence,
            "used_subcontext": result.used_subcontext,
            "subcontext_sentences": list(result.subcontext_sentences),
        }

    @app.get("/v1/sessions/{session_id}")
    def session_summary(session_id: str):
        try:
            session = store.get(session_id)
        except UnknownSession:
            return _error(404, "UNKNOWN_SESSION", "no such session")
        except SessionExpired:
            return _error(410, "SESSION_EXPIRED", "session expired")
        return {
            "session_id": session.session_id,
            "pair_id": session.record.pair_id,
            "score": session.record.score,
            "decision": session.record.decision,
            "confidence": (
                session.record.pic
                if session.record.decision == "match"
                else 1.0 - session.record.pic
            ),
            "table": table_payload(session.table),
            "turns": [
                {
                    "question": question,
                    "answer": result.answer,
                    "confidence": result.confidence,
                    "used_subcontext": result.used_subcontext,
                }
                for question, result in session.turns
            ],
            "created_at": session.created_at,
            "template_version": session.context.template_version,
        }

    @app.get("/v1/sessions/{session_id}/heatmaps/{method}.png")
    def heatmap(session_id: str, method: str):
        try:
            session = store.get(session_id)
        except UnknownSession:
            return _error(404, "UNKNOWN_SESSION", "no such session")
        except SessionExpired:
            return _error(410, "SESSION_EXPIRED", "session expired")
        if method not in session.maps:
            return _error(404, "UNKNOWN_METHOD", f"no heatmap named {method!r}")
        if method not in session.heatmap_cache:
            base = session.reference_pixels if method.endswith("_rev") else session.probe_pixels
            overlay = render_overlay(session.maps[method], base)
            buf = io.BytesIO()
            Image.fromarray(overlay, mode="RGB").save(buf, format="PNG")
            session.heatmap_cache[method] = buf.getvalue()
        return Response(content=session.heatmap_cache[method], media_type="image/png")

    @app.get("/schemas/{name}")
    def schema(name: str):
        if name not in SCHEMA_NAMES:
            return _error(404, "UNKNOWN_SCHEMA", f"no schema named {name!r}")
        text = resources.files("facexplain").joinpath(f"assets/schemas/{name}").read_text()
        return Response(content=text, media_type="application/schema+json")

    return app


def run_server(config: ServiceConfig) -> None:
    import uvicorn

    uvicorn.run(create_app(config), host=config.host, port=config.port)
