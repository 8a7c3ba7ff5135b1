"""FastAPI application implementing the scoring protocol.

Body validation is manual so error codes match the protocol exactly:
400 for a malformed body (bad JSON, missing or mistyped fields, unknown
kind), 422 for well-formed requests the service cannot score (empty texts,
missing source for semantic scoring, texts outside the model's limits),
5xx for scorer failures.
"""

from __future__ import annotations

import json
import math

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .backends import CausalLMFluencyBackend, EncoderSemanticBackend, UnscorableInput
from .config import ServiceConfig


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": message})


def _validate_body(body: object) -> tuple[str, str | None, list[str]] | JSONResponse:
    if not isinstance(body, dict):
        return _error(400, "body must be a JSON object")
    kind = body.get("kind")
    if kind not in ("fluency", "semantic"):
        return _error(400, "kind must be 'fluency' or 'semantic'")
    if "texts" not in body:
        return _error(400, "missing field 'texts'")
    texts = body["texts"]
    if not isinstance(texts, list) or not all(isinstance(t, str) for t in texts):
        return _error(400, "texts must be a list of strings")
    source = body.get("source")
    if source is not None and not isinstance(source, str):
        return _error(400, "source must be a string or null")
    if not texts:
        return _error(422, "texts must be non-empty")
    if kind == "semantic" and source is None:
        return _error(422, "semantic scoring requires a source")
    return kind, source, texts


def create_app(config: ServiceConfig) -> FastAPI:
    app = FastAPI(title="scorer-service", version="0.1.0")
    app.state.config = config
    app.state.fluency = CausalLMFluencyBackend(config.fluency_model_id, config.device)
    app.state.semantic = EncoderSemanticBackend(config.semantic_model_id, config.device)

    @app.post("/v1/score")
    async def score(request: Request):
        try:
            body = json.loads(await request.body())
        except (ValueError, UnicodeDecodeError) as exc:
            return _error(400, f"malformed JSON body: {exc}")
        validated = _validate_body(body)
        if isinstance(validated, JSONResponse):
            return validated
        kind, source, texts = validated

        scores: list[float] = []
        try:
            for start in range(0, len(texts), config.max_batch):
                chunk = texts[start : start + config.max_batch]
                if kind == "fluency":
                    scores.extend(app.state.fluency.score(chunk))
                else:
                    scores.extend(app.state.semantic.score(source, chunk))
        except UnscorableInput as exc:
            return _error(422, str(exc))
        except Exception as exc:  # model failure -> protocol 5xx
            return _error(500, f"scorer failure: {exc}")
        if not all(math.isfinite(s) for s in scores):
            return _error(500, "scorer produced a non-finite score")
        return {"scores": scores}

    @app.get("/healthz")
    async def healthz():
        return {
            "status": "ok",
            "fluency_model": config.fluency_model_id,
            "semantic_model": config.semantic_model_id,
        }

    return app
