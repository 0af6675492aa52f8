"""FastAPI application exposing the JSON embeddings protocol.

POST /v1/embeddings   {"model": name, "input": [text, ...]}
                      -> {"data": [{"index": i, "embedding": [...]}, ...]}
GET  /health          -> {"status": "ok"|"unhealthy", "models": [...]}

Errors are structured JSON: unknown model -> 404, oversized batch -> 413,
inference failure -> 500. ``data[i].index == i`` always; vector i belongs
to input i.
"""

from __future__ import annotations

import logging

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .config import SidecarConfig
from .models import MockModel, SentenceTransformerModel, published_dim

log = logging.getLogger("embedsim_sidecar")


class EmbeddingsRequest(BaseModel):
    model: str
    input: list[str] = Field(min_length=1)


def _error(status: int, kind: str, message: str) -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content={"error": {"type": kind, "message": message}},
    )


def build_registry(cfg: SidecarConfig) -> dict:
    registry = {}
    for entry in cfg.models:
        if entry.backend == "mock":
            if entry.dim is None:
                raise ValueError(f"mock model {entry.name!r} needs a dim")
            registry[entry.name] = MockModel(entry.name, entry.dim, entry.seed)
        else:
            registry[entry.name] = SentenceTransformerModel(
                entry.name, entry.ref or entry.name, device=entry.device
            )
            if entry.dim is not None and registry[entry.name].dim != entry.dim:
                log.warning(
                    "%s: configured dim %d but model produces %d",
                    entry.name, entry.dim, registry[entry.name].dim,
                )
        log.info(
            "registered %s (%s, dim %d)",
            entry.name, entry.backend, registry[entry.name].dim,
        )
    return registry


def create_app(cfg: SidecarConfig) -> FastAPI:
    app = FastAPI(title="embedsim-sidecar", docs_url=None, redoc_url=None)
    registry = build_registry(cfg)
    app.state.registry = registry
    app.state.max_batch = cfg.max_batch

    @app.post("/v1/embeddings")
    def serve_embeddings(req: EmbeddingsRequest, request: Request):
        model = registry.get(req.model)
        if model is None:
            return _error(
                404, "model_not_found",
                f"model {req.model!r} is not registered; "
                f"available: {sorted(registry)}",
            )
        if len(req.input) > cfg.max_batch:
            return _error(
                413, "batch_too_large",
                f"batch of {len(req.input)} exceeds max_batch {cfg.max_batch}",
            )
        try:
            vectors = model.encode(req.input)
        except Exception as exc:  # inference failures become structured 500s
            log.exception("%s: inference failed", req.model)
            return _error(500, "inference_error", f"{type(exc).__name__}: {exc}")
        if not np.isfinite(vectors).all():
            return _error(500, "inference_error", "model produced non-finite values")
        return {
            "object": "list",
            "model": req.model,
            "data": [
                {"index": i, "embedding": vectors[i].tolist()}
                for i in range(len(req.input))
            ],
        }

    @app.get("/health")
    def health():
        models = []
        status = "ok"
        for name in sorted(registry):
            model = registry[name]
            expected = published_dim(name)
            entry = {"name": name, "dim": model.dim, "backend": model.backend}
            if model.max_tokens:
                entry["max_tokens"] = model.max_tokens
            if expected is not None:
                entry["published_dim"] = expected
                if expected != model.dim:
                    entry["dim_mismatch"] = True
                    status = "unhealthy"
            models.append(entry)
        return {"status": status, "models": models}

    return app
