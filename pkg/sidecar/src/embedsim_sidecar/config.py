"""Sidecar configuration: listen address, batch cap, model registry."""

from __future__ import annotations

import sys
from pathlib import Path

from pydantic import BaseModel, Field, field_validator

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class ModelEntry(BaseModel):
    name: str
    backend: str = "sentence-transformers"  # or "mock"
    ref: str = ""          # hub id or local path for real backends
    dim: int | None = None  # required for mock; verified for real models
    seed: int = 0          # mock only
    device: str | None = None

    @field_validator("backend")
    @classmethod
    def _known_backend(cls, v):
        if v not in ("mock", "sentence-transformers"):
            raise ValueError(f"unknown backend {v!r}")
        return v


class SidecarConfig(BaseModel):
    host: str = "127.0.0.1"
    port: int = 8876
    max_batch: int = Field(default=256, ge=1)
    models: list[ModelEntry] = Field(default_factory=list)

    @field_validator("models")
    @classmethod
    def _unique_names(cls, v):
        names = [m.name for m in v]
        if len(set(names)) != len(names):
            raise ValueError("model names must be unique")
        return v


def load_config(path: str | Path) -> SidecarConfig:
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    server = raw.get("server", {})
    return SidecarConfig(
        host=server.get("host", "127.0.0.1"),
        port=int(server.get("port", 8876)),
        max_batch=int(server.get("max_batch", 256)),
        models=[ModelEntry(**m) for m in raw.get("models", [])],
    )


def default_config() -> SidecarConfig:
    """A mock-only registry, useful for protocol tests and smoke runs."""
    return SidecarConfig(
        models=[ModelEntry(name="mock", backend="mock", dim=64, seed=0)]
    )
