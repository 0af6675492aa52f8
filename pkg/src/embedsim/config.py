"""Declarative run configuration: datasets, models, measure parameters.

One TOML file drives the whole pipeline; every emitted report echoes the
relevant parameters so numbers stay traceable to their chunking/model
context. Relative paths are resolved against the config file's directory.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .embed_client import ProviderConfig
from .errors import ParseError, ValidationError


@dataclass
class DatasetConfig:
    dataset_id: str
    corpus_path: Path
    queries_path: Path


@dataclass
class RunConfig:
    datasets: list[DatasetConfig] = field(default_factory=list)
    models: list[ProviderConfig] = field(default_factory=list)
    chunk_size: int = 256
    tokenizer_id: str = "whitespace"
    store_root: Path = Path("store")
    k: int = 10
    num_queries: int = 25
    selection: str = "first"
    seed: int = 0

    def model_ids(self) -> list[str]:
        return [m.provider_id for m in self.models]

    def dataset_ids(self) -> list[str]:
        return [d.dataset_id for d in self.datasets]

    def dataset(self, dataset_id: str) -> DatasetConfig:
        for d in self.datasets:
            if d.dataset_id == dataset_id:
                return d
        raise ValidationError(f"dataset {dataset_id!r} not in config")

    def model(self, model_id: str) -> ProviderConfig:
        for m in self.models:
            if m.provider_id == model_id:
                return m
        raise ValidationError(f"model {model_id!r} not in config")


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError:
        raise ParseError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(f"{path}: invalid TOML: {exc}") from None

    base = path.resolve().parent
    run = raw.get("run", {})

    def respath(p: str) -> Path:
        p = Path(p)
        return p if p.is_absolute() else base / p

    cfg = RunConfig(
        chunk_size=int(run.get("chunk_size", 256)),
        tokenizer_id=run.get("tokenizer", "whitespace"),
        store_root=respath(run.get("store", "store")),
        k=int(run.get("k", 10)),
        num_queries=int(run.get("num_queries", 25)),
        selection=run.get("query_selection", "first"),
        seed=int(run.get("seed", 0)),
    )

    for d in raw.get("datasets", []):
        try:
            cfg.datasets.append(
                DatasetConfig(
                    dataset_id=d["id"],
                    corpus_path=respath(d["corpus"]),
                    queries_path=respath(d["queries"]),
                )
            )
        except KeyError as exc:
            raise ParseError(f"{path}: dataset entry missing key {exc}") from None

    for m in raw.get("models", []):
        try:
            cfg.models.append(
                ProviderConfig(
                    provider_id=m["id"],
                    endpoint_url=m["endpoint"],
                    model_name=m.get("model_name", m["id"]),
                    api_key_env=m.get("api_key_env", ""),
                    batch_size=int(m.get("batch_size", 32)),
                    max_retries=int(m.get("max_retries", 5)),
                    timeout=float(m.get("timeout", 60.0)),
                    max_concurrency=int(m.get("max_concurrency", 1)),
                    expected_dim=int(m["dim"]) if "dim" in m else None,
                    max_tokens=int(m["max_tokens"]) if "max_tokens" in m else None,
                )
            )
        except KeyError as exc:
            raise ParseError(f"{path}: model entry missing key {exc}") from None

    ids = cfg.dataset_ids()
    if len(set(ids)) != len(ids):
        raise ValidationError(f"{path}: duplicate dataset ids")
    ids = cfg.model_ids()
    if len(set(ids)) != len(ids):
        raise ValidationError(f"{path}: duplicate model ids")
    return cfg


def replication_config_path() -> Path:
    """The shipped full-scale config: five BEIR datasets and a registry of
    nineteen popular embedding models with their published dimensions."""
    return Path(resources.files("embedsim").joinpath("data/replication.toml"))
