"""Clients for JSON embeddings APIs, plus the deterministic mock provider.

The wire protocol is the common hosted-API shape:

    POST endpoint_url
    {"model": "<name>", "input": ["text", ...]}
    -> {"data": [{"index": 0, "embedding": [..]}, ...]}

Responses are re-sorted by ``index`` so row order never depends on the
provider. Batch requests retry on transport errors, 429 and 5xx with
exponential backoff (base 1 s, doubling, jittered). Corpus embedding is
resumable: completed batches are checkpointed and never re-requested.
"""

from __future__ import annotations

import logging
import os
import random
import time
import urllib.parse
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
import requests

from . import esf1
from .corpus import ChunkedCorpus, ChunkingConfig, QuerySet
from .errors import ProviderError, ValidationError
from .kernels import mock_rows, xxh64
from .matrix import KIND_CHUNKS, KIND_QUERIES, EmbeddingMatrix

log = logging.getLogger(__name__)

Transport = Callable[["ProviderConfig", list[str]], dict]


@dataclass
class ProviderConfig:
    provider_id: str
    endpoint_url: str
    model_name: str
    api_key_env: str = ""
    batch_size: int = 32
    max_retries: int = 5
    timeout: float = 60.0
    max_concurrency: int = 1
    expected_dim: int | None = None
    max_tokens: int | None = None

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValidationError("batch_size must be >= 1")
        if self.max_concurrency < 1:
            raise ValidationError("max_concurrency must be >= 1")
        if self.max_retries < 0:
            raise ValidationError("max_retries must be >= 0")


class _RetryableFailure(Exception):
    """Transport failure / 429 / 5xx; eligible for backoff and retry."""


# ---------------------------------------------------------------------------
# Mock provider
# ---------------------------------------------------------------------------


def mock_embed(text: str, dim: int, seed: int = 0) -> np.ndarray:
    """Unit-norm float64 vector derived only from (text, dim, seed).

    See ``kernels`` for the exact derivation; identical inputs produce
    identical bits on every platform.
    """
    h = np.array([xxh64(text.encode("utf-8"))], dtype=np.uint64)
    return mock_rows(h, seed, dim)[0]


def mock_transport(dim: int, seed: int = 0) -> Transport:
    """In-process transport implementing the wire contract over mock_embed."""

    def call(cfg: ProviderConfig, texts: list[str]) -> dict:
        hashes = np.array(
            [xxh64(t.encode("utf-8")) for t in texts], dtype=np.uint64
        )
        vecs = mock_rows(hashes, seed, dim)
        return {
            "data": [
                {"index": i, "embedding": vecs[i].tolist()} for i in range(len(texts))
            ]
        }

    return call


def _parse_mock_url(url: str) -> Transport:
    # mock://?dim=64&seed=3
    parsed = urllib.parse.urlparse(url)
    params = urllib.parse.parse_qs(parsed.query)
    try:
        dim = int(params["dim"][0])
    except (KeyError, ValueError):
        raise ValidationError(f"mock endpoint {url!r} needs a dim query parameter") from None
    seed = int(params.get("seed", ["0"])[0])
    return mock_transport(dim, seed)


# ---------------------------------------------------------------------------
# HTTP transport
# ---------------------------------------------------------------------------


def http_transport(session: requests.Session | None = None) -> Transport:
    sess = session or requests.Session()

    def call(cfg: ProviderConfig, texts: list[str]) -> dict:
        headers = {"Content-Type": "application/json"}
        if cfg.api_key_env:
            key = os.environ.get(cfg.api_key_env)
            if not key:
                raise ProviderError(
                    f"environment variable {cfg.api_key_env} is not set"
                )
            headers["Authorization"] = f"Bearer {key}"
        try:
            resp = sess.post(
                cfg.endpoint_url,
                json={"model": cfg.model_name, "input": texts},
                headers=headers,
                timeout=cfg.timeout,
            )
        except requests.RequestException as exc:
            raise _RetryableFailure(f"transport error: {exc}") from None
        if resp.status_code == 429 or resp.status_code >= 500:
            raise _RetryableFailure(f"HTTP {resp.status_code}: {resp.text[:200]}")
        if resp.status_code != 200:
            raise ProviderError(f"HTTP {resp.status_code}: {resp.text[:500]}")
        try:
            return resp.json()
        except ValueError as exc:
            raise ProviderError(f"non-JSON response: {exc}") from None

    return call


def make_transport(cfg: ProviderConfig) -> Transport:
    if cfg.endpoint_url.startswith("mock://"):
        return _parse_mock_url(cfg.endpoint_url)
    return http_transport()


# ---------------------------------------------------------------------------
# Batch embedding
# ---------------------------------------------------------------------------


def _extract_vectors(payload: dict, n_inputs: int) -> np.ndarray:
    try:
        items = payload["data"]
    except (TypeError, KeyError):
        raise ProviderError("response missing 'data' field") from None
    if len(items) != n_inputs:
        raise ProviderError(
            f"vector count mismatch: sent {n_inputs} inputs, got {len(items)} vectors"
        )
    by_index = {}
    for item in items:
        try:
            by_index[int(item["index"])] = item["embedding"]
        except (TypeError, KeyError, ValueError):
            raise ProviderError("malformed response item (need index, embedding)") from None
    if sorted(by_index) != list(range(n_inputs)):
        raise ProviderError(f"response indices {sorted(by_index)} are not 0..{n_inputs - 1}")
    try:
        out = np.array([by_index[i] for i in range(n_inputs)], dtype=np.float64)
    except ValueError:
        raise ProviderError("inconsistent embedding dimensions in response") from None
    if out.ndim != 2:
        raise ProviderError("embeddings are not flat numeric vectors")
    if not np.isfinite(out).all():
        raise ProviderError("response contains non-finite embedding values")
    return out


def embed_batch(
    texts: list[str],
    cfg: ProviderConfig,
    transport: Transport | None = None,
    sleeper: Callable[[float], None] = time.sleep,
    rng: random.Random | None = None,
) -> np.ndarray:
    """Embed up to cfg.batch_size texts; returns (len(texts), dim) float64."""
    if not 1 <= len(texts) <= cfg.batch_size:
        raise ValidationError(
            f"batch of {len(texts)} texts outside 1..{cfg.batch_size}"
        )
    transport = transport or make_transport(cfg)
    rng = rng or random.Random()
    attempt = 0
    while True:
        try:
            payload = transport(cfg, texts)
        except _RetryableFailure as exc:
            if attempt >= cfg.max_retries:
                raise ProviderError(
                    f"{cfg.provider_id}: giving up after {attempt} retries: {exc}"
                ) from None
            delay = (2.0 ** attempt) * (1.0 + rng.uniform(0.0, 0.25))
            log.warning(
                "%s: batch failed (%s); retry %d/%d in %.1fs",
                cfg.provider_id, exc, attempt + 1, cfg.max_retries, delay,
            )
            sleeper(delay)
            attempt += 1
            continue
        vectors = _extract_vectors(payload, len(texts))
        if cfg.expected_dim is not None and vectors.shape[1] != cfg.expected_dim:
            raise ProviderError(
                f"{cfg.provider_id}: expected dim {cfg.expected_dim}, got {vectors.shape[1]}"
            )
        return vectors


# ---------------------------------------------------------------------------
# Corpus / query embedding with per-batch checkpoints
# ---------------------------------------------------------------------------


def _batch_slices(n: int, size: int) -> list[tuple[int, int]]:
    return [(i, min(i + size, n)) for i in range(0, n, size)]


def _checkpoint_path(ckpt_dir: Path, idx: int) -> Path:
    return ckpt_dir / f"batch_{idx:06d}.npy"


def _load_checkpoint(ckpt_dir: Path, idx: int, expect_rows: int) -> np.ndarray | None:
    path = _checkpoint_path(ckpt_dir, idx)
    if not path.exists():
        return None
    try:
        arr = np.load(path)
    except Exception:
        log.warning("discarding unreadable checkpoint %s", path)
        path.unlink(missing_ok=True)
        return None
    if arr.ndim != 2 or arr.shape[0] != expect_rows:
        log.warning("discarding stale checkpoint %s (shape %s)", path, arr.shape)
        path.unlink(missing_ok=True)
        return None
    return arr


def _save_checkpoint(ckpt_dir: Path, idx: int, arr: np.ndarray) -> None:
    ckpt_dir.mkdir(parents=True, exist_ok=True)
    path = _checkpoint_path(ckpt_dir, idx)
    tmp = path.with_name(path.name + ".tmp")
    np.save(tmp, arr)
    # np.save appends .npy to paths without the suffix
    tmp_real = tmp if tmp.suffix == ".npy" else tmp.with_name(tmp.name + ".npy")
    tmp_real.replace(path)


def _embed_texts(
    texts: list[str],
    keys: list,
    kind: str,
    dataset_id: str,
    cfg: ProviderConfig,
    chunking: ChunkingConfig,
    transport: Transport | None,
    checkpoint_dir: str | Path | None,
    sleeper: Callable[[float], None],
) -> EmbeddingMatrix:
    if not texts:
        raise ValidationError(f"nothing to embed for {dataset_id}/{cfg.provider_id}/{kind}")
    transport = transport or make_transport(cfg)
    slices = _batch_slices(len(texts), cfg.batch_size)
    results: dict[int, np.ndarray] = {}
    ckpt = Path(checkpoint_dir) if checkpoint_dir else None

    pending = []
    for idx, (lo, hi) in enumerate(slices):
        cached = _load_checkpoint(ckpt, idx, hi - lo) if ckpt else None
        if cached is not None:
            results[idx] = cached
        else:
            pending.append(idx)
    if results:
        log.info(
            "%s/%s/%s: resuming, %d/%d batches already embedded",
            dataset_id, cfg.provider_id, kind, len(results), len(slices),
        )

    def run_batch(idx: int) -> np.ndarray:
        lo, hi = slices[idx]
        vecs = embed_batch(texts[lo:hi], cfg, transport=transport, sleeper=sleeper)
        if ckpt:
            _save_checkpoint(ckpt, idx, vecs)
        return vecs

    if pending:
        with ThreadPoolExecutor(max_workers=cfg.max_concurrency) as pool:
            futures = {idx: pool.submit(run_batch, idx) for idx in pending}
            first_error = None
            for idx in pending:
                try:
                    results[idx] = futures[idx].result()
                except Exception as exc:
                    if first_error is None:
                        first_error = exc
            if first_error is not None:
                raise first_error

    dims = {results[i].shape[1] for i in range(len(slices))}
    if len(dims) != 1:
        raise ProviderError(f"inconsistent dims across batches: {sorted(dims)}")
    rows = np.vstack([results[i] for i in range(len(slices))]).astype(np.float32)
    return EmbeddingMatrix(
        model_id=cfg.provider_id,
        dataset_id=dataset_id,
        kind=kind,
        rows=rows,
        keys=list(keys),
        config=chunking,
    ).validate()


def embed_corpus(
    corpus: ChunkedCorpus,
    cfg: ProviderConfig,
    transport: Transport | None = None,
    checkpoint_dir: str | Path | None = None,
    sleeper: Callable[[float], None] = time.sleep,
) -> EmbeddingMatrix:
    """Embed every chunk, rows in corpus order regardless of completion order."""
    if not corpus.chunks:
        raise ValidationError(f"corpus {corpus.dataset_id!r} has no chunks")
    if cfg.max_tokens is not None and corpus.config.chunk_size > cfg.max_tokens:
        raise ValidationError(
            f"chunk_size {corpus.config.chunk_size} exceeds {cfg.provider_id} "
            f"max_tokens {cfg.max_tokens}"
        )
    return _embed_texts(
        corpus.texts(), corpus.keys(), KIND_CHUNKS, corpus.dataset_id,
        cfg, corpus.config, transport, checkpoint_dir, sleeper,
    )


def embed_queries(
    queries: QuerySet,
    cfg: ProviderConfig,
    chunking: ChunkingConfig,
    transport: Transport | None = None,
    checkpoint_dir: str | Path | None = None,
    sleeper: Callable[[float], None] = time.sleep,
) -> EmbeddingMatrix:
    if not queries.queries:
        raise ValidationError(f"query set {queries.dataset_id!r} is empty")
    return _embed_texts(
        queries.texts(), queries.ids(), KIND_QUERIES, queries.dataset_id,
        cfg, chunking, transport, checkpoint_dir, sleeper,
    )


def clear_checkpoint(checkpoint_dir: str | Path) -> None:
    ckpt = Path(checkpoint_dir)
    if not ckpt.is_dir():
        return
    for f in ckpt.glob("batch_*.npy"):
        f.unlink()
    try:
        ckpt.rmdir()
    except OSError:
        pass


# ---------------------------------------------------------------------------
# ESF1 exchange
# ---------------------------------------------------------------------------


def export_embeddings(m: EmbeddingMatrix, path: str | Path) -> None:
    esf1.write_file(m, path)


def import_embeddings(path: str | Path) -> EmbeddingMatrix:
    return esf1.read_file(path)
