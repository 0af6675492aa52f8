"""Aligned embedding matrices: one model's vectors over one dataset."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import ChunkKey, ChunkingConfig
from .errors import ValidationError

KIND_CHUNKS = "chunks"
KIND_QUERIES = "queries"
_KINDS = (KIND_CHUNKS, KIND_QUERIES)


@dataclass
class EmbeddingMatrix:
    """n x dim float32 rows plus the keys that identify each row.

    Keys are ChunkKeys for kind="chunks" and query-id strings for
    kind="queries"; row order matches the source corpus/query-file order.
    """

    model_id: str
    dataset_id: str
    kind: str
    rows: np.ndarray
    keys: list
    config: ChunkingConfig

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def dim(self) -> int:
        return self.rows.shape[1]

    def validate(self) -> "EmbeddingMatrix":
        if self.kind not in _KINDS:
            raise ValidationError(f"kind must be one of {_KINDS}, got {self.kind!r}")
        if self.rows.ndim != 2:
            raise ValidationError(f"rows must be 2-D, got shape {self.rows.shape}")
        if self.rows.dtype != np.float32:
            raise ValidationError(f"rows must be float32, got {self.rows.dtype}")
        if self.rows.shape[1] < 1:
            raise ValidationError("dim must be >= 1")
        if len(self.keys) != self.rows.shape[0]:
            raise ValidationError(
                f"{len(self.keys)} keys for {self.rows.shape[0]} rows"
            )
        if len(set(self.keys)) != len(self.keys):
            raise ValidationError("keys must be unique")
        if not np.isfinite(self.rows).all():
            raise ValidationError("rows contain NaN or Inf")
        return self

    def key_index(self) -> dict:
        return {k: i for i, k in enumerate(self.keys)}


def keys_to_json(kind: str, keys: list) -> list:
    if kind == KIND_CHUNKS:
        return [[k.doc_id, k.chunk_index] for k in keys]
    return list(keys)


def keys_from_json(kind: str, raw: list) -> list:
    if kind == KIND_CHUNKS:
        return [ChunkKey(str(d), int(i)) for d, i in raw]
    return [str(q) for q in raw]
