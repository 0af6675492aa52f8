"""Model backends: the deterministic mock and sentence-transformers."""

from __future__ import annotations

import logging
import threading

import numpy as np

from .hashing import mock_vectors

log = logging.getLogger("embedsim_sidecar")

# Published embedding dimensions for well-known open models; /health flags
# a loaded model whose output dimension disagrees with this table.
PUBLISHED_DIMS = {
    "SFR-Embedding-Mistral": 4096,
    "mxbai-embed-large-v1": 1024,
    "UAE-Large-V1": 1024,
    "bge-large-en-v1.5": 1024,
    "bge-base-en-v1.5": 768,
    "bge-small-en-v1.5": 384,
    "gte-large": 1024,
    "gte-base": 768,
    "gte-small": 384,
    "e5-large-v2": 1024,
    "e5-base-v2": 768,
    "e5-small-v2": 384,
    "gtr-t5-large": 768,
    "gtr-t5-base": 768,
    "sentence-t5-large": 768,
    "sentence-t5-base": 768,
}


def published_dim(name: str) -> int | None:
    """Expected dimension for a model name, tolerating org prefixes."""
    if name in PUBLISHED_DIMS:
        return PUBLISHED_DIMS[name]
    tail = name.rsplit("/", 1)[-1]
    return PUBLISHED_DIMS.get(tail)


class MockModel:
    """Serves the published hash-based derivation; no weights, no limits."""

    backend = "mock"

    def __init__(self, name: str, dim: int, seed: int = 0):
        self.name = name
        self.dim = dim
        self.seed = seed
        self.max_tokens = None

    def encode(self, texts: list[str]) -> np.ndarray:
        return mock_vectors(texts, self.dim, self.seed)


class SentenceTransformerModel:
    """Local sentence-transformers model with its published defaults.

    The model's own tokenizer enforces the sequence limit; truncation is
    logged per request. Inference is serialized per model.
    """

    backend = "sentence-transformers"

    def __init__(self, name: str, ref: str, device: str | None = None):
        from sentence_transformers import SentenceTransformer  # lazy, heavy

        self.name = name
        self.ref = ref
        self._model = SentenceTransformer(ref, device=device)
        self.dim = int(self._model.get_sentence_embedding_dimension())
        self.max_tokens = int(getattr(self._model, "max_seq_length", 0)) or None
        self._lock = threading.Lock()

    def _count_truncated(self, texts: list[str]) -> int:
        if not self.max_tokens:
            return 0
        tok = self._model.tokenizer
        truncated = 0
        for t in texts:
            if len(tok(t, truncation=False)["input_ids"]) > self.max_tokens:
                truncated += 1
        return truncated

    def encode(self, texts: list[str]) -> np.ndarray:
        truncated = self._count_truncated(texts)
        if truncated:
            log.info(
                "%s: truncating %d/%d inputs to %d tokens",
                self.name, truncated, len(texts), self.max_tokens,
            )
        with self._lock:
            out = self._model.encode(
                texts, convert_to_numpy=True, show_progress_bar=False
            )
        return np.asarray(out, dtype=np.float64)
