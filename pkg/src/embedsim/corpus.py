"""BEIR-format corpus parsing and fixed-size token chunking.

Documents are split into consecutive non-overlapping windows of
``chunk_size`` tokens over ``title + " " + text``; the final partial window
is kept when it has at least one token. Chunk identity is the
(doc_id, chunk_index) pair, which is what aligns embeddings produced by
different models over the same dataset.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, NamedTuple

from .errors import ParseError, ValidationError


class ChunkKey(NamedTuple):
    """Identity of one chunk; orders by (doc_id, chunk_index)."""

    doc_id: str
    chunk_index: int


@dataclass(frozen=True)
class Document:
    doc_id: str
    title: str
    text: str


@dataclass(frozen=True)
class Chunk:
    key: ChunkKey
    text: str
    token_count: int


@dataclass(frozen=True)
class ChunkingConfig:
    chunk_size: int = 256
    tokenizer_id: str = "whitespace"


@dataclass
class ChunkedCorpus:
    dataset_id: str
    chunks: list[Chunk]
    config: ChunkingConfig

    def keys(self) -> list[ChunkKey]:
        return [c.key for c in self.chunks]

    def texts(self) -> list[str]:
        return [c.text for c in self.chunks]


@dataclass
class QuerySet:
    dataset_id: str
    queries: list[tuple[str, str]] = field(default_factory=list)  # (query_id, text)

    def ids(self) -> list[str]:
        return [q[0] for q in self.queries]

    def texts(self) -> list[str]:
        return [q[1] for q in self.queries]


# ---------------------------------------------------------------------------
# Tokenizers
# ---------------------------------------------------------------------------

_TOKENIZERS: dict[str, Callable[[str], list[str]]] = {
    "whitespace": str.split,
}


def register_tokenizer(tokenizer_id: str, fn: Callable[[str], list[str]]) -> None:
    """Register a tokenizer under a stable id; ids are recorded in stores."""
    _TOKENIZERS[tokenizer_id] = fn


def tokenize(text: str, tokenizer_id: str = "whitespace") -> list[str]:
    try:
        fn = _TOKENIZERS[tokenizer_id]
    except KeyError:
        raise ValidationError(
            f"unknown tokenizer {tokenizer_id!r}; registered: {sorted(_TOKENIZERS)}"
        ) from None
    return fn(text)


# ---------------------------------------------------------------------------
# BEIR JSONL parsing
# ---------------------------------------------------------------------------


def _parse_jsonl(path: str | Path, *, want_title: bool):
    out = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}: line {lineno}: invalid JSON: {exc}") from None
            if not isinstance(obj, dict):
                raise ParseError(f"{path}: line {lineno}: expected a JSON object")
            doc_id = obj.get("_id")
            if not isinstance(doc_id, str) or not doc_id:
                raise ParseError(f"{path}: line {lineno}: missing or empty '_id'")
            if doc_id in seen:
                raise ParseError(f"{path}: line {lineno}: duplicate _id {doc_id!r}")
            seen.add(doc_id)
            text = obj.get("text")
            if not isinstance(text, str):
                raise ParseError(f"{path}: line {lineno}: missing 'text' field")
            if want_title:
                title = obj.get("title", "")
                if not isinstance(title, str):
                    raise ParseError(f"{path}: line {lineno}: 'title' must be a string")
                out.append(Document(doc_id=doc_id, title=title, text=text))
            else:
                out.append((doc_id, text))
    return out


def parse_corpus(path: str | Path) -> list[Document]:
    """Parse a BEIR ``corpus.jsonl`` into documents, in file order."""
    return _parse_jsonl(path, want_title=True)


def parse_queries(path: str | Path, dataset_id: str | None = None) -> QuerySet:
    """Parse a BEIR ``queries.jsonl``; dataset id defaults to the parent dir name."""
    if dataset_id is None:
        dataset_id = Path(path).resolve().parent.name
    return QuerySet(dataset_id=dataset_id, queries=_parse_jsonl(path, want_title=False))


# ---------------------------------------------------------------------------
# Chunking
# ---------------------------------------------------------------------------


def chunk_document(
    doc: Document, chunk_size: int = 256, tokenizer_id: str = "whitespace"
) -> list[Chunk]:
    """Split one document into fixed-size token chunks.

    A document with zero tokens yields an empty list, not an error.
    """
    if chunk_size < 1:
        raise ValidationError(f"chunk_size must be >= 1, got {chunk_size}")
    tokens = tokenize(doc.title + " " + doc.text, tokenizer_id)
    chunks = []
    for idx, start in enumerate(range(0, len(tokens), chunk_size)):
        window = tokens[start : start + chunk_size]
        chunks.append(
            Chunk(
                key=ChunkKey(doc.doc_id, idx),
                text=" ".join(window),
                token_count=len(window),
            )
        )
    return chunks


def chunk_corpus(
    docs: list[Document],
    dataset_id: str,
    chunk_size: int = 256,
    tokenizer_id: str = "whitespace",
) -> ChunkedCorpus:
    """Chunk every document, preserving corpus file order."""
    chunks: list[Chunk] = []
    for doc in docs:
        chunks.extend(chunk_document(doc, chunk_size, tokenizer_id))
    return ChunkedCorpus(
        dataset_id=dataset_id,
        chunks=chunks,
        config=ChunkingConfig(chunk_size=chunk_size, tokenizer_id=tokenizer_id),
    )


# ---------------------------------------------------------------------------
# Chunk persistence (one JSON header line, then one line per chunk)
# ---------------------------------------------------------------------------


def save_chunked_corpus(corpus: ChunkedCorpus, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        header = {
            "dataset_id": corpus.dataset_id,
            "chunk_size": corpus.config.chunk_size,
            "tokenizer_id": corpus.config.tokenizer_id,
            "n_chunks": len(corpus.chunks),
        }
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for c in corpus.chunks:
            rec = {
                "doc_id": c.key.doc_id,
                "chunk_index": c.key.chunk_index,
                "token_count": c.token_count,
                "text": c.text,
            }
            fh.write(json.dumps(rec, sort_keys=True, ensure_ascii=False) + "\n")


def load_chunked_corpus(path: str | Path) -> ChunkedCorpus:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            header = json.loads(fh.readline())
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: bad chunk-file header: {exc}") from None
        chunks = []
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                chunks.append(
                    Chunk(
                        key=ChunkKey(rec["doc_id"], rec["chunk_index"]),
                        text=rec["text"],
                        token_count=rec["token_count"],
                    )
                )
            except (json.JSONDecodeError, KeyError) as exc:
                raise ParseError(f"{path}: line {lineno}: bad chunk record: {exc}") from None
    if len(chunks) != header.get("n_chunks"):
        raise ParseError(
            f"{path}: header says {header.get('n_chunks')} chunks, file has {len(chunks)}"
        )
    return ChunkedCorpus(
        dataset_id=header["dataset_id"],
        chunks=chunks,
        config=ChunkingConfig(
            chunk_size=header["chunk_size"], tokenizer_id=header["tokenizer_id"]
        ),
    )
