"""ESF1: the on-disk embedding matrix format.

Layout, all little-endian:

    bytes 0-3   magic "ESF1"
    bytes 4-7   u32 header length H
    H bytes     UTF-8 JSON header: format_version, model_id, dataset_id,
                kind, dim, n, tokenizer_id, chunk_size, keys
    n*dim*4     float32 rows, row-major
    8 bytes     XXH64 checksum (seed 0) of every preceding byte

The checksum covers header and rows alike, so any single bit flip anywhere
in the file is rejected on read. Round-trips are bit-exact.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .corpus import ChunkingConfig
from .errors import FormatError
from .kernels import xxh64
from .matrix import EmbeddingMatrix, keys_from_json, keys_to_json

MAGIC = b"ESF1"
FORMAT_VERSION = 1


def encode(m: EmbeddingMatrix) -> bytes:
    m.validate()
    header = {
        "format_version": FORMAT_VERSION,
        "model_id": m.model_id,
        "dataset_id": m.dataset_id,
        "kind": m.kind,
        "dim": m.dim,
        "n": m.n,
        "tokenizer_id": m.config.tokenizer_id,
        "chunk_size": m.config.chunk_size,
        "keys": keys_to_json(m.kind, m.keys),
    }
    hbytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    body = MAGIC + struct.pack("<I", len(hbytes)) + hbytes
    body += np.ascontiguousarray(m.rows, dtype="<f4").tobytes()
    return body + struct.pack("<Q", xxh64(body))


def decode(data: bytes) -> EmbeddingMatrix:
    if len(data) < 12 or data[:4] != MAGIC:
        raise FormatError("not an ESF1 file: bad magic")
    (hlen,) = struct.unpack_from("<I", data, 4)
    if 8 + hlen + 8 > len(data):
        raise FormatError(
            f"truncated header: need {8 + hlen + 8} bytes, file has {len(data)}"
        )
    try:
        header = json.loads(data[8 : 8 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"unreadable header: {exc}") from None
    version = header.get("format_version")
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported format_version {version!r}")
    try:
        n = int(header["n"])
        dim = int(header["dim"])
        kind = header["kind"]
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"incomplete header: {exc}") from None

    payload_len = len(data) - (8 + hlen) - 8
    expected = n * dim * 4
    if payload_len != expected:
        if n > 0 and payload_len % (n * 4) == 0:
            implied = payload_len // (n * 4)
            raise FormatError(
                f"dimension mismatch: header dim={dim}, payload implies dim={implied}"
            )
        raise FormatError(
            f"truncated payload: expected {expected} row bytes, found {payload_len}"
        )

    (stored_sum,) = struct.unpack_from("<Q", data, len(data) - 8)
    actual_sum = xxh64(data[:-8])
    if stored_sum != actual_sum:
        raise FormatError(
            f"checksum mismatch: stored {stored_sum:#018x}, computed {actual_sum:#018x}"
        )

    rows = np.frombuffer(data, dtype="<f4", count=n * dim, offset=8 + hlen)
    rows = rows.reshape(n, dim).copy()
    matrix = EmbeddingMatrix(
        model_id=header["model_id"],
        dataset_id=header["dataset_id"],
        kind=kind,
        rows=rows,
        keys=keys_from_json(kind, header["keys"]),
        config=ChunkingConfig(
            chunk_size=int(header["chunk_size"]),
            tokenizer_id=header["tokenizer_id"],
        ),
    )
    try:
        return matrix.validate()
    except Exception as exc:
        raise FormatError(f"invalid matrix in file: {exc}") from None


def write_file(m: EmbeddingMatrix, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(encode(m))
    tmp.replace(path)


def read_file(path: str | Path) -> EmbeddingMatrix:
    try:
        data = Path(path).read_bytes()
    except FileNotFoundError:
        raise FormatError(f"no such file: {path}") from None
    try:
        return decode(data)
    except FormatError as exc:
        raise FormatError(f"{path}: {exc}") from None
