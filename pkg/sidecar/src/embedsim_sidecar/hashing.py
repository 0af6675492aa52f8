"""Deterministic mock embeddings, independent of the client package.

Implements the published derivation so wire-level consumers can verify the
protocol without model weights:

1. ``h = xxh64(utf8(text), seed=0)``
2. ``s0 = mix64((h + seed * GOLDEN) mod 2**64)`` with the splitmix64
   finalizer as ``mix64`` and ``GOLDEN = 0x9E3779B97F4A7C15``
3. component i: ``z = mix64(s0 + (i+1) * GOLDEN)``; ``u = (z >> 11) * 2**-53``;
   ``c_i = 2u - 1`` (float64)
4. normalize by ``sqrt(sum(c_i^2))`` accumulated left to right; a vector
   with norm below 1e-12 becomes e_0

Every step is integer-exact or IEEE-754-deterministic, so any conforming
implementation produces identical bits.
"""

from __future__ import annotations

import struct

import numpy as np

_MASK = 0xFFFFFFFFFFFFFFFF
_P1 = 0x9E3779B185EBCA87
_P2 = 0xC2B2AE3D27D4EB4F
_P3 = 0x165667B19E3779F9
_P4 = 0x85EBCA77C2B2AE63
_P5 = 0x27D4EB2F165667C5

GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def _rotl(x: int, r: int) -> int:
    return ((x << r) | (x >> (64 - r))) & _MASK


def _round(acc: int, lane: int) -> int:
    return (_rotl((acc + lane * _P2) & _MASK, 31) * _P1) & _MASK


def xxh64(data: bytes, seed: int = 0) -> int:
    """XXH64 (canonical algorithm), pure python."""
    seed &= _MASK
    n = len(data)
    pos = 0
    if n >= 32:
        a1 = (seed + _P1 + _P2) & _MASK
        a2 = (seed + _P2) & _MASK
        a3 = seed
        a4 = (seed - _P1) & _MASK
        while pos + 32 <= n:
            lanes = struct.unpack_from("<QQQQ", data, pos)
            a1 = _round(a1, lanes[0])
            a2 = _round(a2, lanes[1])
            a3 = _round(a3, lanes[2])
            a4 = _round(a4, lanes[3])
            pos += 32
        acc = (_rotl(a1, 1) + _rotl(a2, 7) + _rotl(a3, 12) + _rotl(a4, 18)) & _MASK
        for a in (a1, a2, a3, a4):
            acc = ((acc ^ _round(0, a)) * _P1 + _P4) & _MASK
    else:
        acc = (seed + _P5) & _MASK
    acc = (acc + n) & _MASK
    while pos + 8 <= n:
        (lane,) = struct.unpack_from("<Q", data, pos)
        acc = (_rotl(acc ^ _round(0, lane), 27) * _P1 + _P4) & _MASK
        pos += 8
    if pos + 4 <= n:
        (lane,) = struct.unpack_from("<I", data, pos)
        acc = (_rotl(acc ^ (lane * _P1) & _MASK, 23) * _P2 + _P3) & _MASK
        pos += 4
    while pos < n:
        acc = (_rotl(acc ^ (data[pos] * _P5) & _MASK, 11) * _P1) & _MASK
        pos += 1
    acc ^= acc >> 33
    acc = (acc * _P2) & _MASK
    acc ^= acc >> 29
    acc = (acc * _P3) & _MASK
    acc ^= acc >> 32
    return acc


def _mix64(z: np.ndarray) -> np.ndarray:
    z = z.copy()
    z ^= z >> np.uint64(30)
    z *= _MIX1
    z ^= z >> np.uint64(27)
    z *= _MIX2
    z ^= z >> np.uint64(31)
    return z


def mock_vectors(texts: list[str], dim: int, seed: int = 0) -> np.ndarray:
    """(len(texts), dim) float64 unit vectors per the published derivation."""
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    hashes = np.array([xxh64(t.encode("utf-8")) for t in texts], dtype=np.uint64)
    s0 = _mix64(hashes + np.uint64((seed * GOLDEN) & _MASK))
    steps = np.arange(1, dim + 1, dtype=np.uint64) * np.uint64(GOLDEN)
    z = _mix64(s0[:, None] + steps[None, :])
    c = (z >> np.uint64(11)).astype(np.float64) * 2.0 ** -53
    c = 2.0 * c - 1.0
    norms = np.sqrt(np.cumsum(c * c, axis=1)[:, -1])
    degenerate = norms < 1e-12
    if degenerate.any():
        c[degenerate] = 0.0
        c[degenerate, 0] = 1.0
        norms[degenerate] = 1.0
    return c / norms[:, None]
