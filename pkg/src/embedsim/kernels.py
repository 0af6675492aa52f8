"""Hot numeric kernels with numba-compiled and pure-numpy implementations.

Three kernel families live here:

* ``xxh64`` -- the 64-bit checksum used by the embedding file format.
* ``mock_rows`` -- deterministic pseudo-random unit vectors for the mock
  embedding provider.
* ``sweep_curves`` -- incremental all-k Jaccard / rank-overlap curves over a
  pair of full rankings.

Every kernel has two implementations that produce bit-identical results:
a ``@njit`` version and a numpy/python fallback. The fallback is selected
when numba is unavailable or when the environment variable
``EMBEDSIM_NO_NUMBA`` is set to a non-empty value other than ``0``.
``benchmarks/bench_kernels.py`` compares the two paths.

Mock vector derivation (kept in sync with any external reimplementation,
e.g. an embedding sidecar's ``mock`` model):

1. ``h = xxh64(utf8(text), seed=0)``
2. ``s0 = mix64((h + seed * 0x9E3779B97F4A7C15) mod 2**64)`` where ``mix64``
   is the splitmix64 finalizer and the seed is taken mod 2**64; scrambling
   here keeps different seeds' component streams unaligned
3. component ``i`` (0-based): ``z = mix64(s0 + (i + 1) * 0x9E3779B97F4A7C15)``;
   ``u = (z >> 11) * 2**-53``; ``c_i = 2*u - 1`` in float64
4. ``norm = sqrt(sum(c_i^2))`` accumulated left to right in float64; if
   ``norm < 1e-12`` the vector is replaced by ``e_0``; else each component
   is divided by ``norm``.
"""

from __future__ import annotations

import os
import struct

import numpy as np

_env = os.environ.get("EMBEDSIM_NO_NUMBA", "")
_NUMBA_DISABLED = _env not in ("", "0")

if not _NUMBA_DISABLED:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a declared dependency
        _NUMBA_DISABLED = True

NUMBA_ENABLED = not _NUMBA_DISABLED


def numba_enabled() -> bool:
    """True when the compiled kernel path is active."""
    return NUMBA_ENABLED


# ---------------------------------------------------------------------------
# xxh64
# ---------------------------------------------------------------------------

_MASK = 0xFFFFFFFFFFFFFFFF
_P1 = 0x9E3779B185EBCA87
_P2 = 0xC2B2AE3D27D4EB4F
_P3 = 0x165667B19E3779F9
_P4 = 0x85EBCA77C2B2AE63
_P5 = 0x27D4EB2F165667C5

_U_P1 = np.uint64(_P1)
_U_P2 = np.uint64(_P2)
_U_P3 = np.uint64(_P3)
_U_P4 = np.uint64(_P4)
_U_P5 = np.uint64(_P5)
_U0 = np.uint64(0)
_U1 = np.uint64(1)


def _rotl(x: int, r: int) -> int:
    return ((x << r) | (x >> (64 - r))) & _MASK


def _xxh64_round(acc: int, lane: int) -> int:
    acc = (acc + lane * _P2) & _MASK
    return (_rotl(acc, 31) * _P1) & _MASK


def _xxh64_py(data: bytes, seed: int) -> int:
    """Pure-python XXH64, reference implementation."""
    n = len(data)
    pos = 0
    if n >= 32:
        a1 = (seed + _P1 + _P2) & _MASK
        a2 = (seed + _P2) & _MASK
        a3 = seed & _MASK
        a4 = (seed - _P1) & _MASK
        u64 = struct.Struct("<Q").unpack_from
        while pos + 32 <= n:
            a1 = _xxh64_round(a1, u64(data, pos)[0])
            a2 = _xxh64_round(a2, u64(data, pos + 8)[0])
            a3 = _xxh64_round(a3, u64(data, pos + 16)[0])
            a4 = _xxh64_round(a4, u64(data, pos + 24)[0])
            pos += 32
        acc = (_rotl(a1, 1) + _rotl(a2, 7) + _rotl(a3, 12) + _rotl(a4, 18)) & _MASK
        for a in (a1, a2, a3, a4):
            acc = ((acc ^ _xxh64_round(0, a)) * _P1 + _P4) & _MASK
    else:
        acc = (seed + _P5) & _MASK
    acc = (acc + n) & _MASK
    while pos + 8 <= n:
        lane = struct.unpack_from("<Q", data, pos)[0]
        acc = (_rotl(acc ^ _xxh64_round(0, lane), 27) * _P1 + _P4) & _MASK
        pos += 8
    if pos + 4 <= n:
        lane = struct.unpack_from("<I", data, pos)[0]
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


if NUMBA_ENABLED:

    @njit(cache=True)
    def _nb_rotl(x, r):
        return (x << r) | (x >> (np.uint64(64) - r))

    @njit(cache=True)
    def _nb_round(acc, lane):
        acc = acc + lane * _U_P2
        return _nb_rotl(acc, np.uint64(31)) * _U_P1

    @njit(cache=True)
    def _nb_u64_at(buf, i):
        v = _U0
        for b in range(8):
            v |= np.uint64(buf[i + b]) << np.uint64(8 * b)
        return v

    @njit(cache=True)
    def _xxh64_nb(buf, seed):
        n = buf.shape[0]
        nu = np.uint64(n)
        pos = 0
        if n >= 32:
            a1 = seed + _U_P1 + _U_P2
            a2 = seed + _U_P2
            a3 = seed
            a4 = seed - _U_P1
            while pos + 32 <= n:
                a1 = _nb_round(a1, _nb_u64_at(buf, pos))
                a2 = _nb_round(a2, _nb_u64_at(buf, pos + 8))
                a3 = _nb_round(a3, _nb_u64_at(buf, pos + 16))
                a4 = _nb_round(a4, _nb_u64_at(buf, pos + 24))
                pos += 32
            acc = (
                _nb_rotl(a1, _U1)
                + _nb_rotl(a2, np.uint64(7))
                + _nb_rotl(a3, np.uint64(12))
                + _nb_rotl(a4, np.uint64(18))
            )
            acc = (acc ^ _nb_round(_U0, a1)) * _U_P1 + _U_P4
            acc = (acc ^ _nb_round(_U0, a2)) * _U_P1 + _U_P4
            acc = (acc ^ _nb_round(_U0, a3)) * _U_P1 + _U_P4
            acc = (acc ^ _nb_round(_U0, a4)) * _U_P1 + _U_P4
        else:
            acc = seed + _U_P5
        acc = acc + nu
        while pos + 8 <= n:
            acc = _nb_rotl(acc ^ _nb_round(_U0, _nb_u64_at(buf, pos)), np.uint64(27)) * _U_P1 + _U_P4
            pos += 8
        if pos + 4 <= n:
            lane = _U0
            for b in range(4):
                lane |= np.uint64(buf[pos + b]) << np.uint64(8 * b)
            acc = _nb_rotl(acc ^ (lane * _U_P1), np.uint64(23)) * _U_P2 + _U_P3
            pos += 4
        while pos < n:
            acc = _nb_rotl(acc ^ (np.uint64(buf[pos]) * _U_P5), np.uint64(11)) * _U_P1
            pos += 1
        acc ^= acc >> np.uint64(33)
        acc *= _U_P2
        acc ^= acc >> np.uint64(29)
        acc *= _U_P3
        acc ^= acc >> np.uint64(32)
        return acc


def xxh64(data: bytes | bytearray | memoryview | np.ndarray, seed: int = 0) -> int:
    """XXH64 of ``data`` with the given seed, as a non-negative int."""
    seed &= _MASK
    if NUMBA_ENABLED:
        if isinstance(data, np.ndarray):
            buf = np.ascontiguousarray(data.view(np.uint8).reshape(-1))
        else:
            buf = np.frombuffer(bytes(data), dtype=np.uint8)
        return int(_xxh64_nb(buf, np.uint64(seed)))
    if isinstance(data, np.ndarray):
        data = data.tobytes()
    return _xxh64_py(bytes(data), seed)


# ---------------------------------------------------------------------------
# Mock embedding rows
# ---------------------------------------------------------------------------

_GOLDEN = 0x9E3779B97F4A7C15
_U_GOLDEN = np.uint64(_GOLDEN)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_TWO_NEG53 = 2.0 ** -53


def _mix64_np(z: np.ndarray) -> np.ndarray:
    z = z.copy()
    z ^= z >> np.uint64(30)
    z *= _MIX1
    z ^= z >> np.uint64(27)
    z *= _MIX2
    z ^= z >> np.uint64(31)
    return z


def _mock_rows_np(hashes: np.ndarray, seed: int, dim: int) -> np.ndarray:
    """Vectorized fallback; bit-identical to the compiled row loop."""
    h = hashes.astype(np.uint64, copy=False)
    s0 = _mix64_np(h + np.uint64((seed * _GOLDEN) & _MASK))
    steps = (np.arange(1, dim + 1, dtype=np.uint64)) * _U_GOLDEN
    z = _mix64_np(s0[:, None] + steps[None, :])
    c = (z >> np.uint64(11)).astype(np.float64) * _TWO_NEG53
    c = 2.0 * c - 1.0
    norms = np.cumsum(c * c, axis=1)[:, -1]
    norms = np.sqrt(norms)
    degenerate = norms < 1e-12
    if degenerate.any():
        c[degenerate] = 0.0
        c[degenerate, 0] = 1.0
        norms[degenerate] = 1.0
    return c / norms[:, None]


if NUMBA_ENABLED:

    @njit(cache=True)
    def _nb_mix64(z):
        z ^= z >> np.uint64(30)
        z *= _MIX1
        z ^= z >> np.uint64(27)
        z *= _MIX2
        z ^= z >> np.uint64(31)
        return z

    @njit(cache=True)
    def _mock_rows_nb(hashes, seed, dim):
        n = hashes.shape[0]
        out = np.empty((n, dim), dtype=np.float64)
        for r in range(n):
            s0 = _nb_mix64(hashes[r] + seed * _U_GOLDEN)
            for i in range(dim):
                z = _nb_mix64(s0 + np.uint64(i + 1) * _U_GOLDEN)
                u = np.float64(z >> np.uint64(11)) * _TWO_NEG53
                out[r, i] = 2.0 * u - 1.0
            acc = 0.0
            for i in range(dim):
                acc += out[r, i] * out[r, i]
            nrm = np.sqrt(acc)
            if nrm < 1e-12:
                for i in range(dim):
                    out[r, i] = 0.0
                out[r, 0] = 1.0
            else:
                for i in range(dim):
                    out[r, i] /= nrm
        return out


def mock_rows(hashes: np.ndarray, seed: int, dim: int) -> np.ndarray:
    """Unit-norm float64 vectors, one per 64-bit text hash.

    Deterministic for fixed (hashes, seed, dim); identical bits on both
    kernel paths and across platforms.
    """
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    hashes = np.ascontiguousarray(hashes, dtype=np.uint64)
    if NUMBA_ENABLED:
        return _mock_rows_nb(hashes, np.uint64(seed & _MASK), dim)
    return _mock_rows_np(hashes, seed, dim)


# ---------------------------------------------------------------------------
# All-k sweep over a pair of full rankings
# ---------------------------------------------------------------------------
#
# Inputs are 1-based rank positions per item id: pos_a[j] = rank of item j in
# ranking A. An item enters the prefix intersection at k = max(pos_a, pos_b).
# Per-item overlap terms 2 / ((1 + |ra-rb|) * (ra + rb)) are accumulated in
# ascending (max, min) rank order; items tied on (max, min) have equal terms,
# so the running sum is order-independent there. Keeping one canonical order
# makes the incremental curves bit-identical to per-k brute force.


def _sweep_np(pos_a: np.ndarray, pos_b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = pos_a.shape[0]
    hi = np.maximum(pos_a, pos_b)
    lo = np.minimum(pos_a, pos_b)
    term = 2.0 / ((1.0 + (hi - lo).astype(np.float64)) * (hi + lo).astype(np.float64))
    order = np.lexsort((lo, hi))
    csum = np.cumsum(term[order])
    harm = np.cumsum(1.0 / np.arange(1, n + 1, dtype=np.float64))
    ks = np.arange(1, n + 1, dtype=np.int64)
    m = np.searchsorted(hi[order], ks, side="right")
    jac = m.astype(np.float64) / (2 * ks - m).astype(np.float64)
    rnk = np.zeros(n, dtype=np.float64)
    nz = m > 0
    rnk[nz] = csum[m[nz] - 1] / harm[m[nz] - 1]
    return jac, rnk


if NUMBA_ENABLED:

    @njit(cache=True)
    def _sweep_nb(pos_a, pos_b, inv_a, inv_b):
        n = pos_a.shape[0]
        harm = np.empty(n, dtype=np.float64)
        h = 0.0
        for j in range(1, n + 1):
            h += 1.0 / np.float64(j)
            harm[j - 1] = h
        jac = np.empty(n, dtype=np.float64)
        rnk = np.empty(n, dtype=np.float64)
        s = 0.0
        m = 0
        for k in range(1, n + 1):
            ja = inv_a[k - 1]
            jb = inv_b[k - 1]
            if ja == jb:
                # same item reaches rank k in both lists: term = 1/k
                s += 2.0 / (1.0 * np.float64(2 * k))
                m += 1
            else:
                ra = pos_b[ja]  # other-list rank of A's newcomer
                rb = pos_a[jb]  # other-list rank of B's newcomer
                ea = ra <= k
                eb = rb <= k
                if ea and eb:
                    ta = 2.0 / ((1.0 + np.float64(k - ra)) * np.float64(k + ra))
                    tb = 2.0 / ((1.0 + np.float64(k - rb)) * np.float64(k + rb))
                    if rb <= ra:
                        s += tb
                        s += ta
                    else:
                        s += ta
                        s += tb
                    m += 2
                elif ea:
                    s += 2.0 / ((1.0 + np.float64(k - ra)) * np.float64(k + ra))
                    m += 1
                elif eb:
                    s += 2.0 / ((1.0 + np.float64(k - rb)) * np.float64(k + rb))
                    m += 1
            jac[k - 1] = np.float64(m) / np.float64(2 * k - m)
            rnk[k - 1] = 0.0 if m == 0 else s / harm[m - 1]
        return jac, rnk


def sweep_curves(pos_a: np.ndarray, pos_b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Jaccard and rank-overlap scores of the k-prefixes for every k = 1..n.

    ``pos_a`` / ``pos_b`` hold 1-based ranks per item id and must each be a
    permutation of 1..n.
    """
    pos_a = np.ascontiguousarray(pos_a, dtype=np.int64)
    pos_b = np.ascontiguousarray(pos_b, dtype=np.int64)
    if pos_a.shape != pos_b.shape or pos_a.ndim != 1:
        raise ValueError("rank arrays must be 1-D and of equal length")
    if NUMBA_ENABLED:
        n = pos_a.shape[0]
        inv_a = np.empty(n, dtype=np.int64)
        inv_b = np.empty(n, dtype=np.int64)
        inv_a[pos_a - 1] = np.arange(n, dtype=np.int64)
        inv_b[pos_b - 1] = np.arange(n, dtype=np.int64)
        return _sweep_nb(pos_a, pos_b, inv_a, inv_b)
    return _sweep_np(pos_a, pos_b)
