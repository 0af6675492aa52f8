"""The three model-similarity measures.

* ``linear_cka`` — centered kernel alignment with a linear kernel, computed
  in feature space so the n x n Gram matrices are never materialized:
  after column-centering, CKA = ||Yc' Xc||_F^2 / (||Xc' Xc||_F ||Yc' Yc||_F).
* ``cka_gram_oracle`` — the same quantity via explicit Gram matrices and the
  HSIC trace formula; an independent implementation kept for validation.
* ``jaccard`` — overlap of two retrieved chunk sets.
* ``rank_pair`` / ``rank_sim`` — order-aware overlap of two ranked lists,
  normalized by the harmonic number of the intersection size.

All accumulation is float64. Overlap terms in ``rank_sim`` are summed in
ascending (max rank, min rank) order; ties on that pair have equal terms,
so every code path that builds the same sum (including the incremental
sweep kernels) produces bit-identical floats.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import ValidationError

DEFAULT_BLOCK_SIZE = 4096


def center_columns(x: np.ndarray) -> np.ndarray:
    """Subtract column means; returns a float64 copy, input untouched."""
    x = np.asarray(x)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValidationError(f"need an n x d matrix with n >= 2, got shape {x.shape}")
    if not np.isfinite(x).all():
        raise ValidationError("matrix contains non-finite entries")
    x = x.astype(np.float64)
    return x - x.mean(axis=0)


def _column_means(x: np.ndarray, block: int) -> np.ndarray:
    n = x.shape[0]
    total = np.zeros(x.shape[1], dtype=np.float64)
    for lo in range(0, n, block):
        total += x[lo : lo + block].astype(np.float64).sum(axis=0)
    return total / n


def _check_cka_inputs(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x)
    y = np.asarray(y)
    if x.ndim != 2 or y.ndim != 2:
        raise ValidationError("inputs must be 2-D matrices")
    if x.shape[0] != y.shape[0]:
        raise ValidationError(
            f"row-count mismatch: {x.shape[0]} vs {y.shape[0]} (align keys first)"
        )
    if x.shape[0] < 2:
        raise ValidationError("need at least 2 aligned rows")
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise ValidationError("matrix contains non-finite entries")
    return x, y


def _clamp_unit(value: float) -> float:
    if not -1e-9 <= value <= 1.0 + 1e-9:
        raise ValidationError(f"similarity {value} outside [0, 1] beyond tolerance")
    return min(max(value, 0.0), 1.0)


def linear_cka(
    x: np.ndarray,
    y: np.ndarray,
    block_size: int = DEFAULT_BLOCK_SIZE,
    threads: int = 1,
) -> float:
    """Linear-kernel CKA over row-aligned matrices, Gram-free.

    Cost is O(n * d_a * d_b) time and O(d_a * d_b) memory; row blocks are
    reduced in fixed index order, so the result does not depend on thread
    count or completion order.
    """
    x, y = _check_cka_inputs(x, y)
    n = x.shape[0]
    mu_x = _column_means(x, block_size)
    mu_y = _column_means(y, block_size)

    def partials(lo: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        xb = x[lo : lo + block_size].astype(np.float64) - mu_x
        yb = y[lo : lo + block_size].astype(np.float64) - mu_y
        return xb.T @ yb, xb.T @ xb, yb.T @ yb

    starts = list(range(0, n, block_size))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(partials, starts))
    else:
        parts = map(partials, starts)

    cxy = np.zeros((x.shape[1], y.shape[1]), dtype=np.float64)
    cxx = np.zeros((x.shape[1], x.shape[1]), dtype=np.float64)
    cyy = np.zeros((y.shape[1], y.shape[1]), dtype=np.float64)
    for pxy, pxx, pyy in parts:
        cxy += pxy
        cxx += pxx
        cyy += pyy

    num = float(np.sum(cxy * cxy))
    den = float(np.sqrt(np.sum(cxx * cxx))) * float(np.sqrt(np.sum(cyy * cyy)))
    if den == 0.0:
        raise ValidationError(
            "degenerate input: an embedding matrix is constant after centering"
        )
    return _clamp_unit(num / den)


def cka_gram_oracle(x: np.ndarray, y: np.ndarray) -> float:
    """CKA via explicit n x n Gram matrices and HSIC traces.

    Validation-only path; refuses n > 4096 to keep memory bounded.
    """
    x, y = _check_cka_inputs(x, y)
    n = x.shape[0]
    if n > 4096:
        raise ValidationError(f"gram oracle limited to n <= 4096, got {n}")
    x = x.astype(np.float64)
    y = y.astype(np.float64)
    k = x @ x.T
    l = y @ y.T
    h = np.eye(n) - np.ones((n, n)) / n

    def hsic(a: np.ndarray, b: np.ndarray) -> float:
        return float(np.trace(a @ h @ b @ h)) / (n - 1) ** 2

    den = np.sqrt(hsic(k, k) * hsic(l, l))
    if den == 0.0:
        raise ValidationError(
            "degenerate input: an embedding matrix is constant after centering"
        )
    return _clamp_unit(hsic(k, l) / den)


# ---------------------------------------------------------------------------
# Retrieval-set measures
# ---------------------------------------------------------------------------


def jaccard(c1: Iterable, c2: Iterable) -> float:
    """|intersection| / |union|; two empty retrievals count as identical (1)."""
    s1, s2 = set(c1), set(c2)
    if not s1 and not s2:
        return 1.0
    return len(s1 & s2) / len(s1 | s2)


def rank_pair(r: int, r2: int) -> float:
    """Agreement of one item's ranks in two lists: 2 / ((1 + |r-r2|)(r + r2))."""
    if r < 1 or r2 < 1:
        raise ValidationError(f"ranks are 1-based, got ({r}, {r2})")
    return 2.0 / ((1.0 + abs(r - r2)) * (r + r2))


def harmonic_number(m: int) -> float:
    """H(m) accumulated left to right, matching the sweep kernels bit-for-bit."""
    h = 0.0
    for j in range(1, m + 1):
        h += 1.0 / j
    return h


def _ranks(items: Sequence) -> dict:
    r = {item: i + 1 for i, item in enumerate(items)}
    if len(r) != len(items):
        raise ValidationError("ranked list contains duplicate items")
    return r


def rank_sim(a: Sequence, b: Sequence) -> float:
    """Rank similarity of two retrieval lists (rank 1 = first element).

    Sum of rank_pair over common items, normalized by H(|common|);
    disjoint lists score 0 by convention.
    """
    ra = _ranks(a)
    rb = _ranks(b)
    common = [item for item in a if item in rb]
    if not common:
        return 0.0
    pairs = sorted(
        (max(ra[item], rb[item]), min(ra[item], rb[item])) for item in common
    )
    total = 0.0
    for hi, lo in pairs:
        total += 2.0 / ((1.0 + (hi - lo)) * (hi + lo))
    return total / harmonic_number(len(common))
