"""Exact cosine retrieval over an embedding matrix, and all-k sweep curves.

Search is an exact scan: cosine scores from 64-bit dot products over the
32-bit rows, top-k selected without a full sort, ties broken by ascending
key so results are identical across models, runs and thread counts.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .kernels import sweep_curves
from .matrix import EmbeddingMatrix

_SCAN_BLOCK = 8192


@dataclass
class RetrievalResult:
    query_id: str
    model_id: str
    hits: list  # [(key, cosine score)], rank of hits[i] is i + 1
    k: int

    def keys(self) -> list:
        return [key for key, _ in self.hits]


@dataclass
class KSweepCurve:
    model_pair: tuple[str, str]
    query_id: str
    ks: np.ndarray
    jaccard: np.ndarray
    rank_sim: np.ndarray

    def points(self) -> list[tuple[int, float, float]]:
        return [
            (int(k), float(j), float(r))
            for k, j, r in zip(self.ks, self.jaccard, self.rank_sim)
        ]


@dataclass
class MatrixAux:
    """Precomputed per-matrix state reused across queries."""

    norms: np.ndarray      # float64 row norms
    key_rank: np.ndarray   # position of each row's key in sorted key order
    valid: np.ndarray      # rows with nonzero norm


def prepare_matrix(m: EmbeddingMatrix) -> MatrixAux:
    # per-row multiply + pairwise sum: the reduction tree depends only on
    # row length, so byte-identical rows always get byte-identical norms
    # (BLAS kernels do not guarantee that across row positions)
    sq = np.zeros(m.n, dtype=np.float64)
    for lo in range(0, m.n, _SCAN_BLOCK):
        blk = m.rows[lo : lo + _SCAN_BLOCK].astype(np.float64)
        sq[lo : lo + blk.shape[0]] = (blk * blk).sum(axis=1)
    norms = np.sqrt(sq)
    valid = norms > 0.0
    if not valid.all():
        warnings.warn(
            f"{m.model_id}/{m.dataset_id}: excluding {int((~valid).sum())} "
            "zero-norm rows from retrieval",
            stacklevel=2,
        )
    order = sorted(range(m.n), key=lambda i: m.keys[i])
    key_rank = np.empty(m.n, dtype=np.int64)
    key_rank[order] = np.arange(m.n, dtype=np.int64)
    return MatrixAux(norms=norms, key_rank=key_rank, valid=valid)


def _cosine_scores(q: np.ndarray, m: EmbeddingMatrix, aux: MatrixAux) -> np.ndarray:
    q = np.asarray(q, dtype=np.float64).reshape(-1)
    if q.shape[0] != m.dim:
        raise ValidationError(f"query dim {q.shape[0]} != matrix dim {m.dim}")
    qn = float(np.sqrt(q @ q))
    if qn == 0.0:
        raise ValidationError("zero-norm query vector")
    dots = np.empty(m.n, dtype=np.float64)
    for lo in range(0, m.n, _SCAN_BLOCK):
        blk = m.rows[lo : lo + _SCAN_BLOCK].astype(np.float64)
        # multiply + per-row pairwise sum, for positionally consistent ties
        dots[lo : lo + blk.shape[0]] = (blk * q).sum(axis=1)
    scores = np.full(m.n, -np.inf)
    np.divide(dots, aux.norms * qn, out=scores, where=aux.valid)
    return scores


def top_k(
    query_vec: np.ndarray,
    m: EmbeddingMatrix,
    k: int,
    query_id: str = "",
    aux: MatrixAux | None = None,
) -> RetrievalResult:
    """The k highest-cosine rows, ties broken by ascending key."""
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    if m.n == 0:
        raise ValidationError("cannot search an empty matrix")
    aux = aux or prepare_matrix(m)
    scores = _cosine_scores(query_vec, m, aux)
    n_valid = int(aux.valid.sum())
    k_eff = min(k, n_valid)
    if k_eff == 0:
        return RetrievalResult(query_id=query_id, model_id=m.model_id, hits=[], k=k)

    if k_eff == n_valid:
        chosen = np.flatnonzero(aux.valid)
    else:
        # exact selection: everything above the k-th score, then ties on it
        # in key order
        part = np.argpartition(scores, m.n - k_eff)[m.n - k_eff :]
        threshold = scores[part].min()
        strict = np.flatnonzero(scores > threshold)
        tied = np.flatnonzero(scores == threshold)
        need = k_eff - strict.shape[0]
        tied = tied[np.argsort(aux.key_rank[tied], kind="stable")][:need]
        chosen = np.concatenate([strict, tied])

    order = np.lexsort((aux.key_rank[chosen], -scores[chosen]))
    chosen = chosen[order]
    hits = [(m.keys[i], float(scores[i])) for i in chosen]
    return RetrievalResult(query_id=query_id, model_id=m.model_id, hits=hits, k=k)


def full_ranking(
    query_vec: np.ndarray,
    m: EmbeddingMatrix,
    query_id: str = "",
    aux: MatrixAux | None = None,
) -> RetrievalResult:
    """All rows ranked; the first k entries equal top_k for every k."""
    return top_k(query_vec, m, m.n, query_id=query_id, aux=aux)


def sweep_k(a: RetrievalResult, b: RetrievalResult) -> KSweepCurve:
    """Jaccard and rank similarity of the k-prefixes for every k = 1..n.

    Inputs must be full rankings of the same key universe for the same
    query. Computed incrementally, not by re-scoring each prefix.
    """
    if a.query_id != b.query_id:
        raise ValidationError(
            f"query mismatch: {a.query_id!r} vs {b.query_id!r}"
        )
    keys_a = a.keys()
    keys_b = b.keys()
    if len(keys_a) != len(keys_b) or set(keys_a) != set(keys_b):
        raise ValidationError("rankings cover different key universes")
    n = len(keys_a)
    if n == 0:
        raise ValidationError("empty rankings")
    ids = {key: i for i, key in enumerate(keys_a)}
    pos_a = np.arange(1, n + 1, dtype=np.int64)
    pos_b = np.empty(n, dtype=np.int64)
    for rank0, key in enumerate(keys_b):
        pos_b[ids[key]] = rank0 + 1
    jac, rnk = sweep_curves(pos_a, pos_b)
    return KSweepCurve(
        model_pair=(a.model_id, b.model_id),
        query_id=a.query_id,
        ks=np.arange(1, n + 1, dtype=np.int64),
        jaccard=jac,
        rank_sim=rnk,
    )
