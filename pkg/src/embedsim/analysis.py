"""Pairwise model-similarity matrices, averaging, and hierarchical clustering.

A PairwiseMatrix holds one measure's scores for every model pair over one
dataset (or the mean across datasets). CKA cells compare aligned chunk
embeddings directly; Jaccard/rank cells average per-query top-k retrieval
overlap across a fixed query subset. Clustering is agglomerative with
average linkage (UPGMA) on 1 - similarity, with deterministic tie-breaks.
"""

from __future__ import annotations

import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import retrieval, simmath
from .errors import NotFoundError, ValidationError
from .matrix import KIND_CHUNKS, KIND_QUERIES, EmbeddingMatrix
from .store import EmbeddingStore, align

MEASURES = ("cka", "jaccard", "rank")


@dataclass
class PairwiseMatrix:
    measure: str
    labels: list[str]
    values: np.ndarray
    context: dict = field(default_factory=dict)

    def validate(self) -> "PairwiseMatrix":
        m = len(self.labels)
        if self.measure not in MEASURES:
            raise ValidationError(f"unknown measure {self.measure!r}")
        if self.values.shape != (m, m):
            raise ValidationError(
                f"values shape {self.values.shape} does not match {m} labels"
            )
        if len(set(self.labels)) != m:
            raise ValidationError("duplicate labels")
        if not np.allclose(self.values, self.values.T, atol=1e-9):
            raise ValidationError("matrix is not symmetric")
        if self.values.min() < -1e-9 or self.values.max() > 1 + 1e-9:
            raise ValidationError("values outside [0, 1]")
        return self


@dataclass
class Dendrogram:
    """Agglomerative merge tree; leaves 0..m-1, merge i creates cluster m+i."""

    labels: list[str]
    merges: list[tuple[int, int, float, int]]  # (cluster_a, cluster_b, height, size)
    leaf_order: list[str]


# ---------------------------------------------------------------------------
# Pairwise matrices
# ---------------------------------------------------------------------------


def select_query_ids(
    per_model_ids: list[list[str]],
    num_queries: int,
    selection: str = "first",
    seed: int = 0,
) -> list[str]:
    """Query ids common to all models, subsetted reproducibly.

    "first" keeps file order; "random" draws a seeded sample (returned in
    file order as well, which does not affect the averaged scores).
    """
    base = per_model_ids[0]
    common = set(base)
    for ids in per_model_ids[1:]:
        common &= set(ids)
    ordered = [q for q in base if q in common]
    if len(ordered) < num_queries:
        raise ValidationError(
            f"need {num_queries} shared queries, only {len(ordered)} available"
        )
    if selection == "first":
        return ordered[:num_queries]
    if selection == "random":
        rng = random.Random(seed)
        picked = rng.sample(range(len(ordered)), num_queries)
        return [ordered[i] for i in sorted(picked)]
    raise ValidationError(f"unknown query selection {selection!r}")


def _load_all(
    store: EmbeddingStore, models: list[str], dataset_id: str, kinds: list[str]
) -> dict[tuple[str, str], EmbeddingMatrix]:
    missing = [
        f"{dataset_id}/{model}.{kind}"
        for model in models
        for kind in kinds
        if not store.exists(dataset_id, model, kind)
    ]
    if missing:
        raise NotFoundError(
            "missing stored embeddings: " + ", ".join(sorted(missing))
        )
    return {
        (model, kind): store.get(dataset_id, model, kind)
        for model in models
        for kind in kinds
    }


def _retrieval_cell(
    measure: str,
    chunks_a: EmbeddingMatrix,
    chunks_b: EmbeddingMatrix,
    queries_a: EmbeddingMatrix,
    queries_b: EmbeddingMatrix,
    query_ids: list[str],
    k: int,
) -> float:
    pair = align(chunks_a, chunks_b)
    sub_a = EmbeddingMatrix(
        model_id=chunks_a.model_id, dataset_id=chunks_a.dataset_id,
        kind=KIND_CHUNKS, rows=pair.model_a_rows, keys=pair.shared_keys,
        config=chunks_a.config,
    )
    sub_b = EmbeddingMatrix(
        model_id=chunks_b.model_id, dataset_id=chunks_b.dataset_id,
        kind=KIND_CHUNKS, rows=pair.model_b_rows, keys=pair.shared_keys,
        config=chunks_b.config,
    )
    aux_a = retrieval.prepare_matrix(sub_a)
    aux_b = retrieval.prepare_matrix(sub_b)
    qidx_a = queries_a.key_index()
    qidx_b = queries_b.key_index()
    scores = []
    for qid in query_ids:
        hits_a = retrieval.top_k(
            queries_a.rows[qidx_a[qid]], sub_a, k, query_id=qid, aux=aux_a
        )
        hits_b = retrieval.top_k(
            queries_b.rows[qidx_b[qid]], sub_b, k, query_id=qid, aux=aux_b
        )
        if measure == "jaccard":
            scores.append(simmath.jaccard(hits_a.keys(), hits_b.keys()))
        else:
            scores.append(simmath.rank_sim(hits_a.keys(), hits_b.keys()))
    return float(np.mean(scores))


def pairwise_matrix(
    measure: str,
    models: list[str],
    dataset_id: str,
    store: EmbeddingStore,
    k: int = 10,
    num_queries: int = 25,
    selection: str = "first",
    seed: int = 0,
    threads: int = 1,
) -> PairwiseMatrix:
    """Symmetric model x model similarity matrix for one dataset."""
    if measure not in MEASURES:
        raise ValidationError(f"unknown measure {measure!r}; pick from {MEASURES}")
    if len(models) < 2:
        raise ValidationError("need at least 2 models to compare")
    if len(set(models)) != len(models):
        raise ValidationError("duplicate model ids")

    kinds = [KIND_CHUNKS] if measure == "cka" else [KIND_CHUNKS, KIND_QUERIES]
    mats = _load_all(store, models, dataset_id, kinds)

    query_ids: list[str] = []
    if measure != "cka":
        query_ids = select_query_ids(
            [mats[(model, KIND_QUERIES)].keys for model in models],
            num_queries, selection, seed,
        )

    pairs = [(i, j) for i in range(len(models)) for j in range(i + 1, len(models))]

    def cell(idx: int) -> float:
        i, j = pairs[idx]
        a, b = models[i], models[j]
        if measure == "cka":
            ap = align(mats[(a, KIND_CHUNKS)], mats[(b, KIND_CHUNKS)])
            return simmath.linear_cka(ap.model_a_rows, ap.model_b_rows)
        return _retrieval_cell(
            measure,
            mats[(a, KIND_CHUNKS)], mats[(b, KIND_CHUNKS)],
            mats[(a, KIND_QUERIES)], mats[(b, KIND_QUERIES)],
            query_ids, k,
        )

    if threads > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            cells = list(pool.map(cell, range(len(pairs))))
    else:
        cells = [cell(i) for i in range(len(pairs))]

    values = np.eye(len(models), dtype=np.float64)
    for (i, j), v in zip(pairs, cells):
        values[i, j] = values[j, i] = v

    context = {"dataset_id": dataset_id}
    if measure != "cka":
        context["k"] = k
        context["num_queries"] = len(query_ids)
    return PairwiseMatrix(
        measure=measure, labels=list(models), values=values, context=context
    ).validate()


def mean_matrices(ms: list[PairwiseMatrix]) -> PairwiseMatrix:
    """Element-wise mean across datasets; labels must match exactly."""
    if not ms:
        raise ValidationError("nothing to average")
    first = ms[0]
    for m in ms[1:]:
        if m.labels != first.labels:
            raise ValidationError(
                f"label mismatch: {m.labels} vs {first.labels} (no silent reordering)"
            )
        if m.measure != first.measure:
            raise ValidationError(f"measure mismatch: {m.measure} vs {first.measure}")
    values = np.mean(np.stack([m.values for m in ms]), axis=0)
    context = {"dataset_id": "mean"}
    for key in ("k", "num_queries"):
        vals = {m.context.get(key) for m in ms}
        if len(vals) == 1 and None not in vals:
            context[key] = vals.pop()
    return PairwiseMatrix(
        measure=first.measure, labels=list(first.labels), values=values,
        context=context,
    ).validate()


# ---------------------------------------------------------------------------
# UPGMA clustering
# ---------------------------------------------------------------------------


def hierarchical_cluster(m: PairwiseMatrix) -> Dendrogram:
    """Average-linkage clustering on distance 1 - similarity.

    Ties are broken by the smallest original label index in each cluster,
    so identical inputs always give identical trees.
    """
    m.validate()
    n = len(m.labels)
    if n < 2:
        raise ValidationError("need at least 2 labels to cluster")

    dist = {}
    for i in range(n):
        for j in range(i + 1, n):
            dist[(i, j)] = 1.0 - float(m.values[i, j])

    # cluster id -> (smallest member label index, size); leaves are 0..n-1
    info: dict[int, tuple[int, int]] = {i: (i, 1) for i in range(n)}
    active = list(range(n))
    merges: list[tuple[int, int, float, int]] = []
    children: dict[int, tuple[int, int]] = {}
    next_id = n

    def d(a: int, b: int) -> float:
        return dist[(a, b) if a < b else (b, a)]

    while len(active) > 1:
        best = None
        for ai in range(len(active)):
            for bi in range(ai + 1, len(active)):
                a, b = active[ai], active[bi]
                lo, hi = sorted((info[a][0], info[b][0]))
                cand = (d(a, b), lo, hi)
                if best is None or cand < best[0]:
                    best = (cand, a, b)
        (height, _, _), a, b = best
        if info[b][0] < info[a][0]:
            a, b = b, a
        size = info[a][1] + info[b][1]
        new = next_id
        next_id += 1
        for other in active:
            if other in (a, b):
                continue
            na, nb = info[a][1], info[b][1]
            da, db = d(a, other), d(b, other)
            # exact when both sides agree; avoids drift that would break ties
            avg = da if da == db else (na * da + nb * db) / (na + nb)
            dist[(other, new) if other < new else (new, other)] = avg
        active = [c for c in active if c not in (a, b)] + [new]
        info[new] = (min(info[a][0], info[b][0]), size)
        children[new] = (a, b)
        merges.append((a, b, height, size))

    def expand(cid: int) -> list[str]:
        if cid < n:
            return [m.labels[cid]]
        a, b = children[cid]
        return expand(a) + expand(b)

    return Dendrogram(
        labels=list(m.labels), merges=merges, leaf_order=expand(next_id - 1)
    )
