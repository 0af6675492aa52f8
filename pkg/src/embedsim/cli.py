"""Command-line pipeline: ingest, embed, compare, sweep, import/export.

Exit codes: 0 success, 1 usage error, 2 data/validation error, 3
provider/transport error. Logs go to stderr; data goes to files.
"""

from __future__ import annotations

import argparse
import logging
import random
import sys
from pathlib import Path

from . import __version__, embed_client, esf1, reports
from .analysis import hierarchical_cluster, mean_matrices, pairwise_matrix
from .config import RunConfig, load_config
from .corpus import (
    QuerySet,
    chunk_corpus,
    load_chunked_corpus,
    parse_corpus,
    parse_queries,
    save_chunked_corpus,
)
from .errors import (
    EmbedSimError,
    FormatError,
    NotFoundError,
    ParseError,
    ProviderError,
    StoreError,
    ValidationError,
)
from .matrix import KIND_CHUNKS, KIND_QUERIES
from .retrieval import full_ranking, prepare_matrix, sweep_k
from .store import EmbeddingStore, align

log = logging.getLogger("embedsim")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_PROVIDER = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    p = _Parser(prog="embedsim", description=__doc__)
    p.add_argument("--version", action="version", version=f"embedsim {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def add_common(sp, config=True):
        if config:
            sp.add_argument("--config", required=True, help="TOML run configuration")
        sp.add_argument("--store", help="override the store root directory")
        sp.add_argument("--threads", type=int, default=1)
        sp.add_argument("--seed", type=int, help="override the configured seed")
        sp.add_argument("-v", "--verbose", action="store_true", help="info-level logs")

    sp = sub.add_parser("ingest", help="parse and chunk datasets into the store")
    add_common(sp)
    sp.add_argument("--dataset", help="one dataset id (default: all configured)")

    sp = sub.add_parser("embed", help="embed chunks and queries for one model")
    add_common(sp)
    sp.add_argument("--dataset", required=True)
    sp.add_argument("--model", required=True)

    sp = sub.add_parser("export", help="copy stored embeddings to an ESF1 file")
    add_common(sp, config=False)
    sp.add_argument("dataset")
    sp.add_argument("model")
    sp.add_argument("kind", choices=[KIND_CHUNKS, KIND_QUERIES])
    sp.add_argument("out")

    sp = sub.add_parser("import", help="load an ESF1 file into the store")
    add_common(sp, config=False)
    sp.add_argument("file")
    sp.add_argument("--overwrite", action="store_true")

    sp = sub.add_parser("compare", help="pairwise similarity matrix + reports")
    add_common(sp)
    sp.add_argument("measure", choices=["cka", "jaccard", "rank"])
    group = sp.add_mutually_exclusive_group(required=True)
    group.add_argument("--dataset")
    group.add_argument("--mean", action="store_true", help="average all datasets")
    sp.add_argument("--k", type=int)
    sp.add_argument("--queries", type=int, help="queries to average over")
    sp.add_argument("--selection", choices=["first", "random"])
    sp.add_argument("--no-cluster", action="store_true")
    sp.add_argument("--out-dir", default="out")

    sp = sub.add_parser("sweep", help="all-k retrieval similarity for a model pair")
    add_common(sp)
    sp.add_argument("--dataset", required=True)
    sp.add_argument("model_a")
    sp.add_argument("model_b")
    sp.add_argument("--queries", type=int)
    sp.add_argument("--selection", choices=["first", "random"])
    sp.add_argument("--out-dir", default="out")

    sp = sub.add_parser("mock-demo", help="synthetic end-to-end run, no network")
    add_common(sp, config=False)
    sp.add_argument("--out-dir", required=True)
    sp.add_argument("--chunks", type=int, default=200)
    sp.add_argument("--models", type=int, default=3)
    sp.add_argument("--dim", type=int, default=32)
    sp.add_argument("--chunk-size", type=int, default=32)
    sp.add_argument("--k", type=int, default=10)
    sp.add_argument("--queries", type=int, default=25)
    return p


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def _store_for(args, cfg: RunConfig | None) -> EmbeddingStore:
    if args.store:
        return EmbeddingStore(args.store)
    if cfg is not None:
        return EmbeddingStore(cfg.store_root)
    raise ValidationError("--store is required without a config file")


def _load(args) -> RunConfig:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    return cfg


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_ingest(args) -> int:
    cfg = _load(args)
    store = _store_for(args, cfg)
    dataset_ids = [args.dataset] if args.dataset else cfg.dataset_ids()
    for dataset_id in dataset_ids:
        ds = cfg.dataset(dataset_id)
        docs = parse_corpus(ds.corpus_path)
        corpus = chunk_corpus(docs, dataset_id, cfg.chunk_size, cfg.tokenizer_id)
        save_chunked_corpus(corpus, store.chunks_path(dataset_id))
        log.info(
            "%s: %d documents -> %d chunks (size %d, tokenizer %s)",
            dataset_id, len(docs), len(corpus.chunks), cfg.chunk_size, cfg.tokenizer_id,
        )
    return EXIT_OK


def cmd_embed(args) -> int:
    cfg = _load(args)
    store = _store_for(args, cfg)
    provider = cfg.model(args.model)
    dataset = cfg.dataset(args.dataset)

    chunks_file = store.chunks_path(args.dataset)
    if not chunks_file.exists():
        raise ValidationError(
            f"{args.dataset} is not ingested yet (missing {chunks_file}); run ingest"
        )
    corpus = load_chunked_corpus(chunks_file)

    if store.exists(args.dataset, args.model, KIND_CHUNKS):
        log.info("%s/%s chunks already embedded, skipping", args.dataset, args.model)
    else:
        ckpt = store.checkpoint_dir(args.dataset, args.model, KIND_CHUNKS)
        matrix = embed_client.embed_corpus(corpus, provider, checkpoint_dir=ckpt)
        store.put(matrix)
        embed_client.clear_checkpoint(ckpt)
        log.info("%s/%s: stored %d chunk embeddings (dim %d)",
                 args.dataset, args.model, matrix.n, matrix.dim)

    if store.exists(args.dataset, args.model, KIND_QUERIES):
        log.info("%s/%s queries already embedded, skipping", args.dataset, args.model)
    else:
        queries = parse_queries(dataset.queries_path, dataset_id=args.dataset)
        ckpt = store.checkpoint_dir(args.dataset, args.model, KIND_QUERIES)
        matrix = embed_client.embed_queries(
            queries, provider, corpus.config, checkpoint_dir=ckpt
        )
        store.put(matrix)
        embed_client.clear_checkpoint(ckpt)
        log.info("%s/%s: stored %d query embeddings", args.dataset, args.model, matrix.n)
    return EXIT_OK


def cmd_export(args) -> int:
    store = _store_for(args, None)
    matrix = store.get(args.dataset, args.model, args.kind)
    embed_client.export_embeddings(matrix, args.out)
    log.info("exported %s/%s.%s to %s", args.dataset, args.model, args.kind, args.out)
    return EXIT_OK


def cmd_import(args) -> int:
    store = _store_for(args, None)
    matrix = embed_client.import_embeddings(args.file)
    address = store.put(matrix, overwrite=args.overwrite)
    log.info("imported %s (%d x %d) into %s", address, matrix.n, matrix.dim, store.root)
    return EXIT_OK


def _emit_reports(matrix, out_dir: Path, stem: str, cluster: bool) -> None:
    reports.emit_csv(matrix, out_dir / f"{stem}.csv")
    dend = None
    if cluster:
        dend = hierarchical_cluster(matrix)
        reports.emit_dendrogram_json(dend, out_dir / f"{stem}.dendrogram.json")
    reports.emit_heatmap_svg(matrix, dend, out_dir / f"{stem}.svg")
    log.info("wrote %s.{csv,svg%s}", out_dir / stem, ",dendrogram.json" if cluster else "")


def cmd_compare(args) -> int:
    cfg = _load(args)
    store = _store_for(args, cfg)
    k = args.k if args.k is not None else cfg.k
    num_queries = args.queries if args.queries is not None else cfg.num_queries
    selection = args.selection or cfg.selection
    models = cfg.model_ids()
    out_dir = Path(args.out_dir)

    def one(dataset_id: str):
        return pairwise_matrix(
            args.measure, models, dataset_id, store,
            k=k, num_queries=num_queries, selection=selection,
            seed=cfg.seed, threads=args.threads,
        )

    suffix = "" if args.measure == "cka" else f"_k{k}"
    if args.mean:
        per_dataset = [one(d) for d in cfg.dataset_ids()]
        matrix = mean_matrices(per_dataset)
        stem = f"{args.measure}_mean{suffix}"
    else:
        matrix = one(args.dataset)
        stem = f"{args.measure}_{args.dataset}{suffix}"
    _emit_reports(matrix, out_dir, stem, not args.no_cluster)
    return EXIT_OK


def _pair_sweep(
    store: EmbeddingStore,
    dataset_id: str,
    model_a: str,
    model_b: str,
    num_queries: int,
    selection: str,
    seed: int,
):
    """Full-ranking k-sweep curves for one model pair over shared chunks."""
    from .analysis import select_query_ids
    from .matrix import EmbeddingMatrix

    chunks_a = store.get(dataset_id, model_a, KIND_CHUNKS)
    chunks_b = store.get(dataset_id, model_b, KIND_CHUNKS)
    queries_a = store.get(dataset_id, model_a, KIND_QUERIES)
    queries_b = store.get(dataset_id, model_b, KIND_QUERIES)

    qids = select_query_ids(
        [queries_a.keys, queries_b.keys], num_queries, selection, seed
    )
    pair = align(chunks_a, chunks_b)
    sub_a = EmbeddingMatrix(
        model_id=chunks_a.model_id, dataset_id=dataset_id, kind=KIND_CHUNKS,
        rows=pair.model_a_rows, keys=pair.shared_keys, config=chunks_a.config,
    )
    sub_b = EmbeddingMatrix(
        model_id=chunks_b.model_id, dataset_id=dataset_id, kind=KIND_CHUNKS,
        rows=pair.model_b_rows, keys=pair.shared_keys, config=chunks_b.config,
    )
    aux_a, aux_b = prepare_matrix(sub_a), prepare_matrix(sub_b)
    qi_a, qi_b = queries_a.key_index(), queries_b.key_index()
    curves = []
    for qid in qids:
        ra = full_ranking(queries_a.rows[qi_a[qid]], sub_a, query_id=qid, aux=aux_a)
        rb = full_ranking(queries_b.rows[qi_b[qid]], sub_b, query_id=qid, aux=aux_b)
        curves.append(sweep_k(ra, rb))
    return curves


def cmd_sweep(args) -> int:
    cfg = _load(args)
    store = _store_for(args, cfg)
    num_queries = args.queries if args.queries is not None else cfg.num_queries
    selection = args.selection or cfg.selection
    curves = _pair_sweep(
        store, args.dataset, args.model_a, args.model_b,
        num_queries, selection, cfg.seed,
    )
    out = Path(args.out_dir) / (
        f"sweep_{args.dataset}_{args.model_a}_vs_{args.model_b}.csv"
    )
    reports.emit_sweep_csv(curves, out)
    log.info("wrote %s (%d queries)", out, len(curves))
    return EXIT_OK


# ---------------------------------------------------------------------------
# Synthetic end-to-end demo
# ---------------------------------------------------------------------------


def _synthesize_corpus(n_chunks: int, chunk_size: int, seed: int):
    """Deterministic documents yielding exactly n_chunks chunks."""
    rng = random.Random(seed)
    lines = []
    produced = 0
    doc = 0
    while produced < n_chunks:
        remaining = n_chunks - produced
        take = min(remaining, rng.randint(1, 3))
        tokens = take * chunk_size
        if take == remaining and take > 0:
            tokens = (take - 1) * chunk_size + rng.randint(1, chunk_size)
        words = " ".join(f"w{doc:05d}t{i:04d}r{rng.randint(0, 99):02d}"
                         for i in range(tokens))
        lines.append({"_id": f"doc{doc:05d}", "title": "", "text": words})
        produced += take
        doc += 1
    return lines


def cmd_mock_demo(args) -> int:
    out_dir = Path(args.out_dir)
    seed = args.seed if args.seed is not None else 0
    store = EmbeddingStore(out_dir / "store")
    reports_dir = out_dir / "reports"
    dataset_id = "mockset"

    from .corpus import Document

    docs = [
        Document(rec["_id"], rec["title"], rec["text"])
        for rec in _synthesize_corpus(args.chunks, args.chunk_size, seed)
    ]
    corpus = chunk_corpus(docs, dataset_id, args.chunk_size, "whitespace")
    save_chunked_corpus(corpus, store.chunks_path(dataset_id))

    rng = random.Random(seed + 1)
    queries = QuerySet(
        dataset_id=dataset_id,
        queries=[
            (f"q{i:03d}", " ".join(f"w{rng.randint(0, max(1, len(docs) - 1)):05d}"
                                   f"t{rng.randint(0, 3):04d}r{rng.randint(0, 99):02d}"
                                   for _ in range(5)))
            for i in range(args.queries)
        ],
    )

    model_ids = []
    for i in range(args.models):
        provider = embed_client.ProviderConfig(
            provider_id=f"mock-{i:02d}",
            endpoint_url=f"mock://?dim={args.dim}&seed={seed + i}",
            model_name=f"mock-{i:02d}",
            batch_size=128,
        )
        if not store.exists(dataset_id, provider.provider_id, KIND_CHUNKS):
            store.put(embed_client.embed_corpus(corpus, provider))
        if not store.exists(dataset_id, provider.provider_id, KIND_QUERIES):
            store.put(embed_client.embed_queries(queries, provider, corpus.config))
        model_ids.append(provider.provider_id)
    log.info("mock-demo: embedded %d chunks for %d models", args.chunks, args.models)

    num_queries = min(args.queries, 25)
    for measure in ("cka", "jaccard", "rank"):
        matrix = pairwise_matrix(
            measure, model_ids, dataset_id, store,
            k=args.k, num_queries=num_queries, threads=args.threads,
        )
        suffix = "" if measure == "cka" else f"_k{args.k}"
        _emit_reports(matrix, reports_dir, f"{measure}_{dataset_id}{suffix}", True)

    model_a, model_b = model_ids[0], model_ids[-1]
    curves = _pair_sweep(
        store, dataset_id, model_a, model_b, min(3, num_queries), "first", seed
    )
    reports.emit_sweep_csv(
        curves, reports_dir / f"sweep_{dataset_id}_{model_a}_vs_{model_b}.csv"
    )

    esf1.write_file(
        store.get(dataset_id, model_ids[0], KIND_CHUNKS),
        reports_dir / f"{model_ids[0]}.chunks.esf1",
    )
    log.info("mock-demo: reports under %s", reports_dir)
    return EXIT_OK


# ---------------------------------------------------------------------------


_COMMANDS = {
    "ingest": cmd_ingest,
    "embed": cmd_embed,
    "export": cmd_export,
    "import": cmd_import,
    "compare": cmd_compare,
    "sweep": cmd_sweep,
    "mock-demo": cmd_mock_demo,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return _COMMANDS[args.command](args)
    except ProviderError as exc:
        log.error("%s", exc)
        return EXIT_PROVIDER
    except (ParseError, ValidationError, FormatError, StoreError, NotFoundError) as exc:
        log.error("%s", exc)
        return EXIT_DATA
    except EmbedSimError as exc:  # pragma: no cover - safety net
        log.error("%s", exc)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
