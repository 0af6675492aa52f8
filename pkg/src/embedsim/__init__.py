"""embedsim: quantify how similarly text-embedding models behave.

Two complementary views over BEIR-format corpora: linear-kernel CKA over
row-aligned embedding matrices, and Jaccard / rank overlap of each model's
top-k cosine retrieval results. Ships a store, an embeddings-API client
with a deterministic mock provider, k-sweep curves, UPGMA clustering and
CSV/SVG/JSON reporting, all behind one CLI.
"""

__version__ = "0.1.0"

from .analysis import (
    Dendrogram,
    PairwiseMatrix,
    hierarchical_cluster,
    mean_matrices,
    pairwise_matrix,
)
from .corpus import (
    Chunk,
    ChunkedCorpus,
    ChunkingConfig,
    ChunkKey,
    Document,
    QuerySet,
    chunk_corpus,
    chunk_document,
    parse_corpus,
    parse_queries,
    register_tokenizer,
    tokenize,
)
from .embed_client import (
    ProviderConfig,
    embed_batch,
    embed_corpus,
    embed_queries,
    export_embeddings,
    import_embeddings,
    mock_embed,
    mock_transport,
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
from .matrix import EmbeddingMatrix
from .retrieval import (
    KSweepCurve,
    RetrievalResult,
    full_ranking,
    prepare_matrix,
    sweep_k,
    top_k,
)
from .simmath import (
    center_columns,
    cka_gram_oracle,
    harmonic_number,
    jaccard,
    linear_cka,
    rank_pair,
    rank_sim,
)
from .store import AlignedPair, EmbeddingStore, align

__all__ = [
    "AlignedPair",
    "Chunk",
    "ChunkedCorpus",
    "ChunkingConfig",
    "ChunkKey",
    "Dendrogram",
    "Document",
    "EmbedSimError",
    "EmbeddingMatrix",
    "EmbeddingStore",
    "FormatError",
    "KSweepCurve",
    "NotFoundError",
    "PairwiseMatrix",
    "ParseError",
    "ProviderConfig",
    "ProviderError",
    "QuerySet",
    "RetrievalResult",
    "StoreError",
    "ValidationError",
    "align",
    "center_columns",
    "chunk_corpus",
    "chunk_document",
    "cka_gram_oracle",
    "embed_batch",
    "embed_corpus",
    "embed_queries",
    "export_embeddings",
    "full_ranking",
    "harmonic_number",
    "hierarchical_cluster",
    "import_embeddings",
    "jaccard",
    "linear_cka",
    "mean_matrices",
    "mock_embed",
    "mock_transport",
    "pairwise_matrix",
    "parse_corpus",
    "parse_queries",
    "prepare_matrix",
    "rank_pair",
    "rank_sim",
    "register_tokenizer",
    "sweep_k",
    "top_k",
    "tokenize",
]
