"""Keyword and semantic ranking over the corpus, plus retrieval evaluation."""

from .base import Ranking, fnv1a64, top_k
from .bm25 import (
    DEFAULT_B,
    DEFAULT_B_GRID,
    DEFAULT_K1,
    DEFAULT_K1_GRID,
    Bm25Index,
    bm25_rank,
    build_bm25,
    build_bm25_docs,
    grid_search_bm25,
    grid_search_bm25_table,
)
from .metrics import DEFAULT_KS, mrr_at_k, read_run_file, write_run_file
from .semantic import (
    Embedder,
    EmbeddingIndex,
    HashingEmbedder,
    build_embedding_index,
    build_embedding_index_docs,
    semantic_rank,
)
from .storage import (
    KIND_BM25,
    KIND_EMBEDDING,
    KIND_TFIDF,
    load_index,
    save_index,
)
from .tfidf import (
    DEFAULT_BUCKETS,
    TfidfIndex,
    build_tfidf,
    build_tfidf_docs,
    features,
    tfidf_rank,
)

__all__ = [
    "Ranking",
    "fnv1a64",
    "top_k",
    "Bm25Index",
    "bm25_rank",
    "build_bm25",
    "build_bm25_docs",
    "grid_search_bm25",
    "grid_search_bm25_table",
    "DEFAULT_K1",
    "DEFAULT_B",
    "DEFAULT_K1_GRID",
    "DEFAULT_B_GRID",
    "DEFAULT_KS",
    "mrr_at_k",
    "read_run_file",
    "write_run_file",
    "Embedder",
    "EmbeddingIndex",
    "HashingEmbedder",
    "build_embedding_index",
    "build_embedding_index_docs",
    "semantic_rank",
    "KIND_TFIDF",
    "KIND_BM25",
    "KIND_EMBEDDING",
    "load_index",
    "save_index",
    "DEFAULT_BUCKETS",
    "TfidfIndex",
    "build_tfidf",
    "build_tfidf_docs",
    "features",
    "tfidf_rank",
]
