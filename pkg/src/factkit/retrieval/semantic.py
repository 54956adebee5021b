"""Exact semantic search over unit-norm paragraph embeddings.

The embedder is pluggable; the default is a deterministic hashing
vectorizer so the whole suite runs without any model.  Search is an
exhaustive dot-product scan: at desk-scale corpora an approximate index
buys nothing and exactness keeps the oracles simple.
"""

from __future__ import annotations

from collections.abc import Collection, Sequence
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from ..corpus import CorpusHandle
from ..errors import EmptyCorpusError, UsageError, ValidationError
from ..text import fold, tokenize
from .base import Ranking, fnv1a64

NORM_TOLERANCE = 1e-6


class Embedder(Protocol):
    tag: str
    dim: int

    def embed(self, texts: Sequence[str]) -> np.ndarray: ...


class HashingEmbedder:
    """Signed feature hashing of case-folded tokens, L2-normalized.

    Deterministic, model-free.  Token-free texts map to the first basis
    vector so every embedding stays unit norm.
    """

    def __init__(self, dim: int = 256, seed: int = 13):
        if dim < 2:
            raise UsageError(f"embedding dim must be >= 2, got {dim}")
        self.dim = dim
        self.seed = seed
        self.tag = f"hashing-v1-d{dim}-s{seed}"

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        out = np.zeros((len(texts), self.dim), dtype=np.float64)
        for row, text in enumerate(texts):
            for token in fold(tokenize(text)):
                h = fnv1a64(f"{self.seed}:{token}")
                slot = h % self.dim
                sign = 1.0 if (h >> 32) & 1 else -1.0
                out[row, slot] += sign
            norm = np.linalg.norm(out[row])
            if norm == 0.0:
                out[row, 0] = 1.0
            else:
                out[row] /= norm
        return out.astype(np.float32)


@dataclass
class EmbeddingIndex:
    doc_ids: list[str]
    vectors: np.ndarray  # (n, d), unit rows
    embedder_tag: str
    published_at: list[int]

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])

    def __post_init__(self) -> None:
        if self.vectors.ndim != 2 or self.vectors.shape[0] != len(self.doc_ids):
            raise ValidationError("vector matrix does not match doc ids")
        norms = np.linalg.norm(self.vectors, axis=1)
        if self.vectors.shape[0] and np.max(np.abs(norms - 1.0)) > NORM_TOLERANCE:
            raise ValidationError("embedding rows must be unit norm")


def build_embedding_index(
    corpus: CorpusHandle, embedder: Embedder, batch_size: int = 512
) -> EmbeddingIndex:
    docs = [(p.paragraph_id, p.text, p.published_at) for p in corpus.iter_paragraphs()]
    return build_embedding_index_docs(docs, embedder, batch_size)


def build_embedding_index_docs(
    docs: list[tuple[str, str, int]], embedder: Embedder, batch_size: int = 512
) -> EmbeddingIndex:
    """Build from (doc_id, text, published_at) tuples in stable order."""
    if not docs:
        raise EmptyCorpusError("cannot build embedding index over empty corpus")
    chunks = []
    for start in range(0, len(docs), batch_size):
        batch = docs[start : start + batch_size]
        chunks.append(embedder.embed([text for _, text, _ in batch]))
    return EmbeddingIndex(
        doc_ids=[d[0] for d in docs],
        vectors=np.vstack(chunks),
        embedder_tag=embedder.tag,
        published_at=[d[2] for d in docs],
    )


def semantic_rank(
    index: EmbeddingIndex,
    query_vector: np.ndarray,
    k: int,
    allowed: Collection[str] | None = None,
) -> Ranking:
    """Top-k by cosine (dot product on unit vectors), exhaustive scan."""
    if k < 1:
        raise UsageError(f"k must be >= 1, got {k}")
    query_vector = np.asarray(query_vector, dtype=np.float32).reshape(-1)
    if query_vector.shape[0] != index.dim:
        raise UsageError(
            f"query vector has dim {query_vector.shape[0]}, index has {index.dim}"
        )
    scores = index.vectors @ query_vector
    candidates = range(len(index.doc_ids))
    if allowed is not None:
        allowed = set(allowed)
        candidates = [i for i in candidates if index.doc_ids[i] in allowed]
    ordered = sorted(candidates, key=lambda i: (-float(scores[i]), index.doc_ids[i]))
    return Ranking(
        query_id="",
        items=[(index.doc_ids[i], float(scores[i])) for i in ordered[:k]],
    )
