"""Exact semantic search against a linear-scan oracle."""

import numpy as np
import pytest

from factkit.errors import UsageError, ValidationError
from factkit.retrieval import EmbeddingIndex, HashingEmbedder, semantic_rank


def unit_rows(matrix):
    return matrix / np.linalg.norm(matrix, axis=1, keepdims=True)


def make_index(n, d, seed):
    rng = np.random.default_rng(seed)
    vectors = unit_rows(rng.normal(size=(n, d))).astype(np.float32)
    return EmbeddingIndex(
        doc_ids=[f"p{i:03d}" for i in range(n)],
        vectors=vectors,
        embedder_tag="test",
        published_at=[0] * n,
    )


def test_stored_vector_query_scores_one():
    index = make_index(20, 16, seed=1)
    ranking = semantic_rank(index, index.vectors[7], k=1)
    assert ranking.doc_ids() == ["p007"]
    assert ranking.items[0][1] == pytest.approx(1.0, abs=1e-6)


def test_orthogonal_query_scores_zero():
    vectors = np.eye(4, dtype=np.float32)
    index = EmbeddingIndex(
        doc_ids=["a", "b", "c", "d"], vectors=vectors,
        embedder_tag="test", published_at=[0] * 4,
    )
    ranking = semantic_rank(index, np.array([0, 0, 0, 1.0], dtype=np.float32), k=4)
    scores = dict(ranking.items)
    assert scores["a"] == pytest.approx(0.0, abs=1e-9)


def test_topk_matches_exhaustive_scan_oracle():
    index = make_index(100, 32, seed=2)
    rng = np.random.default_rng(3)
    for trial in range(100):
        q = rng.normal(size=32)
        q = (q / np.linalg.norm(q)).astype(np.float32)
        scores = index.vectors @ q
        oracle = sorted(
            range(100), key=lambda i: (-float(scores[i]), index.doc_ids[i])
        )
        for k in (1, 5, 10, 100):
            got = semantic_rank(index, q, k=k).doc_ids()
            assert got == [index.doc_ids[i] for i in oracle[:k]]


def test_dimension_mismatch_is_an_error():
    index = make_index(5, 8, seed=4)
    with pytest.raises(UsageError):
        semantic_rank(index, np.ones(7, dtype=np.float32), k=1)


def test_non_unit_rows_rejected():
    with pytest.raises(ValidationError):
        EmbeddingIndex(
            doc_ids=["a"], vectors=np.array([[2.0, 0.0]], dtype=np.float32),
            embedder_tag="test", published_at=[0],
        )


def test_hashing_embedder_deterministic_unit_norm():
    embedder = HashingEmbedder(dim=64, seed=13)
    texts = ["Some sentence here.", "Another one.", ""]
    a = embedder.embed(texts)
    b = embedder.embed(texts)
    assert np.array_equal(a, b)
    norms = np.linalg.norm(a, axis=1)
    assert np.allclose(norms, 1.0, atol=1e-6)


def test_hashing_embedder_separates_topics():
    embedder = HashingEmbedder(dim=128)
    vectors = embedder.embed([
        "economy budget inflation economy budget",
        "economy budget deficit inflation",
        "opera festival stage choir",
    ])
    same = float(vectors[0] @ vectors[1])
    different = float(vectors[0] @ vectors[2])
    assert same > different
