"""Dictionary generation: NER, pair queries, clustering, temporal safety."""

import itertools
import math
import random

import numpy as np
import pytest

from factkit.dictionary import (
    CapitalizedRunRecognizer,
    DictionaryBuilder,
    DictionaryParams,
    assemble_scope,
    kmeans,
    pair_queries,
    round_robin_select,
)
from factkit.errors import NotFoundError, UsageError
from factkit.retrieval import (
    HashingEmbedder,
    build_embedding_index_docs,
    build_tfidf_docs,
)

from helpers import BASE_TS

NER = CapitalizedRunRecognizer()


# ------------------------------------------------------------------- NER ----


def test_worked_example_entities():
    spans = NER.extract("Both Obama and Biden visited Germany.")
    assert [s.surface for s in spans] == ["Obama", "Biden", "Germany"]


def test_all_lowercase_no_entities():
    assert NER.extract("nothing capitalized in this sentence.") == []


def test_repeated_entity_deduplicated():
    spans = NER.extract("Praha is old. Praha is in Bohemia and Praha is big.")
    surfaces = [s.surface for s in spans]
    assert surfaces.count("Praha") == 1


def test_sentence_initial_included_only_when_recurring():
    # "Paris" opens the sentence but recurs mid-sentence, so it counts;
    # "Once" opens and never recurs, so it does not.
    spans = NER.extract("Once there was Berlin. Paris grew while Paris slept.")
    assert [s.surface for s in spans] == ["Berlin", "Paris"]


def test_capitalized_run_merges_adjacent_tokens():
    spans = NER.extract("They met Angela Merkel in Nice, near Monte Carlo.")
    assert [s.surface for s in spans] == ["Angela Merkel", "Nice", "Monte Carlo"]


def test_comma_separates_runs():
    spans = NER.extract("He saw Obama, Biden yesterday.")
    assert [s.surface for s in spans] == ["Obama", "Biden"]


def test_offsets_point_into_text():
    text = "We visited Brno and Olomouc."
    for span in NER.extract(text):
        assert text[span.start : span.end] == span.surface


# ---------------------------------------------------------- pair queries ----


def test_worked_example_pair_queries():
    entities = NER.extract("Both Obama and Biden visited Germany.")
    assert pair_queries(entities, "unused") == [
        "Obama, Biden",
        "Obama, Germany",
        "Biden, Germany",
    ]


def test_pair_count_is_n_choose_2():
    for n in range(2, 7):
        text = " ".join(f"mid Entity{i}," for i in range(n))
        entities = NER.extract(text)
        assert len(entities) == n
        assert len(pair_queries(entities, text)) == math.comb(n, 2)


def test_single_entity_fallback():
    entities = NER.extract("only Praha matters here.")
    assert pair_queries(entities, "whatever") == ["Praha"]


def test_no_entities_fallback_to_raw_query():
    assert pair_queries([], "plain lowercase query") == ["plain lowercase query"]


# --------------------------------------------------------------- k-means ----


def test_kmeans_objective_never_increases():
    rng = np.random.default_rng(5)
    for trial in range(10):
        points = rng.normal(size=(40, 8))
        result = kmeans(points, k=3, seed=trial)
        history = result.objective_history
        assert all(a >= b - 1e-9 for a, b in zip(history, history[1:]))


def test_kmeans_two_blobs_separate():
    rng = np.random.default_rng(6)
    blob_a = rng.normal(loc=0.0, scale=0.05, size=(10, 4))
    blob_b = rng.normal(loc=5.0, scale=0.05, size=(10, 4))
    points = np.vstack([blob_a, blob_b])
    result = kmeans(points, k=2, seed=0)
    first_half = set(result.assignments[:10].tolist())
    second_half = set(result.assignments[10:].tolist())
    assert len(first_half) == 1 and len(second_half) == 1
    assert first_half != second_half


def test_kmeans_identical_points_ok():
    points = np.ones((6, 3))
    result = kmeans(points, k=2, seed=1)
    assert len(result.assignments) == 6


def test_kmeans_k_bounds():
    with pytest.raises(UsageError):
        kmeans(np.ones((3, 2)), k=4)
    with pytest.raises(UsageError):
        kmeans(np.ones((3, 2)), k=0)


def test_round_robin_alternates_clusters_while_both_nonempty():
    members = [[0, 1, 2], [3, 4]]
    similarity = np.array([0.9, 0.8, 0.7, 0.95, 0.5])
    picks = round_robin_select(members, similarity, n_target=5)
    assert picks == [0, 3, 1, 4, 2]
    cluster_of = {0: 0, 1: 0, 2: 0, 3: 1, 4: 1}
    # consecutive picks alternate while both clusters have members left
    assert cluster_of[picks[0]] != cluster_of[picks[1]]
    assert cluster_of[picks[1]] != cluster_of[picks[2]]
    assert cluster_of[picks[2]] != cluster_of[picks[3]]


def test_round_robin_matches_bruteforce_oracle_on_ten_point_fixtures():
    rng = random.Random(17)
    for trial in range(25):
        sims = np.array([round(rng.random(), 6) for _ in range(10)])
        cut = rng.randint(1, 9)
        members = [list(range(cut)), list(range(cut, 10))]
        n_target = rng.randint(1, 10)
        picks = round_robin_select(members, sims, n_target)

        # Oracle: explicit simulation with per-cluster argmax extraction.
        pools = [sorted(members[0], key=lambda i: (-sims[i], i)),
                 sorted(members[1], key=lambda i: (-sims[i], i))]
        expected = []
        while len(expected) < n_target and (pools[0] or pools[1]):
            for pool in pools:
                if pool and len(expected) < n_target:
                    expected.append(pool.pop(0))
        assert picks == expected


# ------------------------------------------------------ dictionary builder ----


def toy_docs():
    """Six paragraphs with controlled timestamps and entity mentions."""
    return [
        ("p0", "Obama met Biden in Washington to discuss policy.", BASE_TS - 5000),
        ("p1", "Biden traveled to Germany for the economic summit.", BASE_TS - 4000),
        ("p2", "Obama visited Germany twice during the trade mission.", BASE_TS - 3000),
        ("p3", "The festival in Ostrava drew a large crowd.", BASE_TS - 2000),
        ("p4", "Germany increased its budget for rail transport.", BASE_TS - 1000),
        ("p5", "Obama and Biden later wrote about Germany.", BASE_TS + 1000),  # future
    ]


def make_builder(params=None):
    docs = toy_docs()
    embedder = HashingEmbedder(dim=64)
    return DictionaryBuilder(
        corpus=None,
        tfidf_index=build_tfidf_docs(docs, buckets=1 << 16),
        embedding_index=build_embedding_index_docs(docs, embedder),
        embedder=embedder,
        params=params or DictionaryParams(n_kw=4, n_pre=8, k=2, n_sem=4, seed=0),
    )


def test_keyword_part_temporal_filter_is_strict():
    builder = make_builder()
    entries = builder.keyword_part("Obama and Biden visited Germany.", BASE_TS)
    assert entries, "expected keyword entries"
    assert all(e.published_at < BASE_TS for e in entries)
    assert not any(e.paragraph_id == "p5" for e in entries)
    # Strictness: a doc published exactly at the query timestamp is excluded.
    entries_at = builder.keyword_part("Obama", BASE_TS - 5000)
    assert not any(e.paragraph_id == "p0" for e in entries_at)


def test_keyword_part_max_fusion_oracle():
    """Merge-and-sort oracle over every pair-query ranking."""
    from factkit.retrieval import tfidf_rank

    builder = make_builder()
    query = "Both Obama and Biden visited Germany."
    entries = builder.keyword_part(query, BASE_TS)

    allowed = {pid for pid, _, ts in toy_docs() if ts < BASE_TS}
    best = {}
    for pq in ("Obama, Biden", "Obama, Germany", "Biden, Germany"):
        for pid, score in tfidf_rank(builder.tfidf_index, pq, k=6, allowed=allowed).items:
            if pid not in best or score > best[pid]:
                best[pid] = score
    expected = sorted(best.items(), key=lambda kv: (-kv[1], kv[0]))[:4]
    assert [(e.paragraph_id, e.score) for e in entries] == expected


def test_keyword_part_retrieved_by_two_pair_queries_appears_once():
    builder = make_builder()
    entries = builder.keyword_part("Both Obama and Biden visited Germany.", BASE_TS)
    ids = [e.paragraph_id for e in entries]
    assert len(ids) == len(set(ids))


def test_semantic_part_two_blob_round_robin_oracle():
    """10-point fixture: cluster assignment + per-cluster argmax oracle."""
    rng = np.random.default_rng(9)
    blob_a = rng.normal(loc=(1.0, 0.0), scale=0.01, size=(5, 2))
    blob_b = rng.normal(loc=(0.0, 1.0), scale=0.01, size=(5, 2))
    vectors = np.vstack([blob_a, blob_b])
    vectors /= np.linalg.norm(vectors, axis=1, keepdims=True)

    class StubEmbedder:
        tag = "stub"
        dim = 2

        def embed(self, texts):
            return np.tile(query, (len(texts), 1)).astype(np.float32)

    query = np.array([1.0, 0.2])
    query /= np.linalg.norm(query)

    from factkit.retrieval.semantic import EmbeddingIndex

    index = EmbeddingIndex(
        doc_ids=[f"d{i}" for i in range(10)],
        vectors=vectors.astype(np.float32),
        embedder_tag="stub",
        published_at=[BASE_TS - 10] * 10,
    )
    builder = DictionaryBuilder(
        corpus=None, tfidf_index=None, embedding_index=index,
        embedder=StubEmbedder(),
        params=DictionaryParams(n_kw=4, n_pre=10, k=2, n_sem=4, seed=3),
    )
    entries = builder.semantic_part("whatever", BASE_TS)
    assert len(entries) == 4

    # Oracle: enumerate both cluster halves (blobs are separable), then
    # alternate picks, each the blob's nearest-to-query unconsumed member.
    sims = vectors @ query
    blob_of = lambda i: 0 if i < 5 else 1
    first = int(np.argmax(sims))
    pools = {0: sorted(range(5), key=lambda i: (-sims[i], i)),
             1: sorted(range(5, 10), key=lambda i: (-sims[i], i))}
    order = [blob_of(first), 1 - blob_of(first)]
    expected = []
    while len(expected) < 4:
        for blob in order:
            if pools[blob] and len(expected) < 4:
                expected.append(pools[blob].pop(0))
    got = [int(e.paragraph_id[1:]) for e in entries]
    # Cluster ids are arbitrary; compare pick sets per position parity.
    assert got[0] == expected[0] or got[0] == expected[1]
    assert set(got) == set(expected)
    # 2 picks per blob, each pick the blob's nearest-to-query at its turn.
    assert sum(1 for i in got if i < 5) == 2
    assert sum(1 for i in got if i >= 5) == 2
    assert sorted(got[0:2]) == sorted([expected[0], expected[1]])


def test_semantic_part_identical_vectors_any_subset():
    docs = [(f"p{i}", "same words exactly", BASE_TS - 10) for i in range(6)]
    embedder = HashingEmbedder(dim=32)
    builder = DictionaryBuilder(
        corpus=None, tfidf_index=None,
        embedding_index=build_embedding_index_docs(docs, embedder),
        embedder=embedder,
        params=DictionaryParams(n_pre=6, k=2, n_sem=4, seed=0),
    )
    entries = builder.semantic_part("same words", BASE_TS)
    assert len(entries) == 4
    scores = {e.score for e in entries}
    assert len(scores) == 1  # all candidates tie


def test_semantic_part_fewer_candidates_than_k_degrades():
    docs = [("p0", "single document here", BASE_TS - 10)]
    embedder = HashingEmbedder(dim=32)
    builder = DictionaryBuilder(
        corpus=None, tfidf_index=None,
        embedding_index=build_embedding_index_docs(docs, embedder),
        embedder=embedder,
        params=DictionaryParams(n_pre=4, k=2, n_sem=4, seed=0),
    )
    entries = builder.semantic_part("single", BASE_TS)
    assert [e.paragraph_id for e in entries] == ["p0"]


def test_nsem_larger_than_candidates_returns_all():
    docs = [(f"p{i}", f"text number {i}", BASE_TS - 10) for i in range(3)]
    embedder = HashingEmbedder(dim=32)
    builder = DictionaryBuilder(
        corpus=None, tfidf_index=None,
        embedding_index=build_embedding_index_docs(docs, embedder),
        embedder=embedder,
        params=DictionaryParams(n_pre=8, k=2, n_sem=10, seed=0),
    )
    entries = builder.semantic_part("text", BASE_TS)
    assert len(entries) == 3


def test_build_dictionary_empty_corpus():
    builder = DictionaryBuilder(corpus=None, tfidf_index=None,
                                embedding_index=None, embedder=None)
    d = builder.build("Any query.", BASE_TS)
    assert d.entries() == []


def test_build_dictionary_union_and_budget():
    builder = make_builder()
    d = builder.build("Both Obama and Biden visited Germany.", BASE_TS)
    ids = d.paragraph_ids()
    assert len(ids) == len(set(ids))
    assert len(ids) <= 8  # n_kw + n_sem
    assert [e.paragraph_id for e in d.entries()[: len(d.keyword)]] == [
        e.paragraph_id for e in d.keyword
    ]  # keyword part listed first
    assert all(e.published_at < BASE_TS for e in d.entries())


def test_build_dictionary_composition_of_part_oracles():
    builder = make_builder()
    query = "Both Obama and Biden visited Germany."
    d = builder.build(query, BASE_TS)
    kw = builder.keyword_part(query, BASE_TS)
    sem = [e for e in builder.semantic_part(query, BASE_TS)
           if e.paragraph_id not in {k.paragraph_id for k in kw}]
    assert [e.paragraph_id for e in d.entries()] == [
        e.paragraph_id for e in [*kw, *sem]
    ]


def test_build_dictionary_deterministic():
    builder_a = make_builder()
    builder_b = make_builder()
    q = "Obama and Biden visited Germany."
    assert builder_a.build(q, BASE_TS).to_dict() == builder_b.build(q, BASE_TS).to_dict()


def test_temporal_safety_randomized():
    builder = make_builder()
    rng = random.Random(23)
    names = ["Obama", "Biden", "Germany", "Ostrava", "Washington"]
    for _ in range(200):
        q = f"{rng.choice(names)} and {rng.choice(names)} met."
        ts = BASE_TS + rng.randint(-6000, 2000)
        d = builder.build(q, ts)
        assert all(e.published_at < ts for e in d.entries())
        assert len(d.paragraph_ids()) <= 8


# ------------------------------------------------------------- scope ----


def test_assemble_scope_source_first_and_seeded(corpus):
    builder = make_builder()
    d1 = builder.build("Obama met Biden.", BASE_TS)
    d2 = builder.build("Germany increased budget.", BASE_TS)
    source = corpus.paragraph_ids()[0]
    scope_a = assemble_scope(corpus, source, [d1, d2], seed=42)
    scope_b = assemble_scope(corpus, source, [d1, d2], seed=42)
    assert scope_a.paragraph_ids[0] == source
    assert scope_a.paragraph_ids == scope_b.paragraph_ids
    assert len(scope_a.paragraph_ids) == len(set(scope_a.paragraph_ids))


def test_assemble_scope_no_dictionaries(corpus):
    source = corpus.paragraph_ids()[0]
    scope = assemble_scope(corpus, source, [], seed=0)
    assert scope.paragraph_ids == [source]


def test_assemble_scope_shared_entry_once(corpus):
    builder = make_builder()
    d = builder.build("Obama met Biden.", BASE_TS)
    source = corpus.paragraph_ids()[0]
    scope = assemble_scope(corpus, source, [d, d], seed=1)
    ids = scope.paragraph_ids
    assert len(ids) == len(set(ids))


def test_assemble_scope_unknown_paragraph(corpus):
    with pytest.raises(NotFoundError):
        assemble_scope(corpus, "missing:0", [], seed=0)
