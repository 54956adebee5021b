"""Per-query dictionary generation and knowledge-scope assembly.

A dictionary d(q) is the union of two parts, both restricted to
paragraphs published strictly before the query timestamp:

  * keyword part -- TF-IDF rankings for every entity-pair query, fused
    by max score per document, top n_kw;
  * semantic part -- the n_pre nearest paragraphs by embedding are
    clustered (k-means, k=2) and picked round-robin, nearest-to-query
    first, until n_sem documents.

Keyword entries precede semantic entries and the union is deduplicated.
Every entry records which pair query or cluster produced it, so the
annotation UI can badge provenance.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

import numpy as np

from ..corpus import CorpusHandle
from ..errors import UsageError
from ..retrieval.semantic import Embedder, EmbeddingIndex, semantic_rank
from ..retrieval.tfidf import TfidfIndex, tfidf_rank
from .clustering import kmeans, round_robin_select
from .ner import CapitalizedRunRecognizer, EntityRecognizer, pair_queries


@dataclass
class DictionaryParams:
    n_kw: int = 4
    n_pre: int = 1024
    k: int = 2
    n_sem: int = 4
    seed: int = 0


@dataclass(frozen=True)
class DictionaryEntry:
    paragraph_id: str
    score: float
    provenance: str
    published_at: int


@dataclass
class Dictionary:
    query: str
    timestamp: int
    keyword: list[DictionaryEntry]
    semantic: list[DictionaryEntry]

    def entries(self) -> list[DictionaryEntry]:
        return [*self.keyword, *self.semantic]

    def paragraph_ids(self) -> list[str]:
        return [e.paragraph_id for e in self.entries()]

    def to_dict(self) -> dict:
        return {
            "query": self.query,
            "timestamp": self.timestamp,
            "entries": [
                {
                    "paragraph_id": e.paragraph_id,
                    "score": e.score,
                    "provenance": e.provenance,
                    "published_at": e.published_at,
                }
                for e in self.entries()
            ],
        }


@dataclass
class KnowledgeScope:
    """Ordered paragraphs shown to an annotator; the source is always first."""

    source_paragraph_id: str
    paragraph_ids: list[str]  # includes the source at position 0
    seed: int
    provenance: dict[str, str] = field(default_factory=dict)
    augmentations: list[str] = field(default_factory=list)
    dictionary_pending: bool = False

    def all_ids(self) -> list[str]:
        return [*self.paragraph_ids, *self.augmentations]


class DictionaryBuilder:
    """Builds dictionaries against a fixed corpus + index set.

    Indexes may be ``None`` (e.g. an empty corpus); the corresponding
    part is then empty.  All randomness is seeded, so concurrent builds
    cannot change output.
    """

    def __init__(
        self,
        corpus: CorpusHandle | None,
        tfidf_index: TfidfIndex | None,
        embedding_index: EmbeddingIndex | None,
        embedder: Embedder | None,
        recognizer: EntityRecognizer | None = None,
        params: DictionaryParams | None = None,
    ):
        self.corpus = corpus
        self.tfidf_index = tfidf_index
        self.embedding_index = embedding_index
        self.embedder = embedder
        self.recognizer = recognizer or CapitalizedRunRecognizer()
        self.params = params or DictionaryParams()

    def _admissible(self, doc_ids: list[str], stamps: list[int], timestamp: int) -> set[str]:
        return {d for d, ts in zip(doc_ids, stamps) if ts < timestamp}

    def keyword_part(self, query: str, timestamp: int) -> list[DictionaryEntry]:
        index = self.tfidf_index
        if index is None or index.n_docs == 0:
            return []
        allowed = self._admissible(index.doc_ids, index.published_at, timestamp)
        if not allowed:
            return []
        stamps = dict(zip(index.doc_ids, index.published_at))
        entities = self.recognizer.extract(query)
        best: dict[str, tuple[float, str]] = {}
        for pq in pair_queries(entities, query):
            ranking = tfidf_rank(index, pq, k=len(allowed), allowed=allowed)
            for pid, score in ranking.items:
                if pid not in best or score > best[pid][0]:
                    best[pid] = (score, pq)
        ordered = sorted(best.items(), key=lambda kv: (-kv[1][0], kv[0]))
        return [
            DictionaryEntry(
                paragraph_id=pid,
                score=score,
                provenance=f"keyword:{pq}",
                published_at=stamps[pid],
            )
            for pid, (score, pq) in ordered[: self.params.n_kw]
        ]

    def semantic_part(
        self, query: str, timestamp: int, query_vector: np.ndarray | None = None
    ) -> list[DictionaryEntry]:
        index = self.embedding_index
        if index is None or len(index.doc_ids) == 0:
            return []
        if query_vector is None:
            if self.embedder is None:
                raise UsageError("semantic part needs an embedder or a query vector")
            query_vector = self.embedder.embed([query])[0]
        allowed = self._admissible(index.doc_ids, index.published_at, timestamp)
        if not allowed:
            return []
        stamps = dict(zip(index.doc_ids, index.published_at))
        pre = semantic_rank(
            index, query_vector, k=min(self.params.n_pre, len(allowed)), allowed=allowed
        )
        candidates = pre.items  # [(pid, cosine)], already deterministic order
        if not candidates:
            return []

        positions = {pid: i for i, pid in enumerate(index.doc_ids)}
        vectors = index.vectors[[positions[pid] for pid, _ in candidates]]
        sims = np.array([score for _, score in candidates])

        k = min(self.params.k, len(candidates))
        if k < 2:
            cluster_of = {i: 0 for i in range(len(candidates))}
            picked = list(range(min(self.params.n_sem, len(candidates))))
        else:
            result = kmeans(vectors, k=k, seed=self.params.seed)
            members = [result.members(c) for c in range(k)]
            picked = round_robin_select(members, sims, self.params.n_sem)
            cluster_of = {i: int(result.assignments[i]) for i in range(len(candidates))}
        return [
            DictionaryEntry(
                paragraph_id=candidates[i][0],
                score=float(sims[i]),
                provenance=f"semantic:cluster-{cluster_of[i]}",
                published_at=stamps[candidates[i][0]],
            )
            for i in picked
        ]

    def build(self, query: str, timestamp: int) -> Dictionary:
        keyword = self.keyword_part(query, timestamp)
        taken = {e.paragraph_id for e in keyword}
        semantic = [
            e for e in self.semantic_part(query, timestamp) if e.paragraph_id not in taken
        ]
        return Dictionary(query=query, timestamp=timestamp, keyword=keyword, semantic=semantic)


def assemble_scope(
    corpus: CorpusHandle,
    source_paragraph_id: str,
    dictionaries: list[Dictionary],
    seed: int,
) -> KnowledgeScope:
    """{source} followed by a seeded shuffle of the dictionary entries."""
    corpus.get_paragraph(source_paragraph_id)  # not-found propagates
    provenance: dict[str, str] = {source_paragraph_id: "source"}
    rest: list[str] = []
    for d in dictionaries:
        for entry in d.entries():
            pid = entry.paragraph_id
            if pid == source_paragraph_id or pid in provenance:
                continue
            provenance[pid] = entry.provenance
            rest.append(pid)
    random.Random(seed).shuffle(rest)
    return KnowledgeScope(
        source_paragraph_id=source_paragraph_id,
        paragraph_ids=[source_paragraph_id, *rest],
        seed=seed,
        provenance=provenance,
    )
