"""BM25 inverted index with hyperparameter grid search.

Unigram index over case-folded tokens.  Scoring uses the non-negative
IDF variant

    idf(t) = ln(1 + (N - df + 0.5) / (df + 0.5))
    score(q, d) = sum over distinct query terms of
        idf(t) * tf * (k1 + 1) / (tf + k1 * (1 - b + b * dl / avgdl))

Query term multiplicity is ignored.  Grid search evaluates every (k1, b)
grid point by MRR@10 over a query sample and is exhaustive by design;
ties break toward the lexicographically smaller point.
"""

from __future__ import annotations

import math
import random
from collections import Counter
from collections.abc import Collection, Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from ..corpus import CorpusHandle
from ..errors import EmptyCorpusError, UsageError
from ..text import fold, tokenize
from .base import Ranking, top_k
from .metrics import mrr_at_k

DEFAULT_K1 = 0.9
DEFAULT_B = 0.9
DEFAULT_K1_GRID = [round(0.6 + 0.1 * i, 1) for i in range(7)]  # 0.6 .. 1.2
DEFAULT_B_GRID = [round(0.5 + 0.1 * i, 1) for i in range(5)]  # 0.5 .. 0.9


def terms(text: str) -> list[str]:
    return fold(tokenize(text))


@dataclass
class Bm25Index:
    doc_ids: list[str]
    postings: dict[str, list[tuple[int, int]]]  # term -> [(doc position, tf)]
    doc_len: list[int]
    avg_doc_len: float
    k1: float = DEFAULT_K1
    b: float = DEFAULT_B

    def __post_init__(self) -> None:
        if self.k1 < 0:
            raise UsageError(f"k1 must be >= 0, got {self.k1}")
        if not 0.0 <= self.b <= 1.0:
            raise UsageError(f"b must be in [0, 1], got {self.b}")

    @property
    def n_docs(self) -> int:
        return len(self.doc_ids)

    def idf(self, term: str) -> float:
        df = len(self.postings.get(term, ()))
        return math.log(1.0 + (self.n_docs - df + 0.5) / (df + 0.5))


def build_bm25(
    corpus: CorpusHandle, k1: float = DEFAULT_K1, b: float = DEFAULT_B
) -> Bm25Index:
    docs = [(p.paragraph_id, p.text) for p in corpus.iter_paragraphs()]
    return build_bm25_docs(docs, k1=k1, b=b)


def build_bm25_docs(
    docs: list[tuple[str, str]], k1: float = DEFAULT_K1, b: float = DEFAULT_B
) -> Bm25Index:
    """Build from (doc_id, text) pairs in stable order."""
    if not docs:
        raise EmptyCorpusError("cannot build bm25 index over empty corpus")
    doc_ids = [d[0] for d in docs]
    doc_len: list[int] = []
    postings: dict[str, list[tuple[int, int]]] = {}
    for pos, (_, text) in enumerate(docs):
        toks = terms(text)
        doc_len.append(len(toks))
        for term, tf in sorted(Counter(toks).items()):
            postings.setdefault(term, []).append((pos, tf))
    avg = sum(doc_len) / len(doc_len)
    return Bm25Index(
        doc_ids=doc_ids, postings=postings, doc_len=doc_len, avg_doc_len=avg, k1=k1, b=b
    )


def bm25_rank(
    index: Bm25Index,
    query: str,
    k: int,
    k1: float | None = None,
    b: float | None = None,
    allowed: Collection[str] | None = None,
) -> Ranking:
    """Top-k by BM25; ``k1``/``b`` override the index defaults per call."""
    if k < 1:
        raise UsageError(f"k must be >= 1, got {k}")
    k1 = index.k1 if k1 is None else k1
    b = index.b if b is None else b
    if k1 < 0 or not 0.0 <= b <= 1.0:
        raise UsageError(f"invalid bm25 parameters k1={k1}, b={b}")

    allowed_pos = None
    if allowed is not None:
        allowed = set(allowed)
        allowed_pos = {i for i, d in enumerate(index.doc_ids) if d in allowed}

    scores: dict[int, float] = {}
    for term in sorted(set(terms(query))):
        plist = index.postings.get(term)
        if not plist:
            continue
        idf = index.idf(term)
        for pos, tf in plist:
            if allowed_pos is not None and pos not in allowed_pos:
                continue
            norm = 1.0 - b + b * index.doc_len[pos] / index.avg_doc_len
            scores[pos] = scores.get(pos, 0.0) + idf * tf * (k1 + 1.0) / (tf + k1 * norm)
    named = {index.doc_ids[pos]: s for pos, s in scores.items() if s > 0.0}
    return top_k(named, k, query_id=query)


def grid_search_bm25_table(
    index: Bm25Index,
    queries: Mapping[str, str],
    gold: Mapping[str, Collection[str]],
    k1_grid: Sequence[float] | None = None,
    b_grid: Sequence[float] | None = None,
    sample: int | None = None,
    seed: int = 0,
    workers: int = 1,
) -> dict[tuple[float, float], float]:
    """MRR@10 for every grid point.  Parallel points, order-independent."""
    if not queries:
        raise UsageError("grid search needs a non-empty query set")
    k1_grid = list(k1_grid if k1_grid is not None else DEFAULT_K1_GRID)
    b_grid = list(b_grid if b_grid is not None else DEFAULT_B_GRID)
    qids = sorted(queries)
    if sample is not None and sample < len(qids):
        qids = sorted(random.Random(seed).sample(qids, sample))
    gold_subset = {qid: set(gold[qid]) for qid in qids}

    def evaluate(point: tuple[float, float]) -> tuple[tuple[float, float], float]:
        k1, b = point
        rankings = {
            qid: bm25_rank(index, queries[qid], k=10, k1=k1, b=b) for qid in qids
        }
        return point, mrr_at_k(rankings, gold_subset, ks=(10,))[10]

    points = [(k1, b) for k1 in k1_grid for b in b_grid]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = dict(pool.map(evaluate, points))
    else:
        results = dict(evaluate(p) for p in points)
    return results


def grid_search_bm25(
    index: Bm25Index,
    queries: Mapping[str, str],
    gold: Mapping[str, Collection[str]],
    k1_grid: Sequence[float] | None = None,
    b_grid: Sequence[float] | None = None,
    sample: int | None = None,
    seed: int = 0,
    workers: int = 1,
) -> tuple[float, float]:
    table = grid_search_bm25_table(
        index, queries, gold, k1_grid, b_grid, sample=sample, seed=seed, workers=workers
    )
    # Highest MRR wins; ties go to the smaller (k1, b).
    return min(table, key=lambda p: (-table[p], p))
