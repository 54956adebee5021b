"""Hashed TF-IDF index over unigrams and bigrams.

Features are case-folded token n-grams hashed into a power-of-two bucket
space (2^24 by default) with the pinned 64-bit FNV-1a hash.  Weighting is

    w(term, doc) = log(1 + tf) * log((N + 1) / (df + 1))

and a query scores documents by the dot product of query and document
weight vectors.  With a vocabulary smaller than the bucket count and no
collisions this is exactly the dense TF-IDF ranking, which is what the
test oracle checks.
"""

from __future__ import annotations

import math
from collections import Counter
from collections.abc import Collection
from dataclasses import dataclass, field

from ..corpus import CorpusHandle
from ..errors import EmptyCorpusError, UsageError
from ..text import fold, ngrams, tokenize
from .base import Ranking, fnv1a64, top_k

DEFAULT_BUCKETS = 1 << 24


def features(text: str) -> list[str]:
    """Case-folded unigrams and bigrams of ``text``."""
    tokens = fold(tokenize(text))
    return ngrams(tokens, 1) + ngrams(tokens, 2)


def bucket_of(feature: str, buckets: int) -> int:
    return fnv1a64(feature) & (buckets - 1)


@dataclass
class TfidfIndex:
    buckets: int
    doc_ids: list[str]
    # bucket -> [(doc position, weight)], postings in doc order
    postings: dict[int, list[tuple[int, float]]]
    doc_freq: dict[int, int]
    published_at: list[int] = field(default_factory=list)

    @property
    def n_docs(self) -> int:
        return len(self.doc_ids)

    def idf(self, bucket: int) -> float:
        return math.log((self.n_docs + 1) / (self.doc_freq.get(bucket, 0) + 1))


def build_tfidf(corpus: CorpusHandle, buckets: int = DEFAULT_BUCKETS) -> TfidfIndex:
    docs = [(p.paragraph_id, p.text, p.published_at) for p in corpus.iter_paragraphs()]
    return build_tfidf_docs(docs, buckets)


def build_tfidf_docs(
    docs: list[tuple[str, str, int]], buckets: int = DEFAULT_BUCKETS
) -> TfidfIndex:
    """Build from (doc_id, text, published_at) tuples in stable order."""
    if buckets <= 0 or buckets & (buckets - 1):
        raise UsageError(f"bucket count must be a power of two, got {buckets}")
    if not docs:
        raise EmptyCorpusError("cannot build tf-idf index over empty corpus")

    doc_ids = [d[0] for d in docs]
    published_at = [d[2] for d in docs]
    doc_freq: dict[int, int] = {}
    raw_tf: list[dict[int, int]] = []
    for _, text, _ in docs:
        counts = Counter(bucket_of(f, buckets) for f in features(text))
        raw_tf.append(dict(counts))
        for b in counts:
            doc_freq[b] = doc_freq.get(b, 0) + 1

    n = len(docs)
    postings: dict[int, list[tuple[int, float]]] = {}
    for pos, counts in enumerate(raw_tf):
        for b, tf in counts.items():
            w = math.log1p(tf) * math.log((n + 1) / (doc_freq[b] + 1))
            postings.setdefault(b, []).append((pos, w))
    return TfidfIndex(
        buckets=buckets,
        doc_ids=doc_ids,
        postings=postings,
        doc_freq=doc_freq,
        published_at=published_at,
    )


def tfidf_rank(
    index: TfidfIndex,
    query: str,
    k: int,
    allowed: Collection[str] | None = None,
) -> Ranking:
    """Top-k documents for ``query``; unindexed queries rank nothing.

    ``allowed`` restricts scoring to the given paragraph ids (used by the
    temporal filters, which filter before ranking).
    """
    if k < 1:
        raise UsageError(f"k must be >= 1, got {k}")
    allowed_pos = None
    if allowed is not None:
        allowed = set(allowed)
        allowed_pos = {i for i, d in enumerate(index.doc_ids) if d in allowed}

    q_counts = Counter(bucket_of(f, index.buckets) for f in features(query))
    scores: dict[int, float] = {}
    for b, qtf in q_counts.items():
        plist = index.postings.get(b)
        if not plist:
            continue
        qw = math.log1p(qtf) * index.idf(b)
        for pos, dw in plist:
            if allowed_pos is not None and pos not in allowed_pos:
                continue
            scores[pos] = scores.get(pos, 0.0) + qw * dw
    named = {index.doc_ids[pos]: s for pos, s in scores.items() if s > 0.0}
    return top_k(named, k, query_id=query)
