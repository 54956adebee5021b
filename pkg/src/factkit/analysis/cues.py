"""Spurious-cue analytics: productivity, coverage, harmonic mean.

A cue is a case-sensitive unigram or bigram (bigrams never cross a
sentence boundary).  Productivity of a cue is the share of its claims
carried by its majority label,

    productivity = max over labels |claims with cue and label| / |claims with cue|

which on label-balanced data ranges over [1/|labels|, 1].  Coverage is
|claims with cue| / |claims|.  Because real datasets are unbalanced, the
metrics are computed on balanced subsamples (every class downsampled to
the minority size, without replacement) and averaged over a number of
subsample draws; the harmonic mean is taken of the averaged values.
A cue absent from a subsample contributes no observation to its average.
"""

from __future__ import annotations

import random
from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass

from ..errors import UsageError
from ..text import ngrams, split_sentences, tokenize

DEFAULT_SUBSAMPLES = 10


@dataclass(frozen=True)
class CueStatistics:
    cue: str
    order: int
    majority_label: str
    productivity: float
    coverage: float

    @property
    def harmonic_mean(self) -> float:
        p, c = self.productivity, self.coverage
        return 2 * p * c / (p + c) if (p + c) > 0 else 0.0


def claim_cues(text: str, order: int) -> set[str]:
    """Distinct case-preserving n-grams of the claim, sentence-bounded."""
    cues: set[str] = set()
    for sentence in split_sentences(text):
        cues.update(ngrams(tokenize(sentence), order))
    return cues


def balanced_subsample(labels: Sequence[str], rng: random.Random) -> list[int]:
    """Indices of a subsample with every class cut to the minority size."""
    by_label: dict[str, list[int]] = {}
    for i, label in enumerate(labels):
        by_label.setdefault(label, []).append(i)
    minority = min(len(v) for v in by_label.values())
    picked: list[int] = []
    for label in sorted(by_label):
        picked.extend(rng.sample(by_label[label], minority))
    return sorted(picked)


def cue_stats(
    claims: Sequence[tuple[str, str]],
    order: int,
    subsamples: int = DEFAULT_SUBSAMPLES,
    seed: int = 0,
    subsample_indices: list[list[int]] | None = None,
) -> list[CueStatistics]:
    """Ranked cue table for (text, label) claims.

    ``subsample_indices`` overrides the seeded draw (used by tests to
    pin the selection while checking the arithmetic independently).
    Ranking is by harmonic mean descending, ties broken by higher
    coverage and then by cue text.
    """
    if order not in (1, 2):
        raise UsageError(f"cue order must be 1 or 2, got {order}")
    if not claims:
        raise UsageError("no claims")
    labels = [label for _, label in claims]
    label_set = sorted(set(labels))
    if len(label_set) < 2:
        raise UsageError("cue statistics need at least 2 classes")

    if subsample_indices is None:
        rng = random.Random(seed)
        subsample_indices = [balanced_subsample(labels, rng) for _ in range(subsamples)]

    cue_sets = [claim_cues(text, order) for text, _ in claims]

    prod_sum: dict[str, float] = {}
    cov_sum: dict[str, float] = {}
    seen_in: dict[str, int] = {}
    label_votes: dict[str, Counter] = {}

    for indices in subsample_indices:
        n = len(indices)
        if n == 0:
            raise UsageError("empty subsample")
        cue_total: Counter = Counter()
        cue_by_label: dict[str, Counter] = {}
        for i in indices:
            for cue in cue_sets[i]:
                cue_total[cue] += 1
                cue_by_label.setdefault(cue, Counter())[labels[i]] += 1
        for cue, total in cue_total.items():
            per_label = cue_by_label[cue]
            productivity = max(per_label.values()) / total
            assert 1.0 / len(label_set) - 1e-12 <= productivity <= 1.0 + 1e-12
            prod_sum[cue] = prod_sum.get(cue, 0.0) + productivity
            cov_sum[cue] = cov_sum.get(cue, 0.0) + total / n
            seen_in[cue] = seen_in.get(cue, 0) + 1
            label_votes.setdefault(cue, Counter()).update(per_label)

    stats = []
    for cue, count in seen_in.items():
        votes = label_votes[cue]
        majority = max(sorted(votes), key=lambda lab: votes[lab])
        stats.append(
            CueStatistics(
                cue=cue,
                order=order,
                majority_label=majority,
                productivity=prod_sum[cue] / count,
                coverage=cov_sum[cue] / count,
            )
        )
    stats.sort(key=lambda s: (-s.harmonic_mean, -s.coverage, s.cue))
    return stats


def label_distribution(records: Sequence[tuple[str, str]]) -> dict[str, dict[str, int]]:
    """(split, label) records -> per-split per-label counts."""
    out: dict[str, dict[str, int]] = {}
    for split, label in records:
        out.setdefault(split, {})
        out[split][label] = out[split].get(label, 0) + 1
    return {split: dict(sorted(counts.items())) for split, counts in sorted(out.items())}
