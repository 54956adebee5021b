"""Split assignment: group-aware export splits and claim-level folds.

Export splits group claims by their source paragraph so that one source
paragraph never feeds two splits (the leakage guarantee); assignment is
greedy over groups, largest first, each group going to the split with
the largest ratio-scaled per-label deficit.  Fold splits for the
cleaning loop are claim-level stratified draws with the test split
restricted to untraversed claims.
"""

from __future__ import annotations

import hashlib
import random
from collections import Counter
from collections.abc import Mapping, Sequence

from ..errors import UsageError

SPLIT_RATIOS = {"train": 0.8, "dev": 0.1, "test": 0.1}
SPLIT_ORDER = ("train", "dev", "test")


def group_stratified_splits(
    groups: Mapping[str, Sequence[str]],
    seed: int,
    ratios: Mapping[str, float] | None = None,
) -> dict[str, str]:
    """Assign each group (source paragraph -> labels of its claims) to
    one split.  Deterministic for a seed; the seed only breaks ordering
    ties between equal-sized groups."""
    ratios = dict(ratios or SPLIT_RATIOS)
    if abs(sum(ratios.values()) - 1.0) > 1e-9:
        raise UsageError(f"split ratios must sum to 1, got {ratios}")

    totals: Counter = Counter()
    for labels in groups.values():
        totals.update(labels)

    targets = {
        split: {label: ratios[split] * totals[label] for label in totals}
        for split in ratios
    }
    assigned = {split: Counter() for split in ratios}

    def tiebreak(gid: str) -> str:
        return hashlib.sha256(f"{seed}:{gid}".encode("utf-8")).hexdigest()

    order = sorted(groups, key=lambda gid: (-len(groups[gid]), tiebreak(gid)))
    out: dict[str, str] = {}
    for gid in order:
        counts = Counter(groups[gid])
        best_split = None
        best_score = None
        for split in SPLIT_ORDER:
            if split not in ratios:
                continue
            score = sum(
                counts[label]
                * (targets[split][label] - assigned[split][label])
                / ratios[split]
                for label in counts
            )
            if best_score is None or score > best_score:
                best_score = score
                best_split = split
        out[gid] = best_split
        assigned[best_split].update(counts)
    return out


def stratified_fold_splits(
    labels_by_claim: Mapping[str, str],
    untraversed: set[str],
    seed: int,
    ratios: Mapping[str, float] | None = None,
) -> dict[str, str]:
    """Claim-level 8:1:1 stratified fold assignment.

    Per label, round(test_ratio * total) test claims are drawn from the
    untraversed pool (capped by its size), then round(dev_ratio * total)
    dev claims from the remainder; everything else is train.
    """
    ratios = dict(ratios or SPLIT_RATIOS)
    rng = random.Random(seed)
    by_label: dict[str, list[str]] = {}
    for cid in sorted(labels_by_claim):
        by_label.setdefault(labels_by_claim[cid], []).append(cid)

    assignment: dict[str, str] = {}
    for label in sorted(by_label):
        ids = by_label[label]
        total = len(ids)
        test_target = round(ratios["test"] * total)
        dev_target = round(ratios["dev"] * total)
        pool = [c for c in ids if c in untraversed]
        rng.shuffle(pool)
        test_ids = set(pool[: min(test_target, len(pool))])
        rest = [c for c in ids if c not in test_ids]
        rng.shuffle(rest)
        dev_ids = set(rest[: min(dev_target, len(rest))])
        for cid in ids:
            if cid in test_ids:
                assignment[cid] = "test"
            elif cid in dev_ids:
                assignment[cid] = "dev"
            else:
                assignment[cid] = "train"
    return assignment
