"""Cross-language localization of claim datasets, and balanced re-splits.

Localization walks each claim's evidence sets: a set survives only if
every referenced page maps through the alignment table AND the mapped
page exists in the target corpus.  Verifiable claims that lose all their
sets are dropped; NEI claims are always kept.  Sentence indexes are
dropped because sentence alignment across language editions is not
guaranteed -- evidence granularity becomes whole documents.

Drops are data, not errors: the report counts every pruning reason.
"""

from __future__ import annotations

import random
from collections.abc import Collection, Mapping

from ..errors import UsageError
from .records import LABELS, DropReport, LocalizedClaim, SourceClaim

REASON_SET_UNMAPPED = "evidence_set_unmapped_page"
REASON_SET_MISSING = "evidence_set_missing_in_target"
REASON_CLAIM_DROPPED = "claim_no_surviving_evidence"


def localize(
    claims: list[SourceClaim],
    alignment: Mapping[str, str],
    target_corpus: Collection[str],
) -> tuple[list[LocalizedClaim], DropReport]:
    report = DropReport()
    kept: list[LocalizedClaim] = []
    for claim in claims:
        surviving: list[list[str]] = []
        for ev_set in claim.evidence:
            pages = []
            failure = None
            for page, _sentence in ev_set:
                target = alignment.get(page)
                if target is None:
                    failure = REASON_SET_UNMAPPED
                    break
                if target not in target_corpus:
                    failure = REASON_SET_MISSING
                    break
                pages.append(target)
            if failure is not None:
                report.bump(failure)
                continue
            deduped = list(dict.fromkeys(pages))
            if deduped and deduped not in surviving:
                surviving.append(deduped)
        if claim.verifiable() and not surviving:
            report.bump(REASON_CLAIM_DROPPED)
            continue
        kept.append(
            LocalizedClaim(
                claim_id=claim.claim_id,
                text=claim.text,
                label=claim.label,
                evidence=surviving,
                source_text=claim.text,
            )
        )
    report.bump("claims_kept", len(kept))
    return kept, report


def resplit(
    claims: list[LocalizedClaim],
    dev_per_class: int,
    test_per_class: int,
    seed: int,
) -> dict[str, str]:
    """Assign claims to train/dev/test with exactly the requested
    per-class dev and test counts; everything else is train.

    Returns claim_id -> split.  Deterministic for a given seed;
    insufficient class counts fail loudly naming the class.
    """
    if dev_per_class < 0 or test_per_class < 0:
        raise UsageError("per-class counts must be non-negative")
    by_label: dict[str, list[str]] = {label: [] for label in LABELS}
    for claim in claims:
        by_label[claim.label].append(claim.claim_id)

    rng = random.Random(seed)
    assignment: dict[str, str] = {}
    need = dev_per_class + test_per_class
    for label in LABELS:
        ids = sorted(by_label[label])
        if len(ids) < need:
            raise UsageError(
                f"class {label!r} has {len(ids)} claims, needs {need} for dev+test"
            )
        rng.shuffle(ids)
        for cid in ids[:dev_per_class]:
            assignment[cid] = "dev"
        for cid in ids[dev_per_class:need]:
            assignment[cid] = "test"
        for cid in ids[need:]:
            assignment[cid] = "train"
    return assignment


def leakage_warning(claims: list[LocalizedClaim], assignment: Mapping[str, str]) -> dict:
    """Count evidence pages shared by claims in different splits.

    Balanced re-splitting cannot prevent this kind of leakage; it is
    surfaced as a warning, not an error.
    """
    page_splits: dict[str, set[str]] = {}
    for claim in claims:
        split = assignment.get(claim.claim_id)
        if split is None:
            continue
        for ev_set in claim.evidence:
            for page in ev_set:
                page_splits.setdefault(page, set()).add(split)
    shared = sorted(p for p, splits in page_splits.items() if len(splits) > 1)
    return {"pages_in_multiple_splits": len(shared), "sample": shared[:20]}
