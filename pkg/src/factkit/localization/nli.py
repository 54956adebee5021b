"""NLI pair construction and the transduction-validity sampling harness.

NLI pairs view the dataset as (context, query, label): verifiable claims
get the concatenated full texts of their first surviving evidence set;
NEI claims get a uniformly sampled window of 3-5 contiguous sentences
from the top-retrieved document for the claim.

The validity harness exports a seeded sample of verifiable claims with
their evidence texts for manual annotation; ingesting the filled file
yields outcome counts, a label confusion matrix and the transduction
precision.
"""

from __future__ import annotations

import json
import random
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import UsageError, ValidationError
from ..text import split_sentences
from .records import LABELS, NEI, DropReport, LocalizedClaim, NliPair, normalize_label

EVIDENCE_SEPARATOR = "\n"
NEI_MIN_SENTENCES = 3
NEI_MAX_SENTENCES = 5

OUTCOME_VALID = "valid"
OUTCOME_NEI_IN_TARGET = "nei-in-target"
OUTCOME_BAD_TRANSLATION = "bad-translation"
OUTCOMES = (OUTCOME_VALID, OUTCOME_NEI_IN_TARGET, OUTCOME_BAD_TRANSLATION)


def build_nli_pairs(
    claims: list[LocalizedClaim],
    page_texts: Mapping[str, str],
    retriever: Callable[[str, int], list[str]],
    rng: random.Random,
) -> tuple[list[NliPair], DropReport]:
    report = DropReport()
    pairs: list[NliPair] = []
    for claim in claims:
        if claim.verifiable():
            ev_set = claim.evidence[0]
            texts = []
            missing = False
            for page in ev_set:
                text = page_texts.get(page)
                if text is None:
                    missing = True
                    break
                texts.append(text)
            if missing:
                report.bump("evidence_text_missing")
                continue
            pairs.append(
                NliPair(
                    context=EVIDENCE_SEPARATOR.join(texts),
                    query=claim.text,
                    label=claim.label,
                    provenance="gold-evidence",
                )
            )
        else:
            top = retriever(claim.text, 1)
            if not top:
                report.bump("nei_empty_retrieval")
                continue
            text = page_texts.get(top[0])
            if text is None:
                report.bump("nei_retrieved_text_missing")
                continue
            sentences = split_sentences(text)
            n = rng.randint(NEI_MIN_SENTENCES, NEI_MAX_SENTENCES)
            if len(sentences) < n:
                n = len(sentences)
                if n < NEI_MIN_SENTENCES:
                    report.bump("nei_context_short")
            start = rng.randrange(len(sentences) - n + 1)
            pairs.append(
                NliPair(
                    context=" ".join(sentences[start : start + n]),
                    query=claim.text,
                    label=NEI,
                    provenance="sampled-NEI",
                )
            )
    return pairs, report


def validity_sample(
    claims: list[LocalizedClaim],
    fraction: float,
    seed: int,
    page_texts: Mapping[str, str] | None = None,
) -> list[dict]:
    """Seeded uniform sample of verifiable claims as an annotation task file.

    Each row carries the claim, its evidence page ids and texts, plus
    empty ``observed_label`` / ``outcome`` / ``notes`` fields for the
    annotator to fill.
    """
    if not 0.0 < fraction <= 1.0:
        raise UsageError(f"fraction must be in (0, 1], got {fraction}")
    verifiable = sorted((c for c in claims if c.verifiable()), key=lambda c: c.claim_id)
    n = len(verifiable) if fraction == 1.0 else max(1, round(fraction * len(verifiable)))
    n = min(n, len(verifiable))
    sample = sorted(random.Random(seed).sample(verifiable, n), key=lambda c: c.claim_id)
    rows = []
    for claim in sample:
        texts = {}
        if page_texts is not None:
            for ev_set in claim.evidence:
                for page in ev_set:
                    if page in page_texts:
                        texts[page] = page_texts[page]
        rows.append(
            {
                "id": claim.claim_id,
                "claim": claim.text,
                "label": claim.label,
                "evidence": claim.evidence,
                "evidence_texts": texts,
                "observed_label": "",
                "outcome": "",
                "notes": "",
            }
        )
    return rows


@dataclass
class ValidityReport:
    total: int
    outcome_counts: dict[str, int]
    confusion: dict[str, dict[str, int]]  # original label -> observed label -> count
    notes: list[str] = field(default_factory=list)

    @property
    def precision(self) -> float:
        if self.total == 0:
            return 0.0
        return self.outcome_counts.get(OUTCOME_VALID, 0) / self.total

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "precision": self.precision,
            "outcome_counts": self.outcome_counts,
            "confusion": self.confusion,
            "notes": self.notes,
        }


def ingest_validity(rows: list[dict]) -> ValidityReport:
    """Aggregate a filled validity task file."""
    outcome_counts = {o: 0 for o in OUTCOMES}
    confusion = {a: {b: 0 for b in LABELS} for a in LABELS}
    notes: list[str] = []
    total = 0
    for row in rows:
        outcome = str(row.get("outcome", "")).strip()
        if not outcome:
            continue  # unfilled rows are skipped
        if outcome not in OUTCOMES:
            raise ValidationError(f"row {row.get('id')}: unknown outcome {outcome!r}")
        total += 1
        outcome_counts[outcome] += 1
        observed = str(row.get("observed_label", "")).strip()
        if observed:
            confusion[normalize_label(row["label"])][normalize_label(observed)] += 1
        note = str(row.get("notes", "")).strip()
        if note:
            notes.append(f"{row.get('id')}: {note}")
    return ValidityReport(
        total=total, outcome_counts=outcome_counts, confusion=confusion, notes=notes
    )


def read_validity_file(path: Path) -> list[dict]:
    rows = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            if "_provenance" not in record:
                rows.append(record)
    return rows
