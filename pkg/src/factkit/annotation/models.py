"""Domain records for the annotation service."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..dictionary.builder import KnowledgeScope
from ..errors import ValidationError
from ..localization.records import LABELS, NEI, normalize_label

MUTATION_INITIAL = "initial"
MUTATION_TYPES = (
    "rephrase",
    "negate",
    "substitute-similar",
    "substitute-dissimilar",
    "generalize",
    "specify",
    MUTATION_INITIAL,
)

ERROR_TAGS = (
    "exclusion-misassumption",
    "general",
    "reasoning",
    "extended-evidence",
    "insufficient-evidence",
    "none",
)

STATE_ACTIVE = "active"
STATE_RETRACTED = "retracted"
STATE_CORRECTIVE = "corrective"

SPLITS = ("train", "dev", "test")


@dataclass(frozen=True)
class Claim:
    claim_id: str
    text: str
    source_paragraph_id: str
    formulated_at: int  # equals the source paragraph's published_at
    parent_claim_id: str | None
    mutation_type: str
    author: str
    created_at: float

    def __post_init__(self) -> None:
        if self.mutation_type not in MUTATION_TYPES:
            raise ValidationError(f"unknown mutation type {self.mutation_type!r}")
        if (self.mutation_type == MUTATION_INITIAL) != (self.parent_claim_id is None):
            raise ValidationError("initial claims and only they have no parent")

    def to_dict(self) -> dict:
        return {
            "claim_id": self.claim_id,
            "text": self.text,
            "source_paragraph_id": self.source_paragraph_id,
            "formulated_at": self.formulated_at,
            "parent_claim_id": self.parent_claim_id,
            "mutation_type": self.mutation_type,
            "author": self.author,
        }


def normalize_evidence_sets(label: str, evidence_sets) -> list[list[str]]:
    """Validate and canonicalize evidence sets for a label.

    NEI must come with no evidence and verifiable labels with at least
    one set; sets are non-empty, deduplicated (as sets) and sorted for
    stable serialization.
    """
    label = normalize_label(label)
    sets: list[list[str]] = []
    seen: set[frozenset[str]] = set()
    for raw in evidence_sets or []:
        members = frozenset(str(p) for p in raw)
        if not members:
            raise ValidationError("evidence sets must be non-empty")
        if members in seen:
            continue
        seen.add(members)
        sets.append(sorted(members))
    if label == NEI and sets:
        raise ValidationError("NEI annotations carry no evidence")
    if label != NEI and not sets:
        raise ValidationError(f"{label} annotations need at least one evidence set")
    return sets


@dataclass(frozen=True)
class Annotation:
    annotation_id: str
    claim_id: str
    annotator: str
    label: str
    evidence_sets: list[list[str]]
    elapsed_seconds: float | None
    created_at: float
    state: str = STATE_ACTIVE

    @property
    def active(self) -> bool:
        return self.state != STATE_RETRACTED

    def to_dict(self) -> dict:
        return {
            "annotation_id": self.annotation_id,
            "claim_id": self.claim_id,
            "annotator": self.annotator,
            "label": self.label,
            "evidence_sets": self.evidence_sets,
            "elapsed_seconds": self.elapsed_seconds,
            "state": self.state,
        }


@dataclass(frozen=True)
class ConflictRecord:
    conflict_id: int
    claim_id: str
    annotation_ids: list[str]
    verdict: str
    error_tag: str
    resolver: str
    created_at: float

    def __post_init__(self) -> None:
        if self.error_tag not in ERROR_TAGS:
            raise ValidationError(f"unknown error tag {self.error_tag!r}")


@dataclass
class Fold:
    fold_id: int
    seed: int
    assignment: dict[str, str]

    def split_claims(self, split: str) -> list[str]:
        return sorted(c for c, s in self.assignment.items() if s == split)


@dataclass
class ExtractionTask:
    paragraph_id: str
    paragraph_text: str
    scope: KnowledgeScope
    resumed: bool = False  # an existing lease was returned, not a fresh draw


@dataclass
class LabelingTask:
    claim: Claim
    scope: KnowledgeScope
    resumed: bool = False


__all__ = [
    "Claim",
    "Annotation",
    "ConflictRecord",
    "Fold",
    "ExtractionTask",
    "LabelingTask",
    "normalize_evidence_sets",
    "MUTATION_TYPES",
    "MUTATION_INITIAL",
    "ERROR_TAGS",
    "STATE_ACTIVE",
    "STATE_RETRACTED",
    "STATE_CORRECTIVE",
    "SPLITS",
    "LABELS",
    "field",
]
