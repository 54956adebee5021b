"""Annotation service: tasks, labels, conflicts, cleaning folds, export."""

from .models import (
    Annotation,
    Claim,
    ConflictRecord,
    ERROR_TAGS,
    ExtractionTask,
    Fold,
    LabelingTask,
    MUTATION_INITIAL,
    MUTATION_TYPES,
    normalize_evidence_sets,
)
from .service import (
    AnnotationService,
    CorrectiveAnnotation,
    CROSS_ANNOTATION_TARGET,
    DEFAULT_LEASE_SECONDS,
    SCHEDULER_EPSILON,
    TASK_EXTRACTION,
    TASK_LABELING,
)
from .splits import group_stratified_splits, stratified_fold_splits
from .store import AnnotationStore

__all__ = [
    "Annotation",
    "Claim",
    "ConflictRecord",
    "ERROR_TAGS",
    "ExtractionTask",
    "Fold",
    "LabelingTask",
    "MUTATION_INITIAL",
    "MUTATION_TYPES",
    "normalize_evidence_sets",
    "AnnotationService",
    "CorrectiveAnnotation",
    "CROSS_ANNOTATION_TARGET",
    "DEFAULT_LEASE_SECONDS",
    "SCHEDULER_EPSILON",
    "TASK_EXTRACTION",
    "TASK_LABELING",
    "group_stratified_splits",
    "stratified_fold_splits",
    "AnnotationStore",
]
