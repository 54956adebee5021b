"""Dataset quality analytics: agreement measures and spurious-cue tables."""

from .agreement import (
    LabelMatrix,
    fleiss_kappa,
    krippendorff_alpha,
    matrix_from_rows,
)
from .cues import (
    CueStatistics,
    balanced_subsample,
    claim_cues,
    cue_stats,
    label_distribution,
)

__all__ = [
    "LabelMatrix",
    "fleiss_kappa",
    "krippendorff_alpha",
    "matrix_from_rows",
    "CueStatistics",
    "balanced_subsample",
    "claim_cues",
    "cue_stats",
    "label_distribution",
]
