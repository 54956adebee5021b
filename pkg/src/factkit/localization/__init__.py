"""Dataset localization: evidence pruning, MT abstraction, re-splits, NLI export."""

from .localize import (
    REASON_CLAIM_DROPPED,
    REASON_SET_MISSING,
    REASON_SET_UNMAPPED,
    leakage_warning,
    localize,
    resplit,
)
from .mt import (
    IdentityTranslator,
    TranslationCache,
    TranslationClient,
    TranslationResult,
    translate_claims,
)
from .nli import (
    OUTCOME_BAD_TRANSLATION,
    OUTCOME_NEI_IN_TARGET,
    OUTCOME_VALID,
    ValidityReport,
    build_nli_pairs,
    ingest_validity,
    read_validity_file,
    validity_sample,
)
from .records import (
    LABELS,
    NEI,
    REFUTES,
    SUPPORTS,
    DropReport,
    LocalizedClaim,
    NliPair,
    SourceClaim,
    normalize_label,
    parse_source_claim,
    read_alignment_tsv,
    read_localized_claims,
    read_source_claims,
    write_records,
)

__all__ = [
    "localize",
    "resplit",
    "leakage_warning",
    "REASON_CLAIM_DROPPED",
    "REASON_SET_MISSING",
    "REASON_SET_UNMAPPED",
    "IdentityTranslator",
    "TranslationCache",
    "TranslationClient",
    "TranslationResult",
    "translate_claims",
    "ValidityReport",
    "build_nli_pairs",
    "ingest_validity",
    "read_validity_file",
    "validity_sample",
    "OUTCOME_VALID",
    "OUTCOME_NEI_IN_TARGET",
    "OUTCOME_BAD_TRANSLATION",
    "LABELS",
    "NEI",
    "REFUTES",
    "SUPPORTS",
    "DropReport",
    "LocalizedClaim",
    "NliPair",
    "SourceClaim",
    "normalize_label",
    "parse_source_claim",
    "read_alignment_tsv",
    "read_localized_claims",
    "read_source_claims",
    "write_records",
]
