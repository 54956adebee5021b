"""Shared exception types.

Exit-code mapping used by the CLI: usage problems raise ``UsageError``
(exit 2), everything else below maps to a data error (exit 1).
"""


class FactkitError(Exception):
    """Base class for all toolkit errors."""


class UsageError(FactkitError):
    """Bad arguments or bad invocation (CLI exit code 2)."""


class NotFoundError(FactkitError):
    """A referenced record (paragraph, claim, annotation) does not exist."""


class ValidationError(FactkitError):
    """A submitted record violates an invariant."""


class EmptyCorpusError(FactkitError):
    """An index build was attempted over an empty corpus."""


class LeaseError(FactkitError):
    """Task submitted without an active lease, or lease is held elsewhere."""


class LabelConflictError(FactkitError):
    """Annotations for a claim have no strict-majority label."""

    def __init__(self, claim_id: str, labels: list[str]):
        super().__init__(f"label conflict for claim {claim_id}: {labels}")
        self.claim_id = claim_id
        self.labels = labels


class ExportBlockedError(FactkitError):
    """Dataset export refused because conflicts are unresolved."""

    def __init__(self, claim_ids: list[str]):
        super().__init__(
            f"export refused: {len(claim_ids)} claims with unresolved conflicts"
        )
        self.claim_ids = claim_ids


class UndefinedMetricError(FactkitError):
    """An agreement metric is undefined on the given input."""
