"""Common ranking types and the pinned feature hash."""

from __future__ import annotations

from dataclasses import dataclass

# FNV-1a, 64 bit.  The offset basis doubles as the pinned hash seed; do
# not change either constant or persisted indexes become unreadable.
FNV64_OFFSET = 0xCBF29CE484222325
FNV64_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


def fnv1a64(data: str, seed: int = FNV64_OFFSET) -> int:
    h = seed
    for byte in data.encode("utf-8"):
        h ^= byte
        h = (h * FNV64_PRIME) & _MASK64
    return h


@dataclass(frozen=True)
class Ranking:
    """Descending-score result list for one query."""

    query_id: str
    items: list[tuple[str, float]]

    def doc_ids(self) -> list[str]:
        return [doc_id for doc_id, _ in self.items]

    def validate(self) -> None:
        scores = [s for _, s in self.items]
        if any(a < b for a, b in zip(scores, scores[1:])):
            raise ValueError(f"scores increase within ranking {self.query_id!r}")
        ids = self.doc_ids()
        if len(ids) != len(set(ids)):
            raise ValueError(f"duplicate documents in ranking {self.query_id!r}")


def top_k(scores: dict[str, float], k: int, query_id: str) -> Ranking:
    """Deterministic top-k: descending score, ties by ascending doc id."""
    ordered = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
    return Ranking(query_id=query_id, items=ordered[:k])
