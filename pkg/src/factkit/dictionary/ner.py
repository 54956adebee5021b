"""Entity extraction and keyword pair queries.

The default recognizer is a deterministic, language-agnostic stand-in
for a learned NER model: maximal runs of capitalized tokens.  A
sentence-initial token only counts if the same surface recurs
capitalized mid-sentence elsewhere in the text, which keeps ordinary
sentence openers ("Both", "The") out of the entity set.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

from ..text import token_spans

_SENTENCE_ENDERS = set(".!?")


@dataclass(frozen=True)
class EntitySpan:
    surface: str
    start: int
    end: int
    tag: str | None = None


class EntityRecognizer(Protocol):
    def extract(self, text: str) -> list[EntitySpan]: ...


class CapitalizedRunRecognizer:
    """Maximal runs of capitalized tokens, deduplicated by surface."""

    def extract(self, text: str) -> list[EntitySpan]:
        spans = list(token_spans(text))
        if not spans:
            return []

        sentence_initial = []
        prev_end = 0
        for i, (_, start, _) in enumerate(spans):
            gap = text[prev_end:start]
            sentence_initial.append(i == 0 or any(c in _SENTENCE_ENDERS for c in gap))
            prev_end = spans[i][2]

        capitalized = [tok[0].isupper() for tok, _, _ in spans]
        mid_sentence_caps = {
            tok for i, (tok, _, _) in enumerate(spans)
            if capitalized[i] and not sentence_initial[i]
        }
        eligible = [
            capitalized[i]
            and (not sentence_initial[i] or spans[i][0] in mid_sentence_caps)
            for i in range(len(spans))
        ]

        entities: list[EntitySpan] = []
        seen: set[str] = set()
        i = 0
        while i < len(spans):
            if not eligible[i]:
                i += 1
                continue
            j = i
            # Extend the run while the gap between tokens is whitespace only,
            # so "Obama, Biden" stays two entities.
            while (
                j + 1 < len(spans)
                and eligible[j + 1]
                and text[spans[j][2] : spans[j + 1][1]].isspace()
            ):
                j += 1
            start, end = spans[i][1], spans[j][2]
            surface = text[start:end]
            if surface not in seen:
                seen.add(surface)
                entities.append(EntitySpan(surface=surface, start=start, end=end))
            i = j + 1
        return entities


def pair_queries(entities: list[EntitySpan], query_text: str) -> list[str]:
    """All unordered entity pairs as ``"A, B"`` keyword queries.

    Order is stable by first appearance.  Fallbacks: a single entity
    yields itself, no entities yield the raw query text.
    """
    surfaces = [e.surface for e in entities]
    if len(surfaces) >= 2:
        return [
            f"{surfaces[i]}, {surfaces[j]}"
            for i in range(len(surfaces))
            for j in range(i + 1, len(surfaces))
        ]
    if len(surfaces) == 1:
        return [surfaces[0]]
    return [query_text]
