"""Shared text primitives: tokenization, n-grams, sentence splitting.

One tokenizer is used everywhere (indexing, dictionaries, cue analysis,
input budgeting) so that token counts agree across modules.  Tokens are
Unicode alphanumeric runs; case is PRESERVED at this layer because cue
analysis treats case-differing tokens as distinct cues.  Retrieval
indexing folds case itself via :func:`fold`.
"""

from __future__ import annotations

import re
from collections.abc import Iterable, Iterator

# Alphanumeric runs, underscore excluded; \w is Unicode-aware in Python 3.
_TOKEN_RE = re.compile(r"[^\W_]+")

# Sentence boundary: terminal punctuation, whitespace, then an uppercase
# letter or a digit.  Deterministic by construction, no language model.
_SENT_BOUNDARY_RE = re.compile(r"[.!?]+[\"')\]]*\s+")


def tokenize(text: str) -> list[str]:
    """Split ``text`` into tokens, preserving case."""
    return _TOKEN_RE.findall(text)


def token_spans(text: str) -> Iterator[tuple[str, int, int]]:
    """Yield (token, start, end) character spans in document order."""
    for m in _TOKEN_RE.finditer(text):
        yield m.group(), m.start(), m.end()


def fold(tokens: Iterable[str]) -> list[str]:
    """Case-folded copy of ``tokens`` (used for retrieval indexing)."""
    return [t.casefold() for t in tokens]


def ngrams(tokens: list[str], order: int) -> list[str]:
    """Contiguous n-grams of the given order, joined by a single space."""
    if order == 1:
        return list(tokens)
    return [" ".join(tokens[i : i + order]) for i in range(len(tokens) - order + 1)]


def split_sentences(text: str) -> list[str]:
    """Split on [.!?] followed by whitespace and an upper-case letter.

    The terminal punctuation stays with its sentence.  Returns non-empty
    stripped sentences; a text with no boundary is a single sentence.
    """
    sentences: list[str] = []
    start = 0
    for m in _SENT_BOUNDARY_RE.finditer(text):
        nxt = m.end()
        if nxt < len(text) and (text[nxt].isupper() or text[nxt].isdigit()):
            piece = text[start : m.end()].strip()
            if piece:
                sentences.append(piece)
            start = nxt
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


def count_tokens(text: str) -> int:
    return sum(1 for _ in _TOKEN_RE.finditer(text))


def truncate_tokens(text: str, max_tokens: int) -> str:
    """Cut ``text`` after its ``max_tokens``-th token (raw slice, no padding)."""
    if max_tokens <= 0:
        return ""
    for i, m in enumerate(_TOKEN_RE.finditer(text)):
        if i == max_tokens - 1:
            return text[: m.end()]
    return text
