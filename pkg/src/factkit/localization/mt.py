"""Machine-translation client abstraction with caching and retries.

No engine is implemented here; engines plug in through
:class:`TranslationClient`.  The on-disk cache is keyed by
(engine tag, source text) which makes runs resumable and the whole
operation idempotent.
"""

from __future__ import annotations

import hashlib
import json
import sqlite3
import time
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

from .records import LocalizedClaim


class TranslationClient(Protocol):
    engine_tag: str

    def translate_batch(self, texts: Sequence[str]) -> list[str]: ...


class IdentityTranslator:
    """Pass-through client used by offline tests."""

    engine_tag = "identity"

    def translate_batch(self, texts: Sequence[str]) -> list[str]:
        return list(texts)


class TranslationCache:
    """SQLite-backed (engine, text) -> translation cache."""

    def __init__(self, path: Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._conn = sqlite3.connect(self.path)
        self._conn.execute(
            "CREATE TABLE IF NOT EXISTS translations ("
            "key TEXT PRIMARY KEY, engine TEXT, translation TEXT)"
        )
        self._conn.commit()

    @staticmethod
    def key(engine_tag: str, text: str) -> str:
        return hashlib.sha256(f"{engine_tag}\x00{text}".encode("utf-8")).hexdigest()

    def get(self, engine_tag: str, text: str) -> str | None:
        row = self._conn.execute(
            "SELECT translation FROM translations WHERE key = ?",
            (self.key(engine_tag, text),),
        ).fetchone()
        return row[0] if row else None

    def put(self, engine_tag: str, text: str, translation: str) -> None:
        self._conn.execute(
            "INSERT OR REPLACE INTO translations VALUES (?, ?, ?)",
            (self.key(engine_tag, text), engine_tag, translation),
        )
        self._conn.commit()

    def close(self) -> None:
        self._conn.close()


@dataclass
class TranslationResult:
    claims: list[LocalizedClaim]
    errors: list[dict] = field(default_factory=list)
    client_calls: int = 0
    cache_hits: int = 0

    def to_report(self) -> dict:
        return {
            "translated": len(self.claims),
            "errors": self.errors,
            "client_calls": self.client_calls,
            "cache_hits": self.cache_hits,
        }


def translate_claims(
    claims: list[LocalizedClaim],
    client: TranslationClient,
    cache: TranslationCache | None = None,
    batch_size: int = 32,
    max_retries: int = 3,
    backoff_seconds: float = 0.5,
    sleep: Callable[[float], None] = time.sleep,
) -> TranslationResult:
    """Translate claim texts in batches, preserving the source text.

    Cached texts never reach the client.  A batch that still fails after
    ``max_retries`` attempts produces per-claim error entries and the run
    continues; re-running with the same cache resumes where it left off.
    """
    result = TranslationResult(claims=[])
    pending: list[tuple[LocalizedClaim, str]] = []
    translations: dict[str, str] = {}

    for claim in claims:
        cached = cache.get(client.engine_tag, claim.text) if cache else None
        if cached is not None:
            translations[claim.claim_id] = cached
            result.cache_hits += 1
        else:
            pending.append((claim, claim.text))

    failed: dict[str, str] = {}
    for start in range(0, len(pending), batch_size):
        batch = pending[start : start + batch_size]
        texts = [text for _, text in batch]
        translated: list[str] | None = None
        error: Exception | None = None
        for attempt in range(max_retries):
            try:
                result.client_calls += 1
                translated = client.translate_batch(texts)
                break
            except Exception as err:  # client errors are data, run continues
                error = err
                if attempt + 1 < max_retries:
                    sleep(backoff_seconds * (2**attempt))
        if translated is None:
            for claim, _ in batch:
                failed[claim.claim_id] = str(error)
            continue
        if len(translated) != len(texts):
            raise ValueError(
                f"client returned {len(translated)} translations for {len(texts)} texts"
            )
        for (claim, text), out in zip(batch, translated):
            translations[claim.claim_id] = out
            if cache:
                cache.put(client.engine_tag, text, out)

    for claim in claims:
        if claim.claim_id in failed:
            result.errors.append({"id": claim.claim_id, "reason": failed[claim.claim_id]})
            continue
        result.claims.append(
            LocalizedClaim(
                claim_id=claim.claim_id,
                text=translations[claim.claim_id],
                label=claim.label,
                evidence=claim.evidence,
                source_text=claim.source_text if claim.source_text is not None else claim.text,
                split=claim.split,
            )
        )
    return result


def dump_result(result: TranslationResult, path: Path) -> None:
    Path(path).write_text(
        json.dumps(result.to_report(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
