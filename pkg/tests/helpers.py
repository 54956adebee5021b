"""Shared test helpers (fixtures proper live in conftest.py)."""

from __future__ import annotations

import json
import random
from pathlib import Path

from factkit.corpus import Article

DAY = 86400
BASE_TS = 1_600_000_000  # 2020-09-13T12:26:40Z

WORDS = (
    "government minister parliament economy inflation budget election senate "
    "court ruling treaty border crisis summit drought harvest festival opera "
    "museum railway airport strike union wage factory export import tariff "
    "flood earthquake rescue hospital vaccine outbreak league final striker "
    "coach referee stadium record champion voyage satellite launch orbit"
).split()

NAMES = (
    "Novak Marek Petra Jana Karel Lucie Tomas Eva Pavel Hana "
    "Ostrava Brno Plzen Liberec Olomouc Zlin Opava Trebic Kladno Most"
).split()


def synth_sentence(rng: random.Random) -> str:
    n = rng.randint(6, 12)
    words = [rng.choice(WORDS) for _ in range(n)]
    if rng.random() < 0.5:
        words.insert(rng.randrange(1, len(words)), rng.choice(NAMES))
    words[0] = words[0].capitalize()
    return " ".join(words) + "."


def synth_paragraph(rng: random.Random, sentences: int | None = None) -> str:
    count = sentences if sentences is not None else rng.randint(3, 6)
    return " ".join(synth_sentence(rng) for _ in range(count))


def synth_articles(n_articles: int, seed: int = 7, paragraphs: int = 3) -> list[Article]:
    rng = random.Random(seed)
    articles = []
    for i in range(n_articles):
        articles.append(
            Article(
                article_id=f"art{i:04d}",
                headline=f"{rng.choice(NAMES)} {rng.choice(WORDS)} {rng.choice(WORDS)}",
                published_at=BASE_TS + i * DAY,
                body=[synth_paragraph(rng) for _ in range(paragraphs)],
            )
        )
    return articles


def write_jsonl(path: Path, rows: list[dict]) -> Path:
    with path.open("w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")
    return path
