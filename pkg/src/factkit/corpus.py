"""Paragraph-granular corpus: ingestion, persistence and lookups.

Articles arrive as newline-delimited JSON records
(``{"id", "headline", "date", "paragraphs": [...]}``), are filtered
(duplicate and table-like articles dropped), then exploded into
paragraphs.  The headline is paragraph rank 0; body paragraphs are
ranked 1..n in order.  Every paragraph carries the article's publication
timestamp (UTC seconds), which downstream temporal filters rely on.

The store is an embedded SQLite file plus a JSON sidecar with counts and
a content digest; after the build it is opened read-only and is safe to
share across readers.
"""

from __future__ import annotations

import hashlib
import json
import re
import sqlite3
import threading
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .errors import NotFoundError, ValidationError
from .text import count_tokens

STATS_FILENAME = "stats.json"
DB_FILENAME = "corpus.sqlite"

# Characters counted as table markers alongside digits.
_TABLE_SEPARATORS = set(",;|:./-")
_WS_RE = re.compile(r"\s+")


@dataclass(frozen=True)
class Article:
    article_id: str
    headline: str
    published_at: int  # UTC seconds
    body: list[str]


@dataclass(frozen=True)
class Paragraph:
    paragraph_id: str
    article_id: str
    rank: int  # 0 = headline
    text: str
    published_at: int

    @staticmethod
    def make_id(article_id: str, rank: int) -> str:
        return f"{article_id}:{rank}"


@dataclass
class IngestConfig:
    max_digit_ratio: float = 0.5
    drop_duplicates: bool = True


@dataclass
class IngestReport:
    articles_ingested: int = 0
    paragraphs_stored: int = 0
    dropped: dict[str, int] = field(default_factory=dict)
    rejected_records: list[dict] = field(default_factory=list)

    def drop(self, reason: str) -> None:
        self.dropped[reason] = self.dropped.get(reason, 0) + 1


def parse_timestamp(value) -> int:
    """Normalize a record date to UTC seconds.

    Accepts epoch numbers, ISO dates (mapped to 00:00:00 UTC) and ISO
    datetimes; naive datetimes are taken as UTC.
    """
    if isinstance(value, (int, float)):
        return int(value)
    if not isinstance(value, str) or not value.strip():
        raise ValidationError(f"unparseable date: {value!r}")
    raw = value.strip().replace("Z", "+00:00")
    try:
        dt = datetime.fromisoformat(raw)
    except ValueError as err:
        raise ValidationError(f"unparseable date: {value!r}") from err
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp())


def digit_separator_ratio(text: str) -> float:
    """(digits + list separators) / non-whitespace characters."""
    total = 0
    marked = 0
    for ch in text:
        if ch.isspace():
            continue
        total += 1
        if ch.isdigit() or ch in _TABLE_SEPARATORS:
            marked += 1
    return marked / total if total else 0.0


def content_digest(article: Article) -> str:
    """Whitespace-normalized digest used for duplicate detection."""
    joined = "\n".join([article.headline, *article.body])
    normalized = _WS_RE.sub(" ", joined).strip()
    return hashlib.sha256(normalized.encode("utf-8")).hexdigest()


def article_paragraphs(article: Article) -> list[Paragraph]:
    """Explode an article into ranked paragraphs (rank 0 iff headline)."""
    out: list[Paragraph] = []
    headline = article.headline.strip()
    if headline:
        out.append(
            Paragraph(
                paragraph_id=Paragraph.make_id(article.article_id, 0),
                article_id=article.article_id,
                rank=0,
                text=headline,
                published_at=article.published_at,
            )
        )
    for i, raw in enumerate(article.body, start=1):
        text = raw.strip()
        if not text:
            continue
        out.append(
            Paragraph(
                paragraph_id=Paragraph.make_id(article.article_id, i),
                article_id=article.article_id,
                rank=i,
                text=text,
                published_at=article.published_at,
            )
        )
    return out


def parse_article_record(record: dict) -> Article:
    try:
        article_id = str(record["id"])
        headline = str(record.get("headline", "") or "")
        published_at = parse_timestamp(record["date"])
        body = [str(p) for p in record.get("paragraphs", [])]
    except KeyError as err:
        raise ValidationError(f"missing field {err.args[0]!r}") from err
    if not article_id:
        raise ValidationError("empty article id")
    return Article(article_id, headline, published_at, body)


def read_article_stream(path: Path) -> Iterator[tuple[int, dict | None, str | None]]:
    """Yield (line_no, record, error) triples from a JSONL file."""
    with path.open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                yield line_no, json.loads(line), None
            except json.JSONDecodeError as err:
                yield line_no, None, f"invalid json: {err}"


_SCHEMA = """
CREATE TABLE paragraphs (
    paragraph_id TEXT PRIMARY KEY,
    article_id   TEXT NOT NULL,
    rank         INTEGER NOT NULL,
    text         TEXT NOT NULL,
    published_at INTEGER NOT NULL,
    UNIQUE (article_id, rank)
);
CREATE INDEX idx_paragraphs_article ON paragraphs (article_id, rank);
"""


def ingest(
    articles: Iterable[Article | tuple[int, dict | None, str | None]],
    out_dir: Path,
    config: IngestConfig | None = None,
) -> "CorpusHandle":
    """Build a corpus store from an article stream.

    ``articles`` may be parsed :class:`Article` objects or the raw
    triples produced by :func:`read_article_stream`; malformed records
    are rejected per-record (with a reason in the report) and ingestion
    continues.  An unwritable output directory is fatal.
    """
    config = config or IngestConfig()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    db_path = out_dir / DB_FILENAME
    if db_path.exists():
        db_path.unlink()

    report = IngestReport()
    seen_digests: set[str] = set()
    seen_ids: set[str] = set()

    conn = sqlite3.connect(db_path)
    try:
        conn.executescript(_SCHEMA)
        token_count = 0
        for item in articles:
            if isinstance(item, Article):
                article = item
            else:
                line_no, record, error = item
                if error is not None:
                    report.rejected_records.append({"line": line_no, "reason": error})
                    continue
                try:
                    article = parse_article_record(record)
                except ValidationError as err:
                    report.rejected_records.append({"line": line_no, "reason": str(err)})
                    continue

            if article.article_id in seen_ids:
                report.rejected_records.append(
                    {"line": None, "reason": f"duplicate article id {article.article_id!r}"}
                )
                continue
            digest = content_digest(article)
            if config.drop_duplicates and digest in seen_digests:
                report.drop("duplicate_content")
                continue
            body_text = "\n".join([article.headline, *article.body])
            if digit_separator_ratio(body_text) > config.max_digit_ratio:
                report.drop("table_like")
                continue

            seen_ids.add(article.article_id)
            seen_digests.add(digest)
            paragraphs = article_paragraphs(article)
            conn.executemany(
                "INSERT INTO paragraphs VALUES (?, ?, ?, ?, ?)",
                [
                    (p.paragraph_id, p.article_id, p.rank, p.text, p.published_at)
                    for p in paragraphs
                ],
            )
            report.articles_ingested += 1
            report.paragraphs_stored += len(paragraphs)
            token_count += sum(count_tokens(p.text) for p in paragraphs)
        conn.commit()

        store_digest = _store_digest(conn)
        stats = {
            "_provenance": {
                "tool": "factkit",
                "command": "corpus ingest",
                "config": {
                    "max_digit_ratio": config.max_digit_ratio,
                    "drop_duplicates": config.drop_duplicates,
                },
            },
            "articles_ingested": report.articles_ingested,
            "paragraphs_stored": report.paragraphs_stored,
            "token_count": token_count,
            "dropped": dict(sorted(report.dropped.items())),
            "rejected_records": report.rejected_records,
            "digest": store_digest,
            "config": {
                "max_digit_ratio": config.max_digit_ratio,
                "drop_duplicates": config.drop_duplicates,
            },
        }
        (out_dir / STATS_FILENAME).write_text(
            json.dumps(stats, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    finally:
        conn.close()
    return CorpusHandle.open(out_dir)


def _store_digest(conn: sqlite3.Connection) -> str:
    h = hashlib.sha256()
    rows = conn.execute(
        "SELECT paragraph_id, article_id, rank, text, published_at "
        "FROM paragraphs ORDER BY article_id, rank"
    )
    for row in rows:
        h.update(json.dumps(row, ensure_ascii=False).encode("utf-8"))
        h.update(b"\n")
    return h.hexdigest()


class CorpusHandle:
    """Read-only view over a built corpus store.

    Safe to share across threads: each thread lazily opens its own
    read-only connection to the immutable store.
    """

    def __init__(self, db_path: Path, stats: dict, path: Path):
        self._db_path = db_path
        self._local = threading.local()
        self.stats = stats
        self.path = path

    @property
    def _conn(self) -> sqlite3.Connection:
        conn = getattr(self._local, "conn", None)
        if conn is None:
            conn = sqlite3.connect(f"file:{self._db_path}?mode=ro", uri=True)
            self._local.conn = conn
        return conn

    @classmethod
    def open(cls, directory: Path) -> "CorpusHandle":
        directory = Path(directory)
        db_path = directory / DB_FILENAME
        if not db_path.exists():
            raise NotFoundError(f"no corpus store at {directory}")
        stats = json.loads((directory / STATS_FILENAME).read_text(encoding="utf-8"))
        return cls(db_path, stats, directory)

    def close(self) -> None:
        conn = getattr(self._local, "conn", None)
        if conn is not None:
            conn.close()
            self._local.conn = None

    def __len__(self) -> int:
        (n,) = self._conn.execute("SELECT COUNT(*) FROM paragraphs").fetchone()
        return n

    @property
    def digest(self) -> str:
        return self.stats["digest"]

    def get_paragraph(self, paragraph_id: str) -> Paragraph:
        row = self._conn.execute(
            "SELECT paragraph_id, article_id, rank, text, published_at "
            "FROM paragraphs WHERE paragraph_id = ?",
            (paragraph_id,),
        ).fetchone()
        if row is None:
            raise NotFoundError(f"unknown paragraph {paragraph_id!r}")
        return Paragraph(*row)

    def __contains__(self, paragraph_id: str) -> bool:
        row = self._conn.execute(
            "SELECT 1 FROM paragraphs WHERE paragraph_id = ?", (paragraph_id,)
        ).fetchone()
        return row is not None

    def same_article_paragraphs(self, paragraph_id: str) -> list[Paragraph]:
        """All paragraphs of the paragraph's article, ascending rank."""
        member = self.get_paragraph(paragraph_id)
        rows = self._conn.execute(
            "SELECT paragraph_id, article_id, rank, text, published_at "
            "FROM paragraphs WHERE article_id = ? ORDER BY rank",
            (member.article_id,),
        ).fetchall()
        return [Paragraph(*row) for row in rows]

    def iter_paragraphs(self) -> Iterator[Paragraph]:
        """All paragraphs in stable (article_id, rank) order."""
        rows = self._conn.execute(
            "SELECT paragraph_id, article_id, rank, text, published_at "
            "FROM paragraphs ORDER BY article_id, rank"
        )
        for row in rows:
            yield Paragraph(*row)

    def paragraph_ids(self) -> list[str]:
        rows = self._conn.execute(
            "SELECT paragraph_id FROM paragraphs ORDER BY article_id, rank"
        ).fetchall()
        return [r[0] for r in rows]
