"""SQLite persistence for the annotation service.

Single embedded transactional store; every mutation also appends to an
audit table.  A threading lock serializes writers, which is all the
concurrency a single-process service needs; readers go through the same
connection.
"""

from __future__ import annotations

import json
import sqlite3
import threading
from pathlib import Path

from .models import Annotation, Claim

_SCHEMA = """
CREATE TABLE IF NOT EXISTS preselection (
    paragraph_id TEXT PRIMARY KEY,
    decision     TEXT NOT NULL,
    curator      TEXT NOT NULL,
    decided_at   REAL NOT NULL
);
CREATE TABLE IF NOT EXISTS claims (
    claim_id            TEXT PRIMARY KEY,
    text                TEXT NOT NULL,
    source_paragraph_id TEXT NOT NULL,
    formulated_at       INTEGER NOT NULL,
    parent_claim_id     TEXT,
    mutation_type       TEXT NOT NULL,
    author              TEXT NOT NULL,
    created_at          REAL NOT NULL,
    traversed           INTEGER NOT NULL DEFAULT 0
);
CREATE TABLE IF NOT EXISTS annotations (
    annotation_id   TEXT PRIMARY KEY,
    claim_id        TEXT NOT NULL,
    annotator       TEXT NOT NULL,
    label           TEXT NOT NULL,
    evidence_json   TEXT NOT NULL,
    elapsed_seconds REAL,
    created_at      REAL NOT NULL,
    state           TEXT NOT NULL DEFAULT 'active'
);
CREATE TABLE IF NOT EXISTS leases (
    task_type   TEXT NOT NULL,
    resource_id TEXT NOT NULL,
    annotator   TEXT NOT NULL,
    expires_at  REAL NOT NULL,
    scope_json  TEXT,
    PRIMARY KEY (task_type, resource_id)
);
CREATE TABLE IF NOT EXISTS dictionaries (
    key          TEXT PRIMARY KEY,
    query        TEXT NOT NULL,
    ts           INTEGER NOT NULL,
    entries_json TEXT,
    status       TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS dict_queue (
    job_id INTEGER PRIMARY KEY AUTOINCREMENT,
    key    TEXT UNIQUE NOT NULL
);
CREATE TABLE IF NOT EXISTS conflicts (
    conflict_id         INTEGER PRIMARY KEY AUTOINCREMENT,
    claim_id            TEXT NOT NULL,
    annotation_ids_json TEXT NOT NULL,
    verdict             TEXT NOT NULL,
    error_tag           TEXT NOT NULL,
    resolver            TEXT NOT NULL,
    created_at          REAL NOT NULL
);
CREATE TABLE IF NOT EXISTS folds (
    fold_id    INTEGER PRIMARY KEY AUTOINCREMENT,
    seed       INTEGER NOT NULL,
    created_at REAL NOT NULL
);
CREATE TABLE IF NOT EXISTS fold_assignments (
    fold_id  INTEGER NOT NULL,
    claim_id TEXT NOT NULL,
    split    TEXT NOT NULL,
    PRIMARY KEY (fold_id, claim_id)
);
CREATE TABLE IF NOT EXISTS review_queue (
    fold_id     INTEGER NOT NULL,
    claim_id    TEXT NOT NULL,
    model_label TEXT NOT NULL,
    status      TEXT NOT NULL DEFAULT 'pending',
    PRIMARY KEY (fold_id, claim_id)
);
CREATE TABLE IF NOT EXISTS counters (
    name  TEXT PRIMARY KEY,
    value INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS audit (
    seq          INTEGER PRIMARY KEY AUTOINCREMENT,
    at           REAL NOT NULL,
    actor        TEXT NOT NULL,
    action       TEXT NOT NULL,
    payload_json TEXT NOT NULL
);
CREATE INDEX IF NOT EXISTS idx_annotations_claim ON annotations (claim_id);
CREATE INDEX IF NOT EXISTS idx_claims_parent ON claims (parent_claim_id);
"""


class AnnotationStore:
    def __init__(self, path: str | Path = ":memory:"):
        self.path = path
        self._conn = sqlite3.connect(str(path), check_same_thread=False)
        self._conn.execute("PRAGMA foreign_keys = ON")
        self._conn.executescript(_SCHEMA)
        self._conn.commit()
        self.lock = threading.RLock()

    def close(self) -> None:
        self._conn.close()

    @property
    def conn(self) -> sqlite3.Connection:
        return self._conn

    def next_id(self, name: str) -> int:
        with self.lock, self._conn:
            row = self._conn.execute(
                "SELECT value FROM counters WHERE name = ?", (name,)
            ).fetchone()
            value = (row[0] if row else 0) + 1
            self._conn.execute(
                "INSERT OR REPLACE INTO counters VALUES (?, ?)", (name, value)
            )
        return value

    def audit(self, at: float, actor: str, action: str, payload: dict) -> None:
        with self.lock, self._conn:
            self._conn.execute(
                "INSERT INTO audit (at, actor, action, payload_json) VALUES (?, ?, ?, ?)",
                (at, actor, action, json.dumps(payload, sort_keys=True)),
            )

    # -- row <-> record helpers -------------------------------------------

    @staticmethod
    def claim_from_row(row: tuple) -> Claim:
        return Claim(
            claim_id=row[0],
            text=row[1],
            source_paragraph_id=row[2],
            formulated_at=row[3],
            parent_claim_id=row[4],
            mutation_type=row[5],
            author=row[6],
            created_at=row[7],
        )

    CLAIM_COLUMNS = (
        "claim_id, text, source_paragraph_id, formulated_at, "
        "parent_claim_id, mutation_type, author, created_at"
    )

    @staticmethod
    def annotation_from_row(row: tuple) -> Annotation:
        return Annotation(
            annotation_id=row[0],
            claim_id=row[1],
            annotator=row[2],
            label=row[3],
            evidence_sets=json.loads(row[4]),
            elapsed_seconds=row[5],
            created_at=row[6],
            state=row[7],
        )

    ANNOTATION_COLUMNS = (
        "annotation_id, claim_id, annotator, label, evidence_json, "
        "elapsed_seconds, created_at, state"
    )
