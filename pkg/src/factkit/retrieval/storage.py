"""Versioned binary persistence for retrieval indexes.

Layout: 8-byte magic, u16 format version, u16 kind-string length, kind
string, then a protocol-4 pickle of the index payload.  Loading checks
magic, version and kind before unpickling.
"""

from __future__ import annotations

import pickle
import struct
from pathlib import Path

from ..errors import ValidationError

MAGIC = b"FKIDX\x00\x00\x01"
VERSION = 1

KIND_TFIDF = "tfidf"
KIND_BM25 = "bm25"
KIND_EMBEDDING = "embedding"


def save_index(path: Path, kind: str, payload: object) -> None:
    kind_bytes = kind.encode("ascii")
    with Path(path).open("wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<HH", VERSION, len(kind_bytes)))
        fh.write(kind_bytes)
        fh.write(pickle.dumps(payload, protocol=4))


def load_index(path: Path, expected_kind: str | None = None) -> tuple[str, object]:
    with Path(path).open("rb") as fh:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise ValidationError(f"{path}: not a factkit index file")
        version, kind_len = struct.unpack("<HH", fh.read(4))
        if version != VERSION:
            raise ValidationError(f"{path}: unsupported index version {version}")
        kind = fh.read(kind_len).decode("ascii")
        if expected_kind is not None and kind != expected_kind:
            raise ValidationError(
                f"{path}: expected {expected_kind!r} index, found {kind!r}"
            )
        return kind, pickle.load(fh)
