"""Claim record types and newline-delimited readers/writers.

Source claims follow the common shared-task shape: a label plus a list
of evidence sets, each set a list of (page title, sentence index) pairs.
The tolerant parser also accepts 4-element evidence rows (annotation
ids first) and plain ``[page, index]`` pairs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ValidationError

SUPPORTS = "SUPPORTS"
REFUTES = "REFUTES"
NEI = "NOT ENOUGH INFO"
LABELS = (SUPPORTS, REFUTES, NEI)

# Short aliases accepted on input.
_LABEL_ALIASES = {
    "SUPPORTS": SUPPORTS,
    "SUP": SUPPORTS,
    "REFUTES": REFUTES,
    "REF": REFUTES,
    "NOT ENOUGH INFO": NEI,
    "NEI": NEI,
}


def normalize_label(raw: str) -> str:
    label = _LABEL_ALIASES.get(str(raw).strip().upper())
    if label is None:
        raise ValidationError(f"unknown label {raw!r}")
    return label


@dataclass
class SourceClaim:
    claim_id: str
    text: str
    label: str
    evidence: list[list[tuple[str, int | None]]]  # sets of (page, sentence idx)

    def verifiable(self) -> bool:
        return self.label in (SUPPORTS, REFUTES)


@dataclass
class LocalizedClaim:
    claim_id: str
    text: str
    label: str
    evidence: list[list[str]]  # sets of target-page ids, sentence indexes dropped
    source_text: str | None = None
    split: str | None = None

    def verifiable(self) -> bool:
        return self.label in (SUPPORTS, REFUTES)

    def to_dict(self) -> dict:
        record = {
            "id": self.claim_id,
            "claim": self.text,
            "label": self.label,
            "evidence": self.evidence,
        }
        if self.source_text is not None:
            record["source_claim"] = self.source_text
        if self.split is not None:
            record["split"] = self.split
        return record


@dataclass
class NliPair:
    context: str
    query: str
    label: str
    provenance: str  # gold-evidence | sampled-NEI | source-paragraph

    def to_dict(self) -> dict:
        return {
            "context": self.context,
            "query": self.query,
            "label": self.label,
            "provenance": self.provenance,
        }


@dataclass
class DropReport:
    counts: dict[str, int] = field(default_factory=dict)

    def bump(self, reason: str, n: int = 1) -> None:
        self.counts[reason] = self.counts.get(reason, 0) + n

    def to_dict(self) -> dict:
        return dict(sorted(self.counts.items()))


def _parse_evidence_set(raw) -> list[tuple[str, int | None]]:
    out: list[tuple[str, int | None]] = []
    for row in raw:
        if isinstance(row, (list, tuple)):
            if len(row) == 4:  # [annotation id, evidence id, page, sentence]
                page, idx = row[2], row[3]
            elif len(row) == 2:
                page, idx = row
            elif len(row) == 1:
                page, idx = row[0], None
            else:
                raise ValidationError(f"bad evidence row: {row!r}")
        else:
            page, idx = row, None
        if page is None:
            continue
        out.append((str(page), None if idx is None else int(idx)))
    return out


def parse_source_claim(record: dict) -> SourceClaim:
    try:
        claim_id = str(record["id"])
        text = str(record["claim"])
        label = normalize_label(record["label"])
    except KeyError as err:
        raise ValidationError(f"claim record missing field {err.args[0]!r}") from err
    evidence = [_parse_evidence_set(s) for s in record.get("evidence", [])]
    evidence = [s for s in evidence if s]
    if label in (SUPPORTS, REFUTES) and not evidence:
        raise ValidationError(f"claim {claim_id}: verifiable label with no evidence")
    return SourceClaim(claim_id=claim_id, text=text, label=label, evidence=evidence)


def read_source_claims(path: Path) -> list[SourceClaim]:
    claims = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            if "_provenance" in record:
                continue
            try:
                claims.append(parse_source_claim(record))
            except ValidationError as err:
                raise ValidationError(f"{path}:{line_no}: {err}") from err
    return claims


def read_localized_claims(path: Path) -> list[LocalizedClaim]:
    claims = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            if "_provenance" in record:
                continue
            claims.append(
                LocalizedClaim(
                    claim_id=str(record["id"]),
                    text=str(record["claim"]),
                    label=normalize_label(record["label"]),
                    evidence=[[str(p) for p in s] for s in record.get("evidence", [])],
                    source_text=record.get("source_claim"),
                    split=record.get("split"),
                )
            )
    return claims


def write_records(path: Path, records: list[dict], provenance: dict | None = None) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        if provenance is not None:
            fh.write(json.dumps({"_provenance": provenance}, sort_keys=True) + "\n")
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")


def read_alignment_tsv(path: Path) -> dict[str, str]:
    """Two-column TSV: source page title -> target page title."""
    mapping: dict[str, str] = {}
    with Path(path).open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValidationError(f"{path}:{line_no}: expected 2 tab-separated fields")
            mapping[parts[0]] = parts[1]
    return mapping
