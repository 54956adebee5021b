"""Retrieval evaluation: MRR@k and TREC-style run files.

A query's gold set is the union of its evidence sets; the reciprocal
rank of the first gold member inside the top k counts (0 when absent),
and the mean over queries is reported as a percentage.
"""

from __future__ import annotations

from collections.abc import Collection, Iterable, Mapping
from pathlib import Path

from ..errors import UsageError, ValidationError
from .base import Ranking

DEFAULT_KS = (1, 5, 10, 20)


def mrr_at_k(
    rankings: Mapping[str, Ranking] | Iterable[Ranking],
    gold: Mapping[str, Collection[str]],
    ks: Iterable[int] = DEFAULT_KS,
) -> dict[int, float]:
    if not isinstance(rankings, Mapping):
        rankings = {r.query_id: r for r in rankings}
    ks = sorted(set(ks))
    if not rankings:
        raise UsageError("no rankings to evaluate")
    if any(k < 1 for k in ks):
        raise UsageError(f"cutoffs must be >= 1, got {ks}")

    totals = {k: 0.0 for k in ks}
    for qid, ranking in rankings.items():
        if qid not in gold:
            raise ValidationError(f"query {qid!r} has no gold entry")
        gold_set = set(gold[qid])
        first_hit = None
        for rank, doc_id in enumerate(ranking.doc_ids(), start=1):
            if doc_id in gold_set:
                first_hit = rank
                break
        for k in ks:
            if first_hit is not None and first_hit <= k:
                totals[k] += 1.0 / first_hit
    n = len(rankings)
    return {k: 100.0 * totals[k] / n for k in ks}


def write_run_file(path: Path, rankings: Iterable[Ranking]) -> None:
    """Write ``qid paragraph_id rank score`` lines."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for ranking in rankings:
            for rank, (doc_id, score) in enumerate(ranking.items, start=1):
                fh.write(f"{ranking.query_id}\t{doc_id}\t{rank}\t{score:.6f}\n")


def read_run_file(path: Path) -> dict[str, Ranking]:
    by_qid: dict[str, list[tuple[int, str, float]]] = {}
    with Path(path).open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 4:
                raise ValidationError(f"{path}:{line_no}: expected 4 fields")
            qid, doc_id, rank, score = parts
            by_qid.setdefault(qid, []).append((int(rank), doc_id, float(score)))
    out: dict[str, Ranking] = {}
    for qid, rows in by_qid.items():
        rows.sort()
        out[qid] = Ranking(query_id=qid, items=[(d, s) for _, d, s in rows])
    return out
