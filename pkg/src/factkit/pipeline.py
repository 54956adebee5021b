"""Full fact-verification evaluation: retrieve, partition, score, aggregate.

Retrieved paragraphs are packed greedily into consecutive splits bounded
by a token budget and a per-split document cap; each split is scored by
a pluggable NLI scorer and the split confidences are combined with
geometric rank weights,

    y_c = sum_i lambda^i * y_i_c / sum_i lambda^i,   i = 0 over splits,

so a single split passes through unchanged (the weights are normalized
by their own sum, which keeps the one-split case well defined).  The
predicted label is the argmax of the combined triple, ties resolving to
NEI.

Scoring modes: SE additionally requires the retrieved set to fully
cover at least one gold evidence set for a verifiable claim to count
as correct; NSE requires the label only.  NEI claims are label-only in
both modes.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import NamedTuple, Protocol

from .errors import UsageError
from .localization.records import LABELS, NEI, REFUTES, SUPPORTS, normalize_label
from .text import count_tokens, fold, tokenize, truncate_tokens

MODE_SE = "se"
MODE_NSE = "nse"
METRIC_ACCURACY = "accuracy"
METRIC_F1_MACRO = "f1_macro"

DEFAULT_MAX_INPUT = 512
DEFAULT_K_S = 2
DEFAULT_LAMBDA = 0.5
SEPARATOR_ALLOWANCE = 3

AGGREGATION_NOTE = (
    "split confidences are combined as sum(lambda^i * y_i) / sum(lambda^i) "
    "over splits i=0..l-1; normalizing by the weight sum keeps single-split "
    "claims well defined while preserving the geometric weighting ratios"
)


class ConfidenceTriple(NamedTuple):
    sup: float
    ref: float
    nei: float


class RetrievedDoc(NamedTuple):
    doc_id: str
    text: str
    score: float


class Retriever(Protocol):
    def retrieve(self, query: str, k: int) -> list[RetrievedDoc]: ...


class NliScorer(Protocol):
    def score_batch(
        self, pairs: Sequence[tuple[str, str]]
    ) -> list[ConfidenceTriple]: ...


@dataclass(frozen=True)
class EvidenceSplit:
    member_ids: tuple[str, ...]
    token_count: int
    truncated: bool


@dataclass
class EvalClaim:
    claim_id: str
    text: str
    label: str
    evidence_sets: list[frozenset[str]]

    @classmethod
    def from_record(cls, record: dict) -> "EvalClaim":
        return cls(
            claim_id=str(record["id"]),
            text=str(record["claim"]),
            label=normalize_label(record["label"]),
            evidence_sets=[frozenset(str(p) for p in s) for s in record.get("evidence", [])],
        )


def partition_splits(
    docs: Sequence[RetrievedDoc | tuple[str, str]],
    max_input: int = DEFAULT_MAX_INPUT,
    k_s: int = DEFAULT_K_S,
    reserved_tokens: int = 0,
) -> list[EvidenceSplit]:
    """Greedy consecutive packing of retrieval-ordered documents.

    A new split starts whenever adding the next document would exceed
    the token budget (``max_input`` minus ``reserved_tokens``) or the
    ``k_s`` member cap.  A document that alone exceeds the budget forms
    its own split with the truncated flag set -- the only case in which
    truncation occurs.  Empty retrieval yields an empty list.
    """
    if k_s < 1:
        raise UsageError(f"k_s must be >= 1, got {k_s}")
    budget = max_input - reserved_tokens
    if budget < 1:
        raise UsageError(
            f"reserved tokens {reserved_tokens} leave no budget of {max_input}"
        )
    splits: list[EvidenceSplit] = []
    members: list[str] = []
    members_tokens = 0
    for doc in docs:
        doc_id, text = doc[0], doc[1]
        n_tokens = count_tokens(text)
        if n_tokens > budget:
            if members:
                splits.append(EvidenceSplit(tuple(members), members_tokens, False))
                members, members_tokens = [], 0
            splits.append(EvidenceSplit((doc_id,), n_tokens, True))
            continue
        if members and (members_tokens + n_tokens > budget or len(members) >= k_s):
            splits.append(EvidenceSplit(tuple(members), members_tokens, False))
            members, members_tokens = [], 0
        members.append(doc_id)
        members_tokens += n_tokens
    if members:
        splits.append(EvidenceSplit(tuple(members), members_tokens, False))
    return splits


def aggregate(
    triples: Sequence[ConfidenceTriple | tuple[float, float, float]],
    lam: float = DEFAULT_LAMBDA,
) -> ConfidenceTriple:
    """Geometric-rank weighted average over splits (0^0 = 1 for lam=0)."""
    if not triples:
        raise UsageError("aggregate needs at least one confidence triple")
    if lam < 0:
        raise UsageError(f"lambda must be >= 0, got {lam}")
    total = [0.0, 0.0, 0.0]
    weight_sum = 0.0
    for i, triple in enumerate(triples):
        if len(triple) != 3:
            raise UsageError(f"confidence triple of length {len(triple)}")
        if any(v < 0 or v != v for v in triple):
            raise UsageError(f"confidences must be finite and >= 0: {triple}")
        w = 1.0 if (i == 0 and lam == 0.0) else lam**i
        weight_sum += w
        for c in range(3):
            total[c] += w * triple[c]
    return ConfidenceTriple(*(v / weight_sum for v in total))


def predict_label(triple: ConfidenceTriple) -> str:
    """Argmax of the triple; any tie for the max resolves to NEI."""
    best = max(triple)
    winners = [label for label, v in zip(LABELS, triple) if v == best]
    return winners[0] if len(winners) == 1 else NEI


def accuracy(confusion: dict[str, dict[str, int]]) -> float:
    total = sum(sum(row.values()) for row in confusion.values())
    if total == 0:
        return 0.0
    hits = sum(confusion.get(label, {}).get(label, 0) for label in LABELS)
    return hits / total


def f1_macro(confusion: dict[str, dict[str, int]]) -> float:
    scores = []
    for label in LABELS:
        tp = confusion.get(label, {}).get(label, 0)
        fp = sum(confusion.get(g, {}).get(label, 0) for g in LABELS if g != label)
        fn = sum(confusion.get(label, {}).get(p, 0) for p in LABELS if p != label)
        precision = tp / (tp + fp) if (tp + fp) else 0.0
        recall = tp / (tp + fn) if (tp + fn) else 0.0
        scores.append(
            2 * precision * recall / (precision + recall) if precision + recall else 0.0
        )
    return sum(scores) / len(scores)


# Negation markers for the test scorer; fixed and deliberately tiny.
_NEGATION_MARKERS = {"not", "no", "never", "none"}


class LexicalOverlapScorer:
    """Deterministic model-free scorer for tests and plumbing runs.

    Maps the case-folded token Jaccard overlap j of claim and context to
    a confidence triple: (j, 0, 1-j), with SUP and REF swapped when
    exactly one side carries a negation marker.
    """

    tag = "lexical-overlap-v1"

    def score_batch(self, pairs: Sequence[tuple[str, str]]) -> list[ConfidenceTriple]:
        out = []
        for claim, context in pairs:
            claim_tokens = set(fold(tokenize(claim)))
            context_tokens = set(fold(tokenize(context)))
            union = claim_tokens | context_tokens
            j = len(claim_tokens & context_tokens) / len(union) if union else 0.0
            negated = (bool(claim_tokens & _NEGATION_MARKERS)
                       != bool(context_tokens & _NEGATION_MARKERS))
            if negated:
                out.append(ConfidenceTriple(0.0, j, 1.0 - j))
            else:
                out.append(ConfidenceTriple(j, 0.0, 1.0 - j))
        return out


class RemoteScorer:
    """HTTP scorer client: POST {url}/score with a JSON pair batch."""

    def __init__(self, url: str, timeout: float = 60.0):
        self.url = url.rstrip("/")
        self.timeout = timeout
        self.tag = f"remote:{self.url}"

    def score_batch(self, pairs: Sequence[tuple[str, str]]) -> list[ConfidenceTriple]:
        import requests

        payload = {"pairs": [{"claim": c, "context": x} for c, x in pairs]}
        response = requests.post(f"{self.url}/score", json=payload, timeout=self.timeout)
        response.raise_for_status()
        scores = response.json()["scores"]
        return [ConfidenceTriple(*row) for row in scores]


@dataclass
class PipelineReport:
    mode: str
    metric: str
    ks: list[int]
    scores: dict[int, float]
    confusions: dict[int, dict[str, dict[str, int]]]
    errors: list[dict] = field(default_factory=list)
    evaluated: int = 0
    notes: str = AGGREGATION_NOTE

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "metric": self.metric,
            "ks": self.ks,
            "scores": {str(k): v for k, v in self.scores.items()},
            "confusions": {str(k): v for k, v in self.confusions.items()},
            "errors": self.errors,
            "evaluated": self.evaluated,
            "notes": self.notes,
        }

    def format_table(self) -> str:
        header = "k      " + "".join(f"{k:>10}" for k in self.ks)
        row = f"{self.metric}/{self.mode}" + "".join(
            f"{self.scores[k]:>10.2f}" for k in self.ks
        )
        return header + "\n" + row


def evaluate(
    claims: Sequence[EvalClaim],
    retriever: Retriever,
    scorer: NliScorer,
    ks: Sequence[int] = (1, 5, 10, 20),
    mode: str = MODE_NSE,
    metric: str = METRIC_ACCURACY,
    max_input: int = DEFAULT_MAX_INPUT,
    k_s: int = DEFAULT_K_S,
    lam: float = DEFAULT_LAMBDA,
) -> PipelineReport:
    if mode not in (MODE_SE, MODE_NSE):
        raise UsageError(f"mode must be 'se' or 'nse', got {mode!r}")
    if metric not in (METRIC_ACCURACY, METRIC_F1_MACRO):
        raise UsageError(f"metric must be 'accuracy' or 'f1_macro', got {metric!r}")
    ks = sorted(set(ks))
    if not ks or ks[0] < 1:
        raise UsageError(f"bad retrieval depths: {ks}")

    confusions = {
        k: {g: {p: 0 for p in LABELS} for g in LABELS} for k in ks
    }
    errors: list[dict] = []
    evaluated = 0
    for claim in claims:
        try:
            docs = retriever.retrieve(claim.text, max(ks))
            # Oversize claims keep a one-token context budget; everything
            # past it truncates, mirroring fixed-input scorers.
            reserved = min(count_tokens(claim.text) + SEPARATOR_ALLOWANCE, max_input - 1)
            texts = {d.doc_id: d.text for d in docs}
            budget = max_input - reserved
            triple_cache: dict[tuple[str, ...], ConfidenceTriple] = {}
            for k in ks:
                topk = docs[:k]
                splits = partition_splits(topk, max_input, k_s, reserved)
                if not splits:
                    combined = ConfidenceTriple(0.0, 0.0, 0.0)
                else:
                    missing = [s for s in splits if s.member_ids not in triple_cache]
                    if missing:
                        batch = []
                        for split in missing:
                            context = " ".join(texts[m] for m in split.member_ids)
                            if split.truncated:
                                context = truncate_tokens(context, budget)
                            batch.append((claim.text, context))
                        for split, triple in zip(missing, scorer.score_batch(batch)):
                            triple_cache[split.member_ids] = ConfidenceTriple(*triple)
                    combined = aggregate(
                        [triple_cache[s.member_ids] for s in splits], lam
                    )
                pred = predict_label(combined)
                retrieved_ids = {d.doc_id for d in topk}
                effective = pred
                if (
                    mode == MODE_SE
                    and claim.label in (SUPPORTS, REFUTES)
                    and pred == claim.label
                    and not any(s <= retrieved_ids for s in claim.evidence_sets)
                ):
                    effective = NEI  # right label, evidence not retrieved
                confusions[k][claim.label][effective] += 1
        except UsageError:
            raise
        except Exception as err:
            errors.append({"id": claim.claim_id, "reason": str(err)})
            continue
        evaluated += 1

    scorer_fn = accuracy if metric == METRIC_ACCURACY else f1_macro
    scores = {k: 100.0 * scorer_fn(confusions[k]) for k in ks}
    return PipelineReport(
        mode=mode,
        metric=metric,
        ks=list(ks),
        scores=scores,
        confusions=confusions,
        errors=errors,
        evaluated=evaluated,
    )
