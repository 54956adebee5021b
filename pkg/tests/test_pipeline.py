"""Split packing, weighted aggregation, SE/NSE evaluation."""

import random

import pytest

from factkit.errors import UsageError
from factkit.localization.records import NEI, REFUTES, SUPPORTS
from factkit.pipeline import (
    ConfidenceTriple,
    EvalClaim,
    LexicalOverlapScorer,
    RetrievedDoc,
    accuracy,
    aggregate,
    evaluate,
    f1_macro,
    partition_splits,
    predict_label,
)

LABELS = (SUPPORTS, REFUTES, NEI)


def doc(doc_id, n_tokens):
    return RetrievedDoc(doc_id, " ".join(f"w{i}" for i in range(n_tokens)), 1.0)


# -------------------------------------------------------------- partition ----


def test_greedy_packing_hand_trace():
    docs = [doc("d1", 200), doc("d2", 250), doc("d3", 300)]
    splits = partition_splits(docs, max_input=512, k_s=2)
    assert [s.member_ids for s in splits] == [("d1", "d2"), ("d3",)]
    assert [s.token_count for s in splits] == [450, 300]
    assert not any(s.truncated for s in splits)


def test_oversized_single_doc_truncated_own_split():
    splits = partition_splits([doc("big", 600)], max_input=512, k_s=2)
    assert len(splits) == 1
    assert splits[0].member_ids == ("big",)
    assert splits[0].truncated
    assert splits[0].token_count == 600


def test_ks_one_is_one_split_per_doc():
    docs = [doc(f"d{i}", 50) for i in range(4)]
    splits = partition_splits(docs, max_input=512, k_s=1)
    assert [s.member_ids for s in splits] == [("d0",), ("d1",), ("d2",), ("d3",)]


def test_empty_retrieval_empty_list():
    assert partition_splits([], max_input=512, k_s=2) == []


def test_reserved_tokens_shrink_budget():
    docs = [doc("d1", 200), doc("d2", 250)]
    splits = partition_splits(docs, max_input=512, k_s=2, reserved_tokens=100)
    assert [s.member_ids for s in splits] == [("d1",), ("d2",)]


def test_partition_covers_in_order_randomized():
    rng = random.Random(21)
    for _ in range(200):
        docs = [doc(f"d{i}", rng.randint(1, 700)) for i in range(rng.randint(0, 12))]
        k_s = rng.choice((1, 2, 3))
        splits = partition_splits(docs, max_input=512, k_s=k_s)
        flattened = [m for s in splits for m in s.member_ids]
        assert flattened == [d.doc_id for d in docs]  # coverage + order
        for s in splits:
            assert len(s.member_ids) <= k_s
            if not s.truncated:
                assert s.token_count <= 512
            else:
                assert len(s.member_ids) == 1


def test_ks_zero_rejected():
    with pytest.raises(UsageError):
        partition_splits([], max_input=512, k_s=0)


# -------------------------------------------------------------- aggregate ----


def test_single_split_identity():
    triple = ConfidenceTriple(0.2, 0.5, 0.3)
    assert aggregate([triple], lam=0.5) == triple


def test_two_split_hand_computation():
    got = aggregate([(1.0, 0.0, 0.0), (0.0, 1.0, 0.0)], lam=0.5)
    assert got.sup == pytest.approx(2 / 3, abs=1e-12)
    assert got.ref == pytest.approx(1 / 3, abs=1e-12)
    assert got.nei == pytest.approx(0.0, abs=1e-12)


def test_lambda_zero_keeps_first_split_only():
    got = aggregate([(0.1, 0.2, 0.7), (0.9, 0.05, 0.05)], lam=0.0)
    assert got == ConfidenceTriple(0.1, 0.2, 0.7)


def test_aggregate_scale_equivariant():
    rng = random.Random(9)
    triples = [tuple(rng.random() for _ in range(3)) for _ in range(4)]
    base = aggregate(triples, lam=0.5)
    scaled = aggregate([tuple(5.0 * v for v in t) for t in triples], lam=0.5)
    for a, b in zip(base, scaled):
        assert b == pytest.approx(5.0 * a, rel=1e-12)
    assert predict_label(base) == predict_label(scaled)


def test_aggregate_errors():
    with pytest.raises(UsageError):
        aggregate([])
    with pytest.raises(UsageError):
        aggregate([(1.0, -0.1, 0.0)])
    with pytest.raises(UsageError):
        aggregate([(1.0, 0.0)])


def test_predict_label_tie_goes_to_nei():
    assert predict_label(ConfidenceTriple(0.4, 0.4, 0.2)) == NEI
    assert predict_label(ConfidenceTriple(0.5, 0.2, 0.3)) == SUPPORTS
    assert predict_label(ConfidenceTriple(0.0, 0.0, 0.0)) == NEI


# ---------------------------------------------------------------- metrics ----


def conf(rows):
    return {g: {p: rows[i][j] for j, p in enumerate(LABELS)}
            for i, g in enumerate(LABELS)}


def test_diagonal_confusion_perfect_scores():
    c = conf([[5, 0, 0], [0, 4, 0], [0, 0, 3]])
    assert accuracy(c) == 1.0
    assert f1_macro(c) == 1.0


def test_never_predicted_class_f1_zero():
    c = conf([[5, 0, 0], [4, 0, 0], [0, 0, 3]])  # REFUTES never predicted
    per_class_sup_p = 5 / 9
    per_class_sup_r = 1.0
    f1_sup = 2 * per_class_sup_p * per_class_sup_r / (per_class_sup_p + per_class_sup_r)
    assert f1_macro(c) == pytest.approx((f1_sup + 0.0 + 1.0) / 3)


def test_fixture_matrix_matches_scalar_oracle():
    c = conf([[8, 1, 1], [2, 6, 2], [1, 1, 8]])
    assert accuracy(c) == pytest.approx(22 / 30)
    # scalar oracle per class
    expected = []
    for idx in range(3):
        tp = [[8, 1, 1], [2, 6, 2], [1, 1, 8]][idx][idx]
        col = sum([[8, 1, 1], [2, 6, 2], [1, 1, 8]][g][idx] for g in range(3))
        row = sum([[8, 1, 1], [2, 6, 2], [1, 1, 8]][idx])
        p = tp / col
        r = tp / row
        expected.append(2 * p * r / (p + r))
    assert f1_macro(c) == pytest.approx(sum(expected) / 3, abs=1e-12)


# ------------------------------------------------------------------ scorer ----


def test_lexical_scorer_overlap_and_negation():
    scorer = LexicalOverlapScorer()
    same, disjoint, negated = scorer.score_batch([
        ("the cat sat", "the cat sat"),
        ("the cat sat", "zebra quasar glacier"),
        ("the cat sat", "the cat did not sit"),
    ])
    assert same.sup == pytest.approx(1.0)
    assert disjoint.sup == 0.0 and disjoint.nei == 1.0
    assert negated.ref > 0 and negated.sup == 0.0


# ---------------------------------------------------------------- evaluate ----


class StubRetriever:
    def __init__(self, results):
        self.results = results

    def retrieve(self, query, k):
        return self.results.get(query, [])[:k]


class OracleScorer:
    """Scores by the gold label encoded in the claim text."""

    def score_batch(self, pairs):
        out = []
        for claim, _context in pairs:
            if "sup" in claim:
                out.append(ConfidenceTriple(1.0, 0.0, 0.0))
            elif "ref" in claim:
                out.append(ConfidenceTriple(0.0, 1.0, 0.0))
            else:
                out.append(ConfidenceTriple(0.0, 0.0, 1.0))
        return out


def eval_claims():
    return [
        EvalClaim("c1", "sup one", SUPPORTS, [frozenset({"g1"})]),
        EvalClaim("c2", "ref two", REFUTES, [frozenset({"g2"})]),
        EvalClaim("c3", "nei three", NEI, []),
    ]


def gold_retriever():
    return StubRetriever({
        "sup one": [doc("g1", 10)],
        "ref two": [doc("g2", 10)],
        "nei three": [doc("x", 10)],
    })


def test_perfect_oracle_with_gold_retrieved_se_equals_nse_100():
    claims = eval_claims()
    for mode in ("se", "nse"):
        report = evaluate(claims, gold_retriever(), OracleScorer(),
                          ks=(1,), mode=mode)
        assert report.scores[1] == pytest.approx(100.0)


def test_correct_label_without_coverage_counts_only_under_nse():
    claims = [EvalClaim("c1", "sup one", SUPPORTS, [frozenset({"gold-not-retrieved"})])]
    retriever = StubRetriever({"sup one": [doc("other", 10)]})
    nse = evaluate(claims, retriever, OracleScorer(), ks=(1,), mode="nse")
    se = evaluate(claims, retriever, OracleScorer(), ks=(1,), mode="se")
    assert nse.scores[1] == pytest.approx(100.0)
    assert se.scores[1] == pytest.approx(0.0)
    assert se.confusions[1][SUPPORTS][NEI] == 1  # miss recorded as NEI


def test_nei_claims_label_only_in_both_modes():
    claims = [EvalClaim("c1", "nei three", NEI, [])]
    retriever = StubRetriever({"nei three": [doc("anything", 5)]})
    for mode in ("se", "nse"):
        report = evaluate(claims, retriever, OracleScorer(), ks=(1,), mode=mode)
        assert report.scores[1] == pytest.approx(100.0)


def test_empty_retrieval_predicts_nei():
    claims = [EvalClaim("c1", "nei three", NEI, [])]
    report = evaluate(claims, StubRetriever({}), OracleScorer(), ks=(1, 5))
    assert report.scores[1] == pytest.approx(100.0)


def test_scorer_failure_excluded_with_report():
    class FailingScorer:
        def score_batch(self, pairs):
            raise RuntimeError("model fell over")

    claims = eval_claims()
    report = evaluate(claims, gold_retriever(), FailingScorer(), ks=(1,))
    assert report.evaluated == 0
    assert len(report.errors) == 3
    assert "model fell over" in report.errors[0]["reason"]


def random_evaluation(rng):
    labels = [SUPPORTS, REFUTES, NEI]
    claims = []
    results = {}
    for i in range(rng.randint(2, 10)):
        label = rng.choice(labels)
        text = f"{'sup' if label == SUPPORTS else 'ref' if label == REFUTES else 'nei'} q{i}"
        docs = [doc(f"d{i}-{j}", rng.randint(5, 60)) for j in range(rng.randint(0, 6))]
        gold_sets = []
        if label != NEI:
            if docs and rng.random() < 0.6:
                member = rng.choice(docs).doc_id
                gold_sets.append(frozenset({member}))
            else:
                gold_sets.append(frozenset({f"missing-{i}"}))
        claims.append(EvalClaim(f"c{i}", text, label, gold_sets))
        results[text] = docs
    return claims, StubRetriever(results)


class NoisyScorer:
    """Often right, sometimes wrong; deterministic per pair."""

    def score_batch(self, pairs):
        out = []
        for claim, context in pairs:
            h = hash((claim, context)) % 10
            if h < 7:
                scorer = OracleScorer()
                out.extend(scorer.score_batch([(claim, context)]))
            else:
                out.append(ConfidenceTriple(0.3, 0.4, 0.3))
        return out


def test_se_never_exceeds_nse_randomized():
    rng = random.Random(100)
    for trial in range(150):
        claims, retriever = random_evaluation(rng)
        metric = rng.choice(("accuracy", "f1_macro"))
        ks = (1, 3)
        nse = evaluate(claims, retriever, NoisyScorer(), ks=ks, mode="nse",
                       metric=metric)
        se = evaluate(claims, retriever, NoisyScorer(), ks=ks, mode="se",
                      metric=metric)
        for k in ks:
            assert se.scores[k] <= nse.scores[k] + 1e-9


def test_evaluate_deterministic():
    claims = eval_claims()
    a = evaluate(claims, gold_retriever(), LexicalOverlapScorer(), ks=(1, 5))
    b = evaluate(claims, gold_retriever(), LexicalOverlapScorer(), ks=(1, 5))
    assert a.to_dict() == b.to_dict()


def test_report_shape():
    report = evaluate(eval_claims(), gold_retriever(), OracleScorer(),
                      ks=(1, 5), mode="nse", metric="accuracy")
    payload = report.to_dict()
    assert set(payload["scores"]) == {"1", "5"}
    assert "notes" in payload
    table = report.format_table()
    assert "accuracy/nse" in table


def test_mode_metric_validation():
    with pytest.raises(UsageError):
        evaluate([], StubRetriever({}), OracleScorer(), mode="bad")
    with pytest.raises(UsageError):
        evaluate([], StubRetriever({}), OracleScorer(), metric="bad")
    with pytest.raises(UsageError):
        evaluate([], StubRetriever({}), OracleScorer(), ks=())
