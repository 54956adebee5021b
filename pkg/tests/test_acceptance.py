"""Acceptance suite: one test per acceptance criterion.

Each test prints a single ``ACCEPTANCE <name>: PASS`` line (visible with
``pytest -s``) and enforces its runtime budget.  Everything runs
headless: the deterministic hashing embedder and the lexical-overlap
scorer stand in for neural models.
"""

from __future__ import annotations

import itertools
import random
import time
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest

from factkit.analysis import (
    CueStatistics,
    LabelMatrix,
    balanced_subsample,
    cue_stats,
    fleiss_kappa,
    krippendorff_alpha,
)
from factkit.annotation import AnnotationService, AnnotationStore
from factkit.dictionary import DictionaryBuilder, DictionaryParams, pair_queries
from factkit.dictionary.clustering import round_robin_select
from factkit.dictionary.ner import CapitalizedRunRecognizer
from factkit.localization import SourceClaim, localize, resplit, build_nli_pairs
from factkit.localization.records import NEI, REFUTES, SUPPORTS, LocalizedClaim
from factkit.pipeline import (
    ConfidenceTriple,
    EvalClaim,
    LexicalOverlapScorer,
    RetrievedDoc,
    aggregate,
    evaluate,
    partition_splits,
)
from factkit.retrieval import (
    Ranking,
    build_bm25_docs,
    build_embedding_index_docs,
    build_tfidf_docs,
    grid_search_bm25,
    grid_search_bm25_table,
    mrr_at_k,
    tfidf_rank,
    HashingEmbedder,
)
from factkit.text import split_sentences

from helpers import BASE_TS, NAMES, WORDS

LABELS = (SUPPORTS, REFUTES, NEI)


class budget:
    """Context manager asserting a wall-clock budget and printing a verdict."""

    def __init__(self, name: str, seconds: float):
        self.name = name
        self.seconds = seconds

    def __enter__(self):
        self.start = time.monotonic()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.monotonic() - self.start
        if exc_type is None:
            assert elapsed < self.seconds, (
                f"{self.name}: took {elapsed:.2f}s, budget {self.seconds}s"
            )
            print(f"ACCEPTANCE {self.name}: PASS ({elapsed:.2f}s)")
        else:
            print(f"ACCEPTANCE {self.name}: FAIL")
        return False


# ----------------------------------------------------------- cue metrics ----


def test_acceptance_cue_metrics():
    with budget("cue-metrics", 5.0):
        rng = random.Random(300)
        vocab = ["není", "pouze", "je", "v", "V", "se", "na", "byl", "roce",
                 "filmu", "nachází", "narodil"]
        claims = []
        for i in range(300):
            label = LABELS[i % 3]
            words = [rng.choice(vocab) for _ in range(rng.randint(4, 9))]
            if label == REFUTES and rng.random() < 0.7:
                words.insert(0, "není")
            claims.append((" ".join(words) + ".", label))
        labels = [label for _, label in claims]

        sub_rng = random.Random(17)
        subsamples = [balanced_subsample(labels, sub_rng) for _ in range(10)]

        for order in (1, 2):
            got = cue_stats(claims, order=order, subsample_indices=subsamples)

            # Brute-force counting oracle over the same fixed subsamples.
            from factkit.analysis.cues import claim_cues

            cue_sets = [claim_cues(text, order) for text, _ in claims]
            acc: dict[str, dict] = {}
            for indices in subsamples:
                universe = set()
                for i in indices:
                    universe |= cue_sets[i]
                for cue in universe:
                    with_cue = [i for i in indices if cue in cue_sets[i]]
                    per_label = Counter(labels[i] for i in with_cue)
                    p = max(per_label.values()) / len(with_cue)
                    c = len(with_cue) / len(indices)
                    slot = acc.setdefault(cue, {"p": 0.0, "c": 0.0, "n": 0})
                    slot["p"] += p
                    slot["c"] += c
                    slot["n"] += 1
            assert {s.cue for s in got} == set(acc)
            for s in got:
                slot = acc[s.cue]
                assert abs(s.productivity - slot["p"] / slot["n"]) <= 1e-9
                assert abs(s.coverage - slot["c"] / slot["n"]) <= 1e-9
                p, c = s.productivity, s.coverage
                expected_h = 2 * p * c / (p + c) if p + c else 0.0
                assert abs(s.harmonic_mean - expected_h) <= 1e-9

        # A high-productivity, low-coverage negation cue rounds to 0.04.
        stat = CueStatistics(cue="není", order=1, majority_label=REFUTES,
                             productivity=0.91, coverage=0.02)
        assert abs(stat.harmonic_mean - 0.04) < 0.005


# ------------------------------------------------------------- agreement ----


def test_acceptance_agreement():
    with budget("agreement", 1.0):
        unanimous = LabelMatrix([[SUPPORTS, SUPPORTS, SUPPORTS]] * 6)
        assert krippendorff_alpha(unanimous) == 1.0

        def alpha_oracle(rows):
            units = [[v for v in row if v is not None] for row in rows]
            units = [u for u in units if len(u) >= 2]
            pooled = [v for u in units for v in u]
            n = len(pooled)
            d_o = 0.0
            for u in units:
                m = len(u)
                for i in range(m):
                    for j in range(m):
                        if i != j and u[i] != u[j]:
                            d_o += 1.0 / (m - 1)
            d_o /= n
            if d_o == 0.0:
                return 1.0
            d_e = sum(
                1.0
                for i in range(n)
                for j in range(n)
                if i != j and pooled[i] != pooled[j]
            ) / (n * (n - 1))
            return 1.0 - d_o / d_e

        def kappa_oracle(rows):
            cats = sorted({v for row in rows for v in row})
            n, m = len(rows), len(rows[0])
            totals = {c: 0 for c in cats}
            p_sum = 0.0
            for row in rows:
                counts = {c: row.count(c) for c in cats}
                for c in cats:
                    totals[c] += counts[c]
                p_sum += (sum(v * v for v in counts.values()) - m) / (m * (m - 1))
            p_bar = p_sum / n
            p_e = sum((totals[c] / (n * m)) ** 2 for c in cats)
            return 1.0 if p_e == 1.0 else (p_bar - p_e) / (1 - p_e)

        rng = random.Random(2024)
        for trial in range(10):
            rows = [[rng.choice(LABELS) for _ in range(3)] for _ in range(20)]
            assert abs(fleiss_kappa(LabelMatrix(rows)) - kappa_oracle(rows)) <= 1e-9
            with_missing = [list(row) for row in rows]
            for row in with_missing:
                if rng.random() < 0.3:
                    row[rng.randrange(3)] = None
            assert abs(
                krippendorff_alpha(LabelMatrix(with_missing))
                - alpha_oracle(with_missing)
            ) <= 1e-9


# -------------------------------------------------------------- retrieval ----


def test_acceptance_retrieval():
    with budget("retrieval", 10.0):
        # Hashed TF-IDF equals exact TF-IDF on a collision-free fixture.
        import math
        from factkit.retrieval import features
        from factkit.retrieval.tfidf import bucket_of

        docs = [
            ("d1", "the cat sat on the mat", 0),
            ("d2", "a zebra grazed on the open plain", 0),
            ("d3", "the dog chased the cat around the garden", 0),
        ]
        buckets = 1 << 20
        feats = set()
        for _, text, _ in docs:
            feats.update(features(text))
        assert len({bucket_of(f, buckets) for f in feats}) == len(feats)

        index = build_tfidf_docs(docs, buckets=buckets)
        doc_features = {d: Counter(features(t)) for d, t, _ in docs}
        df = Counter()
        for counts in doc_features.values():
            df.update(counts.keys())
        for query in ("the cat", "zebra grazed", "dog around garden"):
            got = dict(tfidf_rank(index, query, k=3).items)
            q_counts = Counter(features(query))
            for doc_id, counts in doc_features.items():
                expected = 0.0
                for term, qtf in q_counts.items():
                    if term in counts:
                        idf = math.log((len(docs) + 1) / (df[term] + 1))
                        expected += (math.log1p(qtf) * idf) * (
                            math.log1p(counts[term]) * idf
                        )
                if expected > 0:
                    assert abs(got[doc_id] - expected) <= 1e-12
                else:
                    assert doc_id not in got

        # MRR on the 10-query hand-computed fixture, exact.
        def ranking_with_gold_at(qid, rank, depth=20):
            items = []
            for position in range(1, depth + 1):
                doc = f"{qid}-gold" if position == rank else f"{qid}-n{position}"
                items.append((doc, float(depth - position)))
            return Ranking(query_id=qid, items=items)

        gold_ranks = [1, 2, 3, 5, 7, 10, 12, None, 4, 6]
        rankings = {}
        gold = {}
        for i, rank in enumerate(gold_ranks):
            rankings[f"q{i}"] = ranking_with_gold_at(f"q{i}", rank)
            gold[f"q{i}"] = {f"q{i}-gold"}
        result = mrr_at_k(rankings, gold)
        for k in (1, 5, 10, 20):
            expected = float(
                sum(Fraction(1, r) for r in gold_ranks if r is not None and r <= k)
                / len(gold_ranks) * 100
            )
            assert result[k] == pytest.approx(expected, abs=1e-12)

        # MRR monotone in k on 100 random fixtures.
        rng = random.Random(55)
        for _ in range(100):
            rankings = {}
            gold = {}
            for i in range(rng.randint(1, 6)):
                rank = rng.choice([None, *range(1, 21)])
                rankings[f"q{i}"] = ranking_with_gold_at(f"q{i}", rank)
                gold[f"q{i}"] = {f"q{i}-gold"}
            values = mrr_at_k(rankings, gold)
            ordered = [values[k] for k in (1, 5, 10, 20)]
            assert all(a <= b + 1e-12 for a, b in zip(ordered, ordered[1:]))

        # Grid search returns the exhaustive argmax.
        bm_docs = [
            ("s0", "zebra note"),
            ("l0", "zebra zebra pad pen ink"),
            ("s1", "quasar mark"),
            ("l1", "quasar quasar desk lamp chair"),
            ("f0", "alpha beta gamma delta epsilon eta theta iota kappa"),
            ("f1", "voyage north south east west summit ridge valley peak"),
        ]
        bm_index = build_bm25_docs(bm_docs)
        queries = {"q0": "zebra", "q1": "quasar"}
        bm_gold = {"q0": {"s0"}, "q1": {"s1"}}
        table = grid_search_bm25_table(bm_index, queries, bm_gold)
        best = grid_search_bm25(bm_index, queries, bm_gold)
        assert table[best] == max(table.values())
        assert best == min(p for p, v in table.items() if v == table[best])


# -------------------------------------------------------------- dictionary ----


def _dictionary_fixture_docs(n=200, seed=4):
    rng = random.Random(seed)
    docs = []
    for i in range(n):
        name_a, name_b = rng.choice(NAMES), rng.choice(NAMES)
        words = [rng.choice(WORDS) for _ in range(rng.randint(6, 14))]
        words.insert(1, name_a)
        words.insert(3, name_b)
        text = " ".join(words).capitalize() + "."
        docs.append((f"p{i:04d}", text, BASE_TS + (i - n // 2) * 3600))
    return docs


def test_acceptance_dictionary():
    with budget("dictionary", 30.0):
        recognizer = CapitalizedRunRecognizer()
        entities = recognizer.extract("Both Obama and Biden visited Germany.")
        assert pair_queries(entities, "x") == [
            "Obama, Biden",
            "Obama, Germany",
            "Biden, Germany",
        ]

        docs = _dictionary_fixture_docs()
        embedder = HashingEmbedder(dim=32)
        builder = DictionaryBuilder(
            corpus=None,
            tfidf_index=build_tfidf_docs(docs, buckets=1 << 18),
            embedding_index=build_embedding_index_docs(docs, embedder),
            embedder=embedder,
            params=DictionaryParams(n_kw=4, n_pre=1024, k=2, n_sem=4, seed=0),
        )
        stamps = {d: ts for d, _, ts in docs}
        rng = random.Random(1000)
        for _ in range(1000):
            q = (f"{rng.choice(NAMES)} and {rng.choice(NAMES)} "
                 f"{rng.choice(WORDS)} {rng.choice(WORDS)}.")
            ts = BASE_TS + rng.randint(-110, 110) * 3600
            d = builder.build(q, ts)
            ids = d.paragraph_ids()
            assert len(ids) <= 8
            assert len(ids) == len(set(ids))
            for entry in d.entries():
                assert entry.published_at < ts
                assert stamps[entry.paragraph_id] < ts

        # Cluster round-robin against the brute-force oracle, 10-point fixtures.
        oracle_rng = random.Random(77)
        for _ in range(50):
            sims = np.array([round(oracle_rng.random(), 6) for _ in range(10)])
            cut = oracle_rng.randint(1, 9)
            members = [list(range(cut)), list(range(cut, 10))]
            n_target = oracle_rng.randint(1, 10)
            picks = round_robin_select(members, sims, n_target)
            pools = [sorted(members[0], key=lambda i: (-sims[i], i)),
                     sorted(members[1], key=lambda i: (-sims[i], i))]
            expected = []
            while len(expected) < n_target and (pools[0] or pools[1]):
                for pool in pools:
                    if pool and len(expected) < n_target:
                        expected.append(pool.pop(0))
            assert picks == expected


# ------------------------------------------------------------ localization ----


def test_acceptance_localization():
    with budget("localization", 5.0):
        alignment = {"PageA": "StranaA", "PageB": "StranaB", "PageC": "StranaC"}
        target = {"StranaA", "StranaB"}
        claims = []
        for i in range(10):
            claims.append(SourceClaim(f"g0-{i}", f"t{i}", SUPPORTS,
                                      [[("PageA", i)]]))
        for i in range(10):
            claims.append(SourceClaim(f"g1-{i}", f"t{i}", REFUTES,
                                      [[("PageX", 0)], [("PageA", i)]]))
        for i in range(10):
            claims.append(SourceClaim(f"g2-{i}", f"t{i}", SUPPORTS,
                                      [[("PageC", i)]]))
        for i in range(10):
            claims.append(SourceClaim(f"g3-{i}", f"t{i}", NEI, []))
        for i in range(10):
            claims.append(SourceClaim(f"g4-{i}", f"t{i}", SUPPORTS,
                                      [[("PageA", 0), ("PageB", i)]]))
        kept, report = localize(claims, alignment, target)
        assert len(kept) == 40
        assert report.counts == {
            "evidence_set_unmapped_page": 10,
            "evidence_set_missing_in_target": 10,
            "claim_no_surviving_evidence": 10,
            "claims_kept": 40,
        }

        # Re-split: exact per-class counts, no duplicates, 100 seeds.
        pool = []
        for label, prefix, count in ((SUPPORTS, "s", 30), (REFUTES, "r", 25),
                                     (NEI, "n", 35)):
            for i in range(count):
                pool.append(LocalizedClaim(
                    claim_id=f"{prefix}{i}", text="t", label=label,
                    evidence=[["StranaA"]] if label != NEI else [],
                ))
        for seed in range(100):
            assignment = resplit(pool, dev_per_class=3, test_per_class=4, seed=seed)
            assert len(assignment) == len(pool)  # every claim exactly once
            per = Counter()
            for claim in pool:
                per[(claim.label, assignment[claim.claim_id])] += 1
            for label in LABELS:
                assert per[(label, "dev")] == 3
                assert per[(label, "test")] == 4

        # NEI NLI contexts: always 3-5 sentences.
        pages = {
            "StranaA": " ".join(f"Sentence number {i} stands alone." for i in range(12)),
        }
        nei_claims = [
            LocalizedClaim(claim_id=f"n{i}", text="sentence stands", label=NEI,
                           evidence=[])
            for i in range(200)
        ]
        pairs, report = build_nli_pairs(
            nei_claims, pages, lambda q, k: ["StranaA"][:k], random.Random(12)
        )
        assert len(pairs) == 200
        for pair in pairs:
            assert 3 <= len(split_sentences(pair.context)) <= 5


# --------------------------------------------------------------- pipeline ----


def test_acceptance_pipeline():
    with budget("pipeline", 10.0):
        triple = ConfidenceTriple(0.25, 0.6, 0.15)
        assert aggregate([triple], lam=0.5) == triple

        combined = aggregate([(1.0, 0.0, 0.0), (0.0, 1.0, 0.0)], lam=0.5)
        assert abs(combined.sup - 2 / 3) <= 1e-12
        assert abs(combined.ref - 1 / 3) <= 1e-12
        assert abs(combined.nei) <= 1e-12

        # SE <= NSE over 1,000 randomized evaluations.
        class HashScorer:
            def score_batch(self, pairs):
                out = []
                for claim, context in pairs:
                    h = (len(claim) * 31 + len(context) * 17) % 10
                    if h < 4:
                        out.append(ConfidenceTriple(1.0, 0.0, 0.0))
                    elif h < 7:
                        out.append(ConfidenceTriple(0.0, 1.0, 0.0))
                    else:
                        out.append(ConfidenceTriple(0.1, 0.1, 0.8))
                return out

        class MapRetriever:
            def __init__(self, results):
                self.results = results

            def retrieve(self, query, k):
                return self.results.get(query, [])[:k]

        rng = random.Random(4242)
        for trial in range(1000):
            claims = []
            results = {}
            for i in range(rng.randint(1, 5)):
                label = rng.choice(LABELS)
                text = f"claim {trial} {i} " + " ".join(
                    rng.choice(WORDS) for _ in range(rng.randint(2, 6))
                )
                docs = [
                    RetrievedDoc(f"d{i}-{j}",
                                 " ".join(rng.choice(WORDS)
                                          for _ in range(rng.randint(4, 40))),
                                 1.0)
                    for j in range(rng.randint(0, 5))
                ]
                gold_sets = []
                if label != NEI:
                    if docs and rng.random() < 0.5:
                        gold_sets.append(frozenset({rng.choice(docs).doc_id}))
                    else:
                        gold_sets.append(frozenset({f"absent-{i}"}))
                claims.append(EvalClaim(f"c{i}", text, label, gold_sets))
                results[text] = docs
            retriever = MapRetriever(results)
            metric = rng.choice(("accuracy", "f1_macro"))
            ks = (1, 3)
            nse = evaluate(claims, retriever, HashScorer(), ks=ks, mode="nse",
                           metric=metric)
            se = evaluate(claims, retriever, HashScorer(), ks=ks, mode="se",
                          metric=metric)
            for k in ks:
                assert se.scores[k] <= nse.scores[k] + 1e-9

        # Partition: order and coverage on randomized doc-length fixtures.
        for trial in range(300):
            docs = [
                RetrievedDoc(f"d{j}",
                             " ".join(f"t{j}x{i}" for i in range(rng.randint(1, 700))),
                             1.0)
                for j in range(rng.randint(0, 10))
            ]
            for k_s in (1, 2, 3):
                splits = partition_splits(docs, max_input=512, k_s=k_s)
                flat = [m for s in splits for m in s.member_ids]
                assert flat == [d.doc_id for d in docs]
                for s in splits:
                    assert len(s.member_ids) <= k_s
                    if s.truncated:
                        assert len(s.member_ids) == 1
                        assert s.token_count > 512
                    else:
                        assert s.token_count <= 512


# ------------------------------------------------------ annotation service ----


def _label_for(claim_id: str) -> str:
    return LABELS[sum(map(ord, claim_id)) % 3]


def test_acceptance_annotation_service(corpus):
    with budget("annotation-service", 60.0):
        service = AnnotationService(
            AnnotationStore(":memory:"), corpus, dictionary_builder=None, seed=99
        )
        annotators = [f"ann{i:02d}" for i in range(20)]

        for pid in corpus.paragraph_ids():
            service.preselect(pid, "accept", "curator")

        # T1a + T1b: every annotator extracts claims until the pool dries up.
        claim_count = 0
        for annotator in itertools.cycle(annotators):
            task = service.next_extraction_task(annotator)
            if task is None:
                break
            claim = service.submit_claim(
                annotator, task.paragraph_id, f"Initial claim {claim_count}."
            )
            service.submit_mutations(
                annotator, claim.claim_id,
                [(f"Mutation A of {claim.claim_id}.", "negate"),
                 (f"Mutation B of {claim.claim_id}.", "rephrase")],
            )
            claim_count += 1
            if claim_count >= 60:
                break

        mutation_ids = [
            r[0] for r in service.store.conn.execute(
                "SELECT claim_id FROM claims WHERE parent_claim_id IS NOT NULL"
            )
        ]
        n_mutations = len(mutation_ids)
        assert n_mutations == 120

        # T2: run the scheduler until exactly 2 * n labels are collected.
        target_labels = 2 * n_mutations
        submitted = 0
        spins = 0
        pool = itertools.cycle(annotators)
        while submitted < target_labels and spins < 50 * target_labels:
            spins += 1
            annotator = next(pool)
            task = service.next_labeling_task(annotator)
            if task is None:
                continue
            cid = task.claim.claim_id
            label = _label_for(cid)
            sets = [[task.scope.source_paragraph_id]] if label != NEI else []
            service.submit_label(annotator, cid, label, sets)
            submitted += 1

        mean = service.cross_annotation_mean()
        assert abs(mean - 2.0) <= 0.2, f"mean cross-annotations {mean}"
        assert service.list_conflicts() == []  # per-claim labels always agree

        # Folds: pairwise-disjoint test splits, 8:1:1 within one claim/stratum.
        labeled = service.labeled_claims()
        folds = [service.create_fold(seed=s) for s in (1, 2)]
        test_sets = [set(f.split_claims("test")) for f in folds]
        assert not (test_sets[0] & test_sets[1])
        for fold in folds:
            for label in LABELS:
                n_label = sum(1 for c in labeled.values() if c == label)
                got = {
                    split: sum(1 for c in fold.split_claims(split)
                               if labeled[c] == label)
                    for split in ("train", "dev", "test")
                }
                assert abs(got["test"] - round(0.1 * n_label)) <= 1
                assert abs(got["dev"] - round(0.1 * n_label)) <= 1
                assert abs(got["train"] - (n_label - got["dev"] - got["test"])) <= 1

        # Export leakage: source paragraph -> one split, for 100 seeds.
        for seed in range(100):
            records = service.export_dataset(seed=seed, kind="dr")
            split_of_source: dict[str, str] = {}
            for record in records:
                source = record["source_paragraph"]
                previous = split_of_source.setdefault(source, record["split"])
                assert previous == record["split"]

        # The suite is headless: the bundled scorer drives a pipeline pass
        # over exported claims with no model and no UI.
        scorer = LexicalOverlapScorer()

        class CorpusRetriever:
            def retrieve(self, query, k):
                ranking = tfidf_rank(self._index, query, k=k)
                return [
                    RetrievedDoc(pid, corpus.get_paragraph(pid).text, score)
                    for pid, score in ranking.items
                ]

        retriever = CorpusRetriever()
        retriever._index = build_tfidf_docs(
            [(p.paragraph_id, p.text, p.published_at)
             for p in corpus.iter_paragraphs()],
            buckets=1 << 18,
        )
        eval_claims = [
            EvalClaim.from_record(r)
            for r in service.export_dataset(seed=0, kind="dr")[:30]
        ]
        report = evaluate(eval_claims, retriever, scorer, ks=(1, 5), mode="se")
        assert report.evaluated == len(eval_claims)
        service.store.close()
