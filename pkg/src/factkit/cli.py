"""Single command-line entry point for the whole toolkit.

Exit codes: 0 success, 1 data error, 2 usage error.  A JSON config file
(``--config``) supplies defaults; explicit flags override it.  Every
artifact written by a subcommand starts with a provenance header record
carrying the tool version and the effective parameters, so identical
inputs and config reproduce identical outputs byte for byte.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

from . import __version__
from .analysis import LabelMatrix, cue_stats, fleiss_kappa, krippendorff_alpha
from .corpus import CorpusHandle, IngestConfig, ingest, parse_timestamp, read_article_stream
from .dictionary import DictionaryBuilder, DictionaryParams
from .errors import FactkitError, UsageError
from .localization import (
    IdentityTranslator,
    TranslationCache,
    build_nli_pairs,
    ingest_validity,
    leakage_warning,
    localize,
    read_alignment_tsv,
    read_localized_claims,
    read_source_claims,
    read_validity_file,
    resplit,
    translate_claims,
    validity_sample,
    write_records,
)
from .pipeline import (
    EvalClaim,
    LexicalOverlapScorer,
    RemoteScorer,
    RetrievedDoc,
    evaluate,
)
from .retrieval import (
    KIND_BM25,
    KIND_EMBEDDING,
    KIND_TFIDF,
    HashingEmbedder,
    bm25_rank,
    build_bm25,
    build_embedding_index,
    build_tfidf,
    grid_search_bm25,
    grid_search_bm25_table,
    load_index,
    mrr_at_k,
    read_run_file,
    save_index,
    semantic_rank,
    tfidf_rank,
    write_run_file,
)


def _provenance(command: str, params: dict) -> dict:
    return {"tool": "factkit", "version": __version__, "command": command,
            "params": {k: v for k, v in sorted(params.items()) if v is not None}}


def _write_json(path: Path, payload: dict) -> None:
    Path(path).write_text(
        json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )


def _load_jsonl(path: Path) -> list[dict]:
    rows = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            if "_provenance" not in record:
                rows.append(record)
    return rows


def _int_list(raw: str) -> list[int]:
    return [int(x) for x in raw.split(",") if x.strip()]


def _float_list(raw: str) -> list[float]:
    return [float(x) for x in raw.split(",") if x.strip()]


# ---------------------------------------------------------------- corpus ----


def cmd_corpus_ingest(args) -> int:
    config = IngestConfig(max_digit_ratio=args.max_digit_ratio)
    handle = ingest(read_article_stream(Path(args.infile)), Path(args.out), config)
    print(json.dumps(handle.stats, indent=2, sort_keys=True))
    return 0


# -------------------------------------------------------------- retrieval ----


def cmd_build_tfidf(args) -> int:
    corpus = CorpusHandle.open(Path(args.corpus))
    index = build_tfidf(corpus, buckets=args.buckets)
    save_index(Path(args.out), KIND_TFIDF, index)
    print(f"tfidf index: {index.n_docs} docs, {len(index.postings)} buckets used")
    return 0


def cmd_build_bm25(args) -> int:
    corpus = CorpusHandle.open(Path(args.corpus))
    index = build_bm25(corpus, k1=args.k1, b=args.b)
    save_index(Path(args.out), KIND_BM25, index)
    print(f"bm25 index: {index.n_docs} docs, {len(index.postings)} terms")
    return 0


def cmd_build_emb(args) -> int:
    corpus = CorpusHandle.open(Path(args.corpus))
    embedder = HashingEmbedder(dim=args.dim, seed=args.emb_seed)
    index = build_embedding_index(corpus, embedder)
    save_index(Path(args.out), KIND_EMBEDDING, index)
    print(f"embedding index: {len(index.doc_ids)} docs, dim {index.dim} "
          f"({index.embedder_tag})")
    return 0


def cmd_retrieve_query(args) -> int:
    kind, index = load_index(Path(args.index))
    if kind == KIND_TFIDF:
        ranking = tfidf_rank(index, args.q, k=args.k)
    elif kind == KIND_BM25:
        ranking = bm25_rank(index, args.q, k=args.k)
    elif kind == KIND_EMBEDDING:
        embedder = HashingEmbedder(dim=index.dim)
        if embedder.tag != index.embedder_tag:
            raise UsageError(
                f"index was built with {index.embedder_tag}, not {embedder.tag}"
            )
        ranking = semantic_rank(index, embedder.embed([args.q])[0], k=args.k)
    else:
        raise UsageError(f"cannot query index kind {kind!r}")
    for rank, (doc_id, score) in enumerate(ranking.items, start=1):
        print(f"{rank}\t{doc_id}\t{score:.6f}")
    if args.out:
        from .retrieval.base import Ranking

        write_run_file(Path(args.out), [Ranking(query_id=args.qid, items=ranking.items)])
    return 0


def cmd_retrieve_mrr(args) -> int:
    rankings = read_run_file(Path(args.runs))
    gold = {str(r["qid"]): set(map(str, r["gold"])) for r in _load_jsonl(Path(args.gold))}
    result = mrr_at_k(rankings, gold, ks=_int_list(args.ks))
    print(json.dumps({f"mrr@{k}": round(v, 4) for k, v in sorted(result.items())},
                     indent=2))
    return 0


def cmd_grid_bm25(args) -> int:
    _, index = load_index(Path(args.index), expected_kind=KIND_BM25)
    queries = {str(r["qid"]): str(r["query"]) for r in _load_jsonl(Path(args.queries))}
    gold = {str(r["qid"]): set(map(str, r["gold"])) for r in _load_jsonl(Path(args.gold))}
    k1_grid = _float_list(args.k1_grid) if args.k1_grid else None
    b_grid = _float_list(args.b_grid) if args.b_grid else None
    table = grid_search_bm25_table(
        index, queries, gold, k1_grid, b_grid,
        sample=args.sample, seed=args.seed, workers=args.workers,
    )
    best = min(table, key=lambda p: (-table[p], p))
    for (k1, b), score in sorted(table.items()):
        marker = "  <-- best" if (k1, b) == best else ""
        print(f"k1={k1:.1f} b={b:.1f} mrr@10={score:7.3f}{marker}")
    print(json.dumps({"k1": best[0], "b": best[1], "mrr@10": table[best]}))
    return 0


# -------------------------------------------------------------- dictionary ----


def _open_builder(args) -> DictionaryBuilder:
    corpus = CorpusHandle.open(Path(args.corpus))
    tfidf_index = None
    embedding_index = None
    embedder = None
    if getattr(args, "tfidf", None):
        _, tfidf_index = load_index(Path(args.tfidf), expected_kind=KIND_TFIDF)
    if getattr(args, "emb", None):
        _, embedding_index = load_index(Path(args.emb), expected_kind=KIND_EMBEDDING)
        embedder = HashingEmbedder(dim=embedding_index.dim)
        if embedder.tag != embedding_index.embedder_tag:
            raise UsageError(
                f"index was built with {embedding_index.embedder_tag}, "
                f"not {embedder.tag}"
            )
    params = DictionaryParams(
        n_kw=args.nkw, n_pre=args.npre, k=args.kclusters, n_sem=args.nsem,
        seed=args.seed,
    )
    return DictionaryBuilder(corpus, tfidf_index, embedding_index, embedder,
                             params=params)


def cmd_dict_build(args) -> int:
    builder = _open_builder(args)
    timestamp = parse_timestamp(args.ts)
    dictionary = builder.build(args.q, timestamp)
    payload = dictionary.to_dict()
    payload["_provenance"] = _provenance("dict build", {
        "q": args.q, "ts": timestamp, "nkw": args.nkw, "npre": args.npre,
        "k": args.kclusters, "nsem": args.nsem, "seed": args.seed,
    })
    if args.out:
        _write_json(Path(args.out), payload)
    print(json.dumps(payload, indent=2, ensure_ascii=False, sort_keys=True))
    return 0


# -------------------------------------------------------------- localization ----


def cmd_localize_run(args) -> int:
    claims = read_source_claims(Path(args.claims))
    alignment = read_alignment_tsv(Path(args.alignment))
    target_pages = {str(r["id"]) for r in _load_jsonl(Path(args.target_pages))}
    kept, report = localize(claims, alignment, target_pages)
    write_records(
        Path(args.out),
        [c.to_dict() for c in kept],
        provenance=_provenance("localize run", {"claims": str(args.claims)}),
    )
    print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    return 0


def cmd_localize_translate(args) -> int:
    claims = read_localized_claims(Path(args.claims))
    if args.engine != "identity":
        raise UsageError(
            f"engine {args.engine!r} is not bundled; plug a client in via the API"
        )
    cache = TranslationCache(Path(args.cache)) if args.cache else None
    result = translate_claims(
        claims, IdentityTranslator(), cache, batch_size=args.batch_size
    )
    write_records(
        Path(args.out),
        [c.to_dict() for c in result.claims],
        provenance=_provenance("localize translate", {"engine": args.engine}),
    )
    print(json.dumps(result.to_report(), indent=2, sort_keys=True))
    return 0


def cmd_localize_resplit(args) -> int:
    claims = read_localized_claims(Path(args.claims))
    assignment = resplit(claims, args.dev, args.test, seed=args.seed)
    for claim in claims:
        claim.split = assignment[claim.claim_id]
    write_records(
        Path(args.out),
        [c.to_dict() for c in claims],
        provenance=_provenance("localize resplit", {
            "dev": args.dev, "test": args.test, "seed": args.seed,
        }),
    )
    print(json.dumps(leakage_warning(claims, assignment), indent=2, sort_keys=True))
    return 0


def cmd_localize_nli(args) -> int:
    claims = read_localized_claims(Path(args.claims))
    pages = {str(r["id"]): str(r["text"]) for r in _load_jsonl(Path(args.pages))}
    from .retrieval.bm25 import build_bm25_docs

    # BM25's idf stays positive even for terms present in every page, so
    # tiny page sets still rank.
    index = build_bm25_docs(sorted(pages.items()))

    def retriever(query: str, k: int) -> list[str]:
        return bm25_rank(index, query, k=k).doc_ids()

    pairs, report = build_nli_pairs(claims, pages, retriever, random.Random(args.seed))
    write_records(
        Path(args.out),
        [p.to_dict() for p in pairs],
        provenance=_provenance("localize nli", {"seed": args.seed}),
    )
    print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    return 0


def cmd_validity_sample(args) -> int:
    claims = read_localized_claims(Path(args.claims))
    pages = None
    if args.pages:
        pages = {str(r["id"]): str(r["text"]) for r in _load_jsonl(Path(args.pages))}
    rows = validity_sample(claims, args.fraction, seed=args.seed, page_texts=pages)
    write_records(
        Path(args.out), rows,
        provenance=_provenance("localize validity-sample", {
            "fraction": args.fraction, "seed": args.seed,
        }),
    )
    print(f"exported {len(rows)} claim-evidence pairs for annotation")
    return 0


def cmd_validity_report(args) -> int:
    report = ingest_validity(read_validity_file(Path(args.filled)))
    payload = report.to_dict()
    if args.out:
        _write_json(Path(args.out), payload)
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


# ---------------------------------------------------------------- analysis ----


def _read_matrix(path: Path) -> LabelMatrix:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if isinstance(payload, dict):
        return LabelMatrix(values=payload["values"],
                           categories=payload.get("categories", []))
    return LabelMatrix(values=payload)


def cmd_analyze_alpha(args) -> int:
    value = krippendorff_alpha(_read_matrix(Path(args.matrix)))
    print(json.dumps({"krippendorff_alpha": value}))
    return 0


def cmd_analyze_kappa(args) -> int:
    value = fleiss_kappa(_read_matrix(Path(args.matrix)))
    print(json.dumps({"fleiss_kappa": value}))
    return 0


def cmd_analyze_cues(args) -> int:
    rows = _load_jsonl(Path(args.claims))
    claims = [(str(r["claim"]), str(r["label"])) for r in rows]
    stats = cue_stats(claims, order=args.order, subsamples=args.subsamples,
                      seed=args.seed)
    print(f"{'rank':>4}  {'cue':<24} {'label':<16} "
          f"{'productivity':>12} {'coverage':>9} {'h-mean':>7}")
    for rank, s in enumerate(stats[: args.top], start=1):
        print(f"{rank:>4}  {s.cue:<24} {s.majority_label:<16} "
              f"{s.productivity:>12.2f} {s.coverage:>9.2f} {s.harmonic_mean:>7.2f}")
    if args.out:
        write_records(
            Path(args.out),
            [
                {"rank": i + 1, "cue": s.cue, "label": s.majority_label,
                 "productivity": s.productivity, "coverage": s.coverage,
                 "h_mean": s.harmonic_mean}
                for i, s in enumerate(stats[: args.top])
            ],
            provenance=_provenance("analyze cues", {
                "order": args.order, "subsamples": args.subsamples, "seed": args.seed,
            }),
        )
    return 0


# ---------------------------------------------------------------- pipeline ----


class _IndexRetriever:
    """Adapts a persisted index + corpus to the pipeline retriever protocol."""

    def __init__(self, kind: str, index, corpus: CorpusHandle):
        self.kind = kind
        self.index = index
        self.corpus = corpus
        self.embedder = (
            HashingEmbedder(dim=index.dim) if kind == KIND_EMBEDDING else None
        )

    def retrieve(self, query: str, k: int) -> list[RetrievedDoc]:
        if self.kind == KIND_TFIDF:
            ranking = tfidf_rank(self.index, query, k=k)
        elif self.kind == KIND_BM25:
            ranking = bm25_rank(self.index, query, k=k)
        else:
            ranking = semantic_rank(self.index, self.embedder.embed([query])[0], k=k)
        return [
            RetrievedDoc(pid, self.corpus.get_paragraph(pid).text, score)
            for pid, score in ranking.items
        ]


def cmd_pipeline_eval(args) -> int:
    corpus = CorpusHandle.open(Path(args.corpus))
    kind, index = load_index(Path(args.index))
    retriever = _IndexRetriever(kind, index, corpus)
    scorer = (
        LexicalOverlapScorer() if args.scorer == "local" else RemoteScorer(args.scorer)
    )
    claims = [EvalClaim.from_record(r) for r in _load_jsonl(Path(args.claims))]
    metric = {"acc": "accuracy", "f1": "f1_macro"}[args.metric]
    report = evaluate(
        claims, retriever, scorer,
        ks=_int_list(args.k), mode=args.mode, metric=metric,
        max_input=args.max_input, k_s=args.split_docs, lam=args.lam,
    )
    payload = report.to_dict()
    payload["_provenance"] = _provenance("pipeline eval", {
        "mode": args.mode, "metric": metric, "k": args.k, "k_s": args.split_docs,
        "max_input": args.max_input, "lambda": args.lam, "scorer": args.scorer,
    })
    if args.out:
        _write_json(Path(args.out), payload)
    print(report.format_table())
    return 0


# ------------------------------------------------------------- annotation ----


def _open_service(args):
    from .annotation import AnnotationService, AnnotationStore

    corpus = CorpusHandle.open(Path(args.corpus))
    builder = None
    if getattr(args, "tfidf", None) or getattr(args, "emb", None):
        builder = _open_builder(args)
    store = AnnotationStore(Path(args.db))
    return AnnotationService(store, corpus, builder, seed=args.seed)


def _print_json(payload) -> None:
    print(json.dumps(payload, indent=2, ensure_ascii=False, sort_keys=True))


def cmd_annotate(args) -> int:
    service = _open_service(args)
    action = args.action
    if action == "t0":
        service.preselect(args.paragraph, args.decision, args.annotator)
        _print_json({"paragraph_id": args.paragraph, "decision": args.decision})
    elif action == "t1a-task":
        task = service.next_extraction_task(args.annotator)
        _print_json(None if task is None else {
            "paragraph_id": task.paragraph_id,
            "paragraph": task.paragraph_text,
            "scope": task.scope.paragraph_ids,
        })
    elif action == "t1a-claim":
        claim = service.submit_claim(args.annotator, args.paragraph, args.text)
        _print_json(claim.to_dict())
    elif action == "t1a-skip":
        service.skip_extraction(args.annotator, args.paragraph)
        _print_json({"skipped": args.paragraph})
    elif action == "t1b":
        mutations = [tuple(m.split(":", 1)[::-1]) for m in args.mutation]
        claims, warnings = service.submit_mutations(args.annotator, args.claim, mutations)
        _print_json({"claims": [c.to_dict() for c in claims], "warnings": warnings})
    elif action == "t2-task":
        task = service.next_labeling_task(args.annotator)
        _print_json(None if task is None else {
            "claim": task.claim.to_dict(),
            "scope": task.scope.paragraph_ids,
            "dictionary_pending": task.scope.dictionary_pending,
        })
    elif action == "t2-label":
        sets = [s.split(",") for s in (args.evidence or [])]
        annotation = service.submit_label(
            args.annotator, args.claim, args.label, sets, args.elapsed
        )
        _print_json(annotation.to_dict())
    elif action == "claim":
        claim = service.get_claim(args.claim)
        _print_json({
            "claim": claim.to_dict(),
            "annotations": [a.to_dict() for a in service.annotations_for(args.claim)],
        })
    elif action == "conflicts":
        _print_json({"conflicts": service.list_conflicts()})
    elif action == "resolve":
        from .annotation import CorrectiveAnnotation

        corrective = None
        if args.corrective_label:
            corrective = CorrectiveAnnotation(
                label=args.corrective_label,
                evidence_sets=[s.split(",") for s in (args.evidence or [])],
            )
        record = service.resolve_conflict(
            args.claim, args.retract or [], args.annotator, corrective,
            args.error_tag,
        )
        _print_json({"conflict_id": record.conflict_id, "claim_id": record.claim_id})
    elif action == "fold-create":
        fold = service.create_fold(args.seed)
        _print_json({"fold_id": fold.fold_id, "assignment": fold.assignment})
    elif action == "folds":
        _print_json({
            "folds": [
                {"fold_id": f.fold_id, "seed": f.seed,
                 "sizes": {s: len(f.split_claims(s)) for s in ("train", "dev", "test")}}
                for f in service.list_folds()
            ]
        })
    elif action == "fold-predictions":
        predictions = {
            str(r["id"]): str(r["label"]) for r in _load_jsonl(Path(args.predictions))
        }
        queue = service.submit_fold_predictions(args.fold, predictions)
        _print_json({"review_queue": queue})
    elif action == "review":
        from .annotation import CorrectiveAnnotation

        corrective = None
        if args.corrective_label:
            corrective = CorrectiveAnnotation(
                label=args.corrective_label,
                evidence_sets=[s.split(",") for s in (args.evidence or [])],
            )
        record = service.apply_review(
            args.claim, args.retract or [], args.annotator, corrective, args.error_tag
        )
        _print_json({"claim_id": record.claim_id})
    elif action == "process-dicts":
        done = service.process_dictionary_queue(limit=args.limit)
        _print_json({"processed": done, "pending": service.pending_dictionaries()})
    elif action == "matrix":
        values = service.label_matrix(fourth_category=args.fourth_category)
        payload = {"values": values}
        if args.out:
            _write_json(Path(args.out), payload)
        else:
            _print_json(payload)
    elif action == "export":
        records = service.export_dataset(seed=args.seed, kind=args.kind)
        write_records(
            Path(args.out), records,
            provenance=_provenance("annotate export", {
                "kind": args.kind, "seed": args.seed,
            }),
        )
        print(f"exported {len(records)} records to {args.out}")
    else:  # pragma: no cover - argparse restricts choices
        raise UsageError(f"unknown annotate action {action!r}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .annotation.api import TokenTable, create_app

    service = _open_service(args)
    tokens = TokenTable.from_file(Path(args.tokens))
    static_dir = Path(args.static) if args.static else None
    app = create_app(service, tokens, static_dir=static_dir)
    service.start_dictionary_worker()
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    finally:
        service.stop_dictionary_worker()
    return 0


# ------------------------------------------------------------------ parser ----


def build_parser(defaults: dict) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="factkit",
        description="fact-verification dataset toolkit and annotation service",
    )
    parser.add_argument("--config", help="JSON config file with flag defaults")
    sub = parser.add_subparsers(dest="group", required=True)

    def d(key, fallback):
        return defaults.get(key, fallback)

    # corpus
    corpus = sub.add_parser("corpus", help="corpus ingestion").add_subparsers(
        dest="command", required=True
    )
    p = corpus.add_parser("ingest", help="build a paragraph corpus from JSONL articles")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--max-digit-ratio", type=float,
                   default=d("max_digit_ratio", 0.5))
    p.set_defaults(func=cmd_corpus_ingest)

    # retrieve
    retrieve = sub.add_parser("retrieve", help="indexes and retrieval eval").add_subparsers(
        dest="command", required=True
    )
    p = retrieve.add_parser("build-tfidf")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--buckets", type=int, default=d("buckets", 1 << 24))
    p.set_defaults(func=cmd_build_tfidf)

    p = retrieve.add_parser("build-bm25")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--k1", type=float, default=d("k1", 0.9))
    p.add_argument("--b", type=float, default=d("b", 0.9))
    p.set_defaults(func=cmd_build_bm25)

    p = retrieve.add_parser("build-emb")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dim", type=int, default=d("dim", 256))
    p.add_argument("--emb-seed", type=int, default=d("emb_seed", 13))
    p.set_defaults(func=cmd_build_emb)

    p = retrieve.add_parser("query")
    p.add_argument("--index", required=True)
    p.add_argument("--q", required=True)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--qid", default="q0")
    p.add_argument("--out")
    p.set_defaults(func=cmd_retrieve_query)

    p = retrieve.add_parser("mrr")
    p.add_argument("--runs", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--ks", default=d("ks", "1,5,10,20"))
    p.set_defaults(func=cmd_retrieve_mrr)

    p = retrieve.add_parser("grid-bm25")
    p.add_argument("--index", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--k1-grid", default=None)
    p.add_argument("--b-grid", default=None)
    p.add_argument("--sample", type=int, default=None)
    p.add_argument("--seed", type=int, default=d("seed", 0))
    p.add_argument("--workers", type=int, default=d("workers", 1))
    p.set_defaults(func=cmd_grid_bm25)

    # dict
    dictionary = sub.add_parser("dict", help="dictionary generation").add_subparsers(
        dest="command", required=True
    )
    p = dictionary.add_parser("build")
    p.add_argument("--q", required=True)
    p.add_argument("--ts", required=True, help="query timestamp (ISO 8601)")
    p.add_argument("--corpus", required=True)
    p.add_argument("--tfidf")
    p.add_argument("--emb")
    p.add_argument("--nkw", type=int, default=d("nkw", 4))
    p.add_argument("--npre", type=int, default=d("npre", 1024))
    p.add_argument("--k", dest="kclusters", type=int, default=d("k", 2))
    p.add_argument("--nsem", type=int, default=d("nsem", 4))
    p.add_argument("--seed", type=int, default=d("seed", 0))
    p.add_argument("--out")
    p.set_defaults(func=cmd_dict_build)

    # localize
    loc = sub.add_parser("localize", help="dataset localization").add_subparsers(
        dest="command", required=True
    )
    p = loc.add_parser("run")
    p.add_argument("--claims", required=True)
    p.add_argument("--alignment", required=True)
    p.add_argument("--target-pages", required=True,
                   help="JSONL of target pages with at least an 'id' field")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_localize_run)

    p = loc.add_parser("translate")
    p.add_argument("--claims", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--engine", default="identity")
    p.add_argument("--cache")
    p.add_argument("--batch-size", type=int, default=d("batch_size", 32))
    p.set_defaults(func=cmd_localize_translate)

    p = loc.add_parser("resplit")
    p.add_argument("--claims", required=True)
    p.add_argument("--dev", type=int, required=True, help="dev claims per class")
    p.add_argument("--test", type=int, required=True, help="test claims per class")
    p.add_argument("--seed", type=int, default=d("seed", 0))
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_localize_resplit)

    p = loc.add_parser("nli")
    p.add_argument("--claims", required=True)
    p.add_argument("--pages", required=True, help="JSONL of {id, text} pages")
    p.add_argument("--seed", type=int, default=d("seed", 0))
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_localize_nli)

    p = loc.add_parser("validity-sample")
    p.add_argument("--claims", required=True)
    p.add_argument("--fraction", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=d("seed", 0))
    p.add_argument("--pages")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_validity_sample)

    p = loc.add_parser("validity-report")
    p.add_argument("--filled", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_validity_report)

    # analyze
    analyze = sub.add_parser("analyze", help="agreement and cue analytics").add_subparsers(
        dest="command", required=True
    )
    p = analyze.add_parser("alpha")
    p.add_argument("--matrix", required=True)
    p.set_defaults(func=cmd_analyze_alpha)

    p = analyze.add_parser("kappa")
    p.add_argument("--matrix", required=True)
    p.set_defaults(func=cmd_analyze_kappa)

    p = analyze.add_parser("cues")
    p.add_argument("--claims", required=True)
    p.add_argument("--order", type=int, choices=(1, 2), default=1)
    p.add_argument("--subsamples", type=int, default=d("subsamples", 10))
    p.add_argument("--seed", type=int, default=d("seed", 0))
    p.add_argument("--top", type=int, default=20)
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze_cues)

    # pipeline
    pipe = sub.add_parser("pipeline", help="full verification pipeline").add_subparsers(
        dest="command", required=True
    )
    p = pipe.add_parser("eval")
    p.add_argument("--claims", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--index", required=True)
    p.add_argument("--scorer", default="local",
                   help="'local' for the lexical scorer, or a remote base URL")
    p.add_argument("--k", default=d("ks", "1,5,10,20"))
    p.add_argument("--mode", choices=("se", "nse"), default="nse")
    p.add_argument("--metric", choices=("acc", "f1"), default="acc")
    p.add_argument("--max-input", type=int, default=d("max_input", 512))
    p.add_argument("--split-docs", type=int, default=d("k_s", 2),
                   help="max documents per evidence split")
    p.add_argument("--lam", type=float, default=d("lambda", 0.5))
    p.add_argument("--out")
    p.set_defaults(func=cmd_pipeline_eval)

    # annotate (CLI mirror of the HTTP API)
    p = sub.add_parser("annotate", help="drive the annotation service locally")
    p.add_argument("action", choices=(
        "t0", "t1a-task", "t1a-claim", "t1a-skip", "t1b", "t2-task", "t2-label",
        "claim", "conflicts", "resolve", "fold-create", "folds",
        "fold-predictions", "review", "process-dicts", "matrix", "export",
    ))
    p.add_argument("--db", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--tfidf")
    p.add_argument("--emb")
    p.add_argument("--nkw", type=int, default=d("nkw", 4))
    p.add_argument("--npre", type=int, default=d("npre", 1024))
    p.add_argument("--k", dest="kclusters", type=int, default=d("k", 2))
    p.add_argument("--nsem", type=int, default=d("nsem", 4))
    p.add_argument("--seed", type=int, default=d("seed", 0))
    p.add_argument("--annotator", default="cli")
    p.add_argument("--paragraph")
    p.add_argument("--decision", choices=("accept", "reject"))
    p.add_argument("--claim")
    p.add_argument("--text")
    p.add_argument("--label")
    p.add_argument("--elapsed", type=float)
    p.add_argument("--evidence", action="append",
                   help="comma-separated paragraph ids, one flag per set")
    p.add_argument("--mutation", action="append", default=[],
                   help="TYPE:TEXT, one flag per mutation")
    p.add_argument("--retract", action="append")
    p.add_argument("--corrective-label")
    p.add_argument("--error-tag", default="none")
    p.add_argument("--fold", type=int)
    p.add_argument("--predictions")
    p.add_argument("--limit", type=int)
    p.add_argument("--kind", choices=("dr", "nli"), default="dr")
    p.add_argument("--fourth-category",
                   help="map retracted annotations to this label in the matrix")
    p.add_argument("--out")
    p.set_defaults(func=cmd_annotate)

    # serve
    p = sub.add_parser("serve", help="run the annotation HTTP API")
    p.add_argument("--db", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--tokens", required=True, help="JSON token table")
    p.add_argument("--tfidf")
    p.add_argument("--emb")
    p.add_argument("--nkw", type=int, default=d("nkw", 4))
    p.add_argument("--npre", type=int, default=d("npre", 1024))
    p.add_argument("--k", dest="kclusters", type=int, default=d("k", 2))
    p.add_argument("--nsem", type=int, default=d("nsem", 4))
    p.add_argument("--seed", type=int, default=d("seed", 0))
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8321)
    p.add_argument("--static", help="directory of built UI assets to serve at /ui")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    defaults: dict = {}
    if "--config" in argv:
        config_path = argv[argv.index("--config") + 1]
        defaults = json.loads(Path(config_path).read_text(encoding="utf-8"))
    parser = build_parser(defaults)
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return int(err.code or 0)
    try:
        return args.func(args)
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 2
    except FactkitError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except FileNotFoundError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
