"""HTTP+JSON API over the annotation service.

Bearer-token auth: each token maps to an annotator identity and a role
list; curator-only endpoints (T0, conflict resolution, folds, export)
check for the ``curator`` role.  Errors map onto conventional status
codes: unknown records 404, invariant violations 422, lease and
conflict states 409.
"""

from __future__ import annotations

import json
from pathlib import Path

from fastapi import Depends, FastAPI, Header, HTTPException, Query
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel, Field

from ..corpus import Paragraph
from ..dictionary.builder import KnowledgeScope
from ..errors import (
    ExportBlockedError,
    FactkitError,
    LabelConflictError,
    LeaseError,
    NotFoundError,
    UsageError,
    ValidationError,
)
from .service import AnnotationService, CorrectiveAnnotation


class TokenTable:
    """token -> {"id": annotator, "roles": [...]}."""

    def __init__(self, tokens: dict[str, dict]):
        self.tokens = tokens

    @classmethod
    def from_file(cls, path: Path) -> "TokenTable":
        return cls(json.loads(Path(path).read_text(encoding="utf-8")))

    def identify(self, token: str) -> dict:
        entry = self.tokens.get(token)
        if entry is None:
            raise HTTPException(status_code=401, detail="unknown token")
        return entry


class DecisionBody(BaseModel):
    paragraph_id: str
    decision: str


class ClaimBody(BaseModel):
    paragraph_id: str
    text: str


class SkipBody(BaseModel):
    paragraph_id: str


class MutationItem(BaseModel):
    text: str
    type: str


class MutationsBody(BaseModel):
    claim_id: str
    mutations: list[MutationItem]


class LabelBody(BaseModel):
    claim_id: str
    label: str
    evidence_sets: list[list[str]] = Field(default_factory=list)
    elapsed_seconds: float | None = None


class CorrectiveBody(BaseModel):
    label: str
    evidence_sets: list[list[str]] = Field(default_factory=list)


class ResolveBody(BaseModel):
    retract: list[str] = Field(default_factory=list)
    corrective: CorrectiveBody | None = None
    error_tag: str = "none"


class FoldBody(BaseModel):
    seed: int


class PredictionsBody(BaseModel):
    predictions: dict[str, str]


def _http_error(err: FactkitError) -> HTTPException:
    if isinstance(err, NotFoundError):
        return HTTPException(status_code=404, detail=str(err))
    if isinstance(err, (LeaseError, LabelConflictError)):
        return HTTPException(status_code=409, detail=str(err))
    if isinstance(err, ExportBlockedError):
        return HTTPException(
            status_code=409,
            detail={"message": str(err), "conflicts": err.claim_ids},
        )
    if isinstance(err, (ValidationError, UsageError)):
        return HTTPException(status_code=422, detail=str(err))
    return HTTPException(status_code=500, detail=str(err))


def create_app(
    service: AnnotationService,
    tokens: TokenTable,
    static_dir: Path | None = None,
) -> FastAPI:
    app = FastAPI(title="factkit annotation service")

    def identity(authorization: str = Header(default="")) -> dict:
        if not authorization.startswith("Bearer "):
            raise HTTPException(status_code=401, detail="missing bearer token")
        return tokens.identify(authorization.removeprefix("Bearer ").strip())

    def curator(user: dict = Depends(identity)) -> dict:
        if "curator" not in user.get("roles", []):
            raise HTTPException(status_code=403, detail="curator role required")
        return user

    def paragraph_payload(p: Paragraph) -> dict:
        return {
            "paragraph_id": p.paragraph_id,
            "article_id": p.article_id,
            "rank": p.rank,
            "text": p.text,
            "published_at": p.published_at,
        }

    def scope_payload(scope: KnowledgeScope) -> dict:
        entries = []
        for pid in scope.paragraph_ids:
            p = service.corpus.get_paragraph(pid)
            entries.append(
                {**paragraph_payload(p), "provenance": scope.provenance.get(pid, "")}
            )
        return {
            "source_paragraph_id": scope.source_paragraph_id,
            "entries": entries,
            "dictionary_pending": scope.dictionary_pending,
        }

    @app.exception_handler(FactkitError)
    async def _factkit_error(_, err: FactkitError):
        raise _http_error(err)

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "paragraphs": len(service.corpus)}

    # ------------------------------------------------------------- T0 ----

    @app.post("/t0/decision")
    def t0_decision(body: DecisionBody, user: dict = Depends(curator)) -> dict:
        service.preselect(body.paragraph_id, body.decision, user["id"])
        return {"paragraph_id": body.paragraph_id, "decision": body.decision}

    # ------------------------------------------------------------ T1a ----

    @app.get("/t1a/task")
    def t1a_task(user: dict = Depends(identity)) -> dict:
        task = service.next_extraction_task(user["id"])
        if task is None:
            return {"task": None}
        return {
            "task": {
                "paragraph": paragraph_payload(
                    service.corpus.get_paragraph(task.paragraph_id)
                ),
                "scope": scope_payload(task.scope),
                "resumed": task.resumed,
            }
        }

    @app.post("/t1a/claim")
    def t1a_claim(body: ClaimBody, user: dict = Depends(identity)) -> dict:
        claim = service.submit_claim(user["id"], body.paragraph_id, body.text)
        return {"claim": claim.to_dict()}

    @app.post("/t1a/skip")
    def t1a_skip(body: SkipBody, user: dict = Depends(identity)) -> dict:
        service.skip_extraction(user["id"], body.paragraph_id)
        return {"skipped": body.paragraph_id}

    # ------------------------------------------------------------ T1b ----

    @app.post("/t1b/mutations")
    def t1b_mutations(body: MutationsBody, user: dict = Depends(identity)) -> dict:
        claims, warnings = service.submit_mutations(
            user["id"], body.claim_id, [(m.text, m.type) for m in body.mutations]
        )
        return {"claims": [c.to_dict() for c in claims], "warnings": warnings}

    # ------------------------------------------------------------- T2 ----

    @app.get("/t2/task")
    def t2_task(user: dict = Depends(identity)) -> dict:
        task = service.next_labeling_task(user["id"])
        if task is None:
            return {"task": None}
        return {
            "task": {
                "claim": task.claim.to_dict(),
                "scope": scope_payload(task.scope),
                "resumed": task.resumed,
            }
        }

    @app.post("/t2/label")
    def t2_label(body: LabelBody, user: dict = Depends(identity)) -> dict:
        annotation = service.submit_label(
            user["id"], body.claim_id, body.label, body.evidence_sets,
            body.elapsed_seconds,
        )
        return {"annotation": annotation.to_dict()}

    # ----------------------------------------------------------- claims ----

    @app.get("/claims/{claim_id}")
    def claim_details(claim_id: str, user: dict = Depends(identity)) -> dict:
        claim = service.get_claim(claim_id)
        annotations = [a.to_dict() for a in service.annotations_for(claim_id)]
        try:
            label = service.aggregate_label(claim_id)
            merged = service.merge_evidence(claim_id)
            conflict = False
        except (LabelConflictError, NotFoundError):
            label, merged, conflict = None, [], True
        if not annotations:
            conflict = False
        return {
            "claim": claim.to_dict(),
            "annotations": annotations,
            "aggregated_label": label,
            "merged_evidence": merged,
            "conflict": conflict,
        }

    # -------------------------------------------------------- conflicts ----

    @app.get("/conflicts")
    def conflicts(user: dict = Depends(curator)) -> dict:
        return {"conflicts": service.list_conflicts()}

    @app.post("/conflicts/{claim_id}/resolve")
    def resolve(claim_id: str, body: ResolveBody, user: dict = Depends(curator)) -> dict:
        corrective = None
        if body.corrective is not None:
            corrective = CorrectiveAnnotation(
                label=body.corrective.label,
                evidence_sets=body.corrective.evidence_sets,
            )
        record = service.resolve_conflict(
            claim_id, body.retract, user["id"], corrective, body.error_tag
        )
        return {
            "conflict_id": record.conflict_id,
            "claim_id": record.claim_id,
            "retracted": record.annotation_ids,
            "error_tag": record.error_tag,
        }

    # ------------------------------------------------------------ folds ----

    @app.get("/folds")
    def folds(user: dict = Depends(curator)) -> dict:
        return {
            "folds": [
                {"fold_id": f.fold_id, "seed": f.seed,
                 "sizes": {s: len(f.split_claims(s)) for s in ("train", "dev", "test")}}
                for f in service.list_folds()
            ]
        }

    @app.post("/folds")
    def create_fold(body: FoldBody, user: dict = Depends(curator)) -> dict:
        fold = service.create_fold(body.seed)
        return {"fold_id": fold.fold_id, "assignment": fold.assignment}

    @app.post("/folds/{fold_id}/predictions")
    def fold_predictions(
        fold_id: int, body: PredictionsBody, user: dict = Depends(curator)
    ) -> dict:
        queue = service.submit_fold_predictions(fold_id, body.predictions)
        return {"review_queue": queue}

    @app.get("/folds/{fold_id}/reviews")
    def fold_reviews(fold_id: int, user: dict = Depends(curator)) -> dict:
        return {"review_queue": service.review_queue(fold_id)}

    @app.post("/reviews/{claim_id}")
    def apply_review(
        claim_id: str, body: ResolveBody, user: dict = Depends(curator)
    ) -> dict:
        corrective = None
        if body.corrective is not None:
            corrective = CorrectiveAnnotation(
                label=body.corrective.label,
                evidence_sets=body.corrective.evidence_sets,
            )
        record = service.apply_review(
            claim_id, body.retract, user["id"], corrective, body.error_tag
        )
        return {"claim_id": record.claim_id, "retracted": record.annotation_ids}

    # ----------------------------------------------------------- export ----

    @app.get("/export")
    def export(
        kind: str = Query(default="dr"),
        seed: int = Query(default=0),
        user: dict = Depends(curator),
    ) -> PlainTextResponse:
        records = service.export_dataset(seed=seed, kind=kind)
        body = "\n".join(json.dumps(r, ensure_ascii=False, sort_keys=True) for r in records)
        return PlainTextResponse(body + ("\n" if body else ""),
                                 media_type="application/x-ndjson")

    # -------------------------------------------------------- paragraphs ----

    @app.get("/paragraphs/{paragraph_id}/article")
    def article(paragraph_id: str, user: dict = Depends(identity)) -> dict:
        return {
            "paragraphs": [
                paragraph_payload(p)
                for p in service.corpus.same_article_paragraphs(paragraph_id)
            ]
        }

    @app.get("/paragraphs/{paragraph_id}")
    def paragraph(paragraph_id: str, user: dict = Depends(identity)) -> dict:
        return {"paragraph": paragraph_payload(service.corpus.get_paragraph(paragraph_id))}

    # ----------------------------------------------------- corpus search ----

    @app.get("/search")
    def search(
        q: str, k: int = Query(default=10, ge=1, le=100),
        user: dict = Depends(identity),
    ) -> dict:
        # View-only helper for the UI corpus panel; search results are not
        # part of the knowledge scope and cannot be cited as evidence.
        builder = service.builder
        if builder is None or builder.tfidf_index is None:
            return {"results": []}
        from ..retrieval.tfidf import tfidf_rank

        ranking = tfidf_rank(builder.tfidf_index, q, k=k)
        return {
            "results": [
                {**paragraph_payload(service.corpus.get_paragraph(pid)), "score": score}
                for pid, score in ranking.items
            ]
        }

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
