"""The annotation service: preselection, task assignment, labeling,
conflict resolution, cleaning folds and dataset export.

Task flow follows the platform design: curators accept source
paragraphs (T0); annotators extract an initial claim from a paragraph
plus its generated dictionary (T1a), mutate it (T1b), and label
mutations against the combined knowledge scope (T2).  Labeling
assignment is weighted toward claims that have not yet reached the
target of two independent cross-annotations and never hands an
annotator their own claim.

Leases serialize task hand-out: a resource is leased to one annotator
per task type, and expired leases silently return to the pool.
Dictionaries for mutations are computed by a queue that never blocks
labeling; a scope served before its mutation dictionary is ready is
flagged and contains {p} u d(p) only.
"""

from __future__ import annotations

import json
import logging
import random
import time
from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass, field

from ..corpus import CorpusHandle
from ..dictionary.builder import (
    Dictionary,
    DictionaryBuilder,
    DictionaryEntry,
    KnowledgeScope,
    assemble_scope,
)
from ..errors import (
    ExportBlockedError,
    LabelConflictError,
    LeaseError,
    NotFoundError,
    ValidationError,
)
from ..localization.records import LABELS, NEI, normalize_label
from .models import (
    Annotation,
    Claim,
    ConflictRecord,
    ERROR_TAGS,
    ExtractionTask,
    Fold,
    LabelingTask,
    MUTATION_INITIAL,
    MUTATION_TYPES,
    STATE_ACTIVE,
    STATE_CORRECTIVE,
    STATE_RETRACTED,
    normalize_evidence_sets,
)
from .splits import group_stratified_splits, stratified_fold_splits
from .store import AnnotationStore

logger = logging.getLogger(__name__)

TASK_EXTRACTION = "t1a"
TASK_LABELING = "t2"

DEFAULT_LEASE_SECONDS = 30 * 60
CROSS_ANNOTATION_TARGET = 2.0
SCHEDULER_EPSILON = 0.05


@dataclass
class CorrectiveAnnotation:
    label: str
    evidence_sets: list[list[str]] = field(default_factory=list)


class AnnotationService:
    def __init__(
        self,
        store: AnnotationStore,
        corpus: CorpusHandle,
        dictionary_builder: DictionaryBuilder | None = None,
        seed: int = 0,
        lease_seconds: float = DEFAULT_LEASE_SECONDS,
        clock: Callable[[], float] = time.time,
    ):
        self.store = store
        self.corpus = corpus
        self.builder = dictionary_builder
        self.rng = random.Random(seed)
        self.lease_seconds = lease_seconds
        self.clock = clock

    # ------------------------------------------------------------- T0 ----

    def preselect(self, paragraph_id: str, decision: str, curator: str) -> None:
        """Record a curator decision; last write wins, with an audit entry."""
        if decision not in ("accept", "reject"):
            raise ValidationError(f"decision must be accept|reject, got {decision!r}")
        self.corpus.get_paragraph(paragraph_id)  # not-found propagates
        now = self.clock()
        with self.store.lock, self.store.conn:
            self.store.conn.execute(
                "INSERT OR REPLACE INTO preselection VALUES (?, ?, ?, ?)",
                (paragraph_id, decision, curator, now),
            )
        self.store.audit(now, curator, "t0.decision",
                         {"paragraph_id": paragraph_id, "decision": decision})

    def accepted_paragraphs(self) -> list[str]:
        rows = self.store.conn.execute(
            "SELECT paragraph_id FROM preselection WHERE decision = 'accept' "
            "ORDER BY paragraph_id"
        ).fetchall()
        return [r[0] for r in rows]

    # ---------------------------------------------------------- leases ----

    def _expire_leases(self) -> None:
        with self.store.lock, self.store.conn:
            self.store.conn.execute(
                "DELETE FROM leases WHERE expires_at <= ?", (self.clock(),)
            )

    def _lease(self, task_type: str, resource_id: str, annotator: str,
               scope: KnowledgeScope | None) -> None:
        scope_json = json.dumps(_scope_to_dict(scope)) if scope else None
        with self.store.lock, self.store.conn:
            self.store.conn.execute(
                "INSERT OR REPLACE INTO leases VALUES (?, ?, ?, ?, ?)",
                (task_type, resource_id, annotator,
                 self.clock() + self.lease_seconds, scope_json),
            )

    def _active_lease(self, task_type: str, resource_id: str) -> tuple[str, str | None] | None:
        row = self.store.conn.execute(
            "SELECT annotator, scope_json FROM leases "
            "WHERE task_type = ? AND resource_id = ? AND expires_at > ?",
            (task_type, resource_id, self.clock()),
        ).fetchone()
        return (row[0], row[1]) if row else None

    def _lease_of(self, task_type: str, annotator: str) -> tuple[str, str | None] | None:
        row = self.store.conn.execute(
            "SELECT resource_id, scope_json FROM leases "
            "WHERE task_type = ? AND annotator = ? AND expires_at > ?",
            (task_type, annotator, self.clock()),
        ).fetchone()
        return (row[0], row[1]) if row else None

    def _release(self, task_type: str, resource_id: str) -> None:
        with self.store.lock, self.store.conn:
            self.store.conn.execute(
                "DELETE FROM leases WHERE task_type = ? AND resource_id = ?",
                (task_type, resource_id),
            )

    # ----------------------------------------------------- dictionaries ----

    def _dictionary_key(self, kind: str, ident: str) -> str:
        return f"{kind}:{ident}"

    def _compute_dictionary(self, key: str, query: str, timestamp: int) -> Dictionary:
        if self.builder is None:
            d = Dictionary(query=query, timestamp=timestamp, keyword=[], semantic=[])
        else:
            d = self.builder.build(query, timestamp)
        with self.store.lock, self.store.conn:
            self.store.conn.execute(
                "INSERT OR REPLACE INTO dictionaries VALUES (?, ?, ?, ?, 'ready')",
                (key, query, timestamp, json.dumps(d.to_dict())),
            )
        return d

    def _get_dictionary(self, key: str) -> Dictionary | None:
        row = self.store.conn.execute(
            "SELECT entries_json FROM dictionaries WHERE key = ? AND status = 'ready'",
            (key,),
        ).fetchone()
        if row is None:
            return None
        payload = json.loads(row[0])
        entries = [
            DictionaryEntry(
                paragraph_id=e["paragraph_id"],
                score=e["score"],
                provenance=e["provenance"],
                published_at=e["published_at"],
            )
            for e in payload["entries"]
        ]
        return Dictionary(
            query=payload["query"], timestamp=payload["timestamp"],
            keyword=entries, semantic=[],
        )

    def _paragraph_dictionary(self, paragraph_id: str) -> Dictionary:
        key = self._dictionary_key("paragraph", paragraph_id)
        cached = self._get_dictionary(key)
        if cached is not None:
            return cached
        p = self.corpus.get_paragraph(paragraph_id)
        return self._compute_dictionary(key, p.text, p.published_at)

    def enqueue_dictionary(self, claim: Claim) -> None:
        key = self._dictionary_key("claim", claim.claim_id)
        with self.store.lock, self.store.conn:
            self.store.conn.execute(
                "INSERT OR REPLACE INTO dictionaries VALUES (?, ?, ?, NULL, 'pending')",
                (key, claim.text, claim.formulated_at),
            )
            self.store.conn.execute(
                "INSERT OR IGNORE INTO dict_queue (key) VALUES (?)", (key,)
            )

    def process_dictionary_queue(self, limit: int | None = None) -> int:
        """Drain pending dictionary jobs; returns the number computed."""
        rows = self.store.conn.execute(
            "SELECT job_id, key FROM dict_queue ORDER BY job_id"
        ).fetchall()
        if limit is not None:
            rows = rows[:limit]
        done = 0
        for job_id, key in rows:
            row = self.store.conn.execute(
                "SELECT query, ts FROM dictionaries WHERE key = ?", (key,)
            ).fetchone()
            if row is not None:
                self._compute_dictionary(key, row[0], row[1])
            with self.store.lock, self.store.conn:
                self.store.conn.execute("DELETE FROM dict_queue WHERE job_id = ?", (job_id,))
            done += 1
        return done

    def pending_dictionaries(self) -> int:
        (n,) = self.store.conn.execute("SELECT COUNT(*) FROM dict_queue").fetchone()
        return n

    def start_dictionary_worker(self, poll_seconds: float = 1.0) -> None:
        """Drain the dictionary queue on a daemon thread (server mode).

        Labeling never waits on the worker; a scope served before its
        mutation dictionary is ready simply carries the pending flag.
        """
        import threading

        if getattr(self, "_worker", None) is not None:
            return
        self._worker_stop = threading.Event()

        def loop() -> None:
            while not self._worker_stop.wait(poll_seconds):
                try:
                    self.process_dictionary_queue()
                except Exception:
                    logger.exception("dictionary worker pass failed; continuing")

        self._worker = threading.Thread(target=loop, daemon=True,
                                        name="dictionary-worker")
        self._worker.start()

    def stop_dictionary_worker(self) -> None:
        worker = getattr(self, "_worker", None)
        if worker is not None:
            self._worker_stop.set()
            worker.join(timeout=5)
            self._worker = None

    # ------------------------------------------------------------ T1a ----

    def next_extraction_task(self, annotator: str) -> ExtractionTask | None:
        # Selection and leasing are one critical section: two annotators
        # must never walk away with the same paragraph.
        with self.store.lock:
            self._expire_leases()
            held = self._lease_of(TASK_EXTRACTION, annotator)
            if held is not None:
                pid, scope_json = held
                return ExtractionTask(
                    paragraph_id=pid,
                    paragraph_text=self.corpus.get_paragraph(pid).text,
                    scope=_scope_from_dict(json.loads(scope_json)),
                    resumed=True,
                )

            leased = {
                r[0] for r in self.store.conn.execute(
                    "SELECT resource_id FROM leases "
                    "WHERE task_type = ? AND expires_at > ?",
                    (TASK_EXTRACTION, self.clock()),
                )
            }
            claimed = {
                r[0] for r in self.store.conn.execute(
                    "SELECT DISTINCT source_paragraph_id FROM claims "
                    "WHERE mutation_type = ?", (MUTATION_INITIAL,),
                )
            }
            pool = [p for p in self.accepted_paragraphs()
                    if p not in leased and p not in claimed]
            if not pool:
                return None
            pid = self.rng.choice(pool)
            scope = self._scope_for_paragraph(pid)
            self._lease(TASK_EXTRACTION, pid, annotator, scope)
            return ExtractionTask(
                paragraph_id=pid,
                paragraph_text=self.corpus.get_paragraph(pid).text,
                scope=scope,
            )

    def _scope_for_paragraph(self, paragraph_id: str) -> KnowledgeScope:
        d = self._paragraph_dictionary(paragraph_id)
        seed = self.rng.randrange(2**31)
        return assemble_scope(self.corpus, paragraph_id, [d], seed)

    def skip_extraction(self, annotator: str, paragraph_id: str) -> None:
        self._require_lease(TASK_EXTRACTION, paragraph_id, annotator)
        self._release(TASK_EXTRACTION, paragraph_id)
        self.store.audit(self.clock(), annotator, "t1a.skip",
                         {"paragraph_id": paragraph_id})

    def _require_lease(self, task_type: str, resource_id: str, annotator: str) -> str | None:
        self._expire_leases()
        lease = self._active_lease(task_type, resource_id)
        if lease is None:
            raise LeaseError(f"no active {task_type} lease for {resource_id!r}")
        holder, scope_json = lease
        if holder != annotator:
            raise LeaseError(f"{resource_id!r} is leased to another annotator")
        return scope_json

    def submit_claim(self, annotator: str, paragraph_id: str, text: str) -> Claim:
        self._require_lease(TASK_EXTRACTION, paragraph_id, annotator)
        text = text.strip()
        if not text:
            raise ValidationError("claim text must be non-empty")
        paragraph = self.corpus.get_paragraph(paragraph_id)
        now = self.clock()
        claim = Claim(
            claim_id=f"c{self.store.next_id('claim'):06d}",
            text=text,
            source_paragraph_id=paragraph_id,
            formulated_at=paragraph.published_at,
            parent_claim_id=None,
            mutation_type=MUTATION_INITIAL,
            author=annotator,
            created_at=now,
        )
        self._insert_claim(claim)
        self._release(TASK_EXTRACTION, paragraph_id)
        self.store.audit(now, annotator, "t1a.claim", claim.to_dict())
        return claim

    def _insert_claim(self, claim: Claim) -> None:
        with self.store.lock, self.store.conn:
            self.store.conn.execute(
                "INSERT INTO claims VALUES (?, ?, ?, ?, ?, ?, ?, ?, 0)",
                (claim.claim_id, claim.text, claim.source_paragraph_id,
                 claim.formulated_at, claim.parent_claim_id,
                 claim.mutation_type, claim.author, claim.created_at),
            )

    # ------------------------------------------------------------ T1b ----

    def submit_mutations(
        self, annotator: str, claim_id: str, mutations: Iterable[tuple[str, str]]
    ) -> tuple[list[Claim], list[str]]:
        parent = self.get_claim(claim_id)
        warnings: list[str] = []
        stored: list[Claim] = []
        sibling_texts = {
            r[0] for r in self.store.conn.execute(
                "SELECT text FROM claims WHERE parent_claim_id = ?", (claim_id,)
            )
        }
        now = self.clock()
        for text, mutation_type in mutations:
            text = text.strip()
            if not text:
                raise ValidationError("mutation text must be non-empty")
            if mutation_type not in MUTATION_TYPES or mutation_type == MUTATION_INITIAL:
                raise ValidationError(f"unknown mutation type {mutation_type!r}")
            if text in sibling_texts:
                warnings.append(f"duplicate mutation text: {text!r}")
            sibling_texts.add(text)
            claim = Claim(
                claim_id=f"c{self.store.next_id('claim'):06d}",
                text=text,
                source_paragraph_id=parent.source_paragraph_id,
                formulated_at=parent.formulated_at,
                parent_claim_id=parent.claim_id,
                mutation_type=mutation_type,
                author=annotator,
                created_at=now,
            )
            self._insert_claim(claim)
            self.enqueue_dictionary(claim)
            stored.append(claim)
        self.store.audit(now, annotator, "t1b.mutations",
                         {"parent": claim_id, "count": len(stored)})
        return stored, warnings

    # ------------------------------------------------------------- T2 ----

    def get_claim(self, claim_id: str) -> Claim:
        row = self.store.conn.execute(
            f"SELECT {AnnotationStore.CLAIM_COLUMNS} FROM claims WHERE claim_id = ?",
            (claim_id,),
        ).fetchone()
        if row is None:
            raise NotFoundError(f"unknown claim {claim_id!r}")
        return AnnotationStore.claim_from_row(row)

    def _active_label_counts(self) -> dict[str, int]:
        rows = self.store.conn.execute(
            "SELECT claim_id, COUNT(*) FROM annotations "
            "WHERE state != ? GROUP BY claim_id", (STATE_RETRACTED,),
        ).fetchall()
        return dict(rows)

    def labeling_candidates(self, annotator: str) -> list[tuple[str, float]]:
        """(claim_id, weight) pairs the scheduler may assign to ``annotator``."""
        self._expire_leases()
        leased = {
            r[0] for r in self.store.conn.execute(
                "SELECT resource_id FROM leases WHERE task_type = ? AND expires_at > ?",
                (TASK_LABELING, self.clock()),
            )
        }
        already = {
            r[0] for r in self.store.conn.execute(
                "SELECT DISTINCT claim_id FROM annotations "
                "WHERE annotator = ? AND state != ?", (annotator, STATE_RETRACTED),
            )
        }
        counts = self._active_label_counts()
        rows = self.store.conn.execute(
            "SELECT claim_id, author FROM claims "
            "WHERE parent_claim_id IS NOT NULL ORDER BY claim_id"
        ).fetchall()
        out = []
        for claim_id, author in rows:
            if author == annotator or claim_id in leased or claim_id in already:
                continue
            weight = max(0.0, CROSS_ANNOTATION_TARGET - counts.get(claim_id, 0))
            out.append((claim_id, weight + SCHEDULER_EPSILON))
        return out

    def next_labeling_task(self, annotator: str) -> LabelingTask | None:
        # Same critical section discipline as extraction: candidate scan,
        # weighted draw and lease insert happen under one lock.
        with self.store.lock:
            held = self._lease_of(TASK_LABELING, annotator)
            if held is not None:
                claim_id, scope_json = held
                return LabelingTask(
                    claim=self.get_claim(claim_id),
                    scope=_scope_from_dict(json.loads(scope_json)),
                    resumed=True,
                )
            candidates = self.labeling_candidates(annotator)
            if not candidates:
                return None
            ids = [c for c, _ in candidates]
            weights = [w for _, w in candidates]
            claim_id = self.rng.choices(ids, weights=weights, k=1)[0]
            claim = self.get_claim(claim_id)
            scope = self._scope_for_claim(claim)
            self._lease(TASK_LABELING, claim_id, annotator, scope)
            return LabelingTask(claim=claim, scope=scope)

    def _scope_for_claim(self, claim: Claim) -> KnowledgeScope:
        dictionaries = [self._paragraph_dictionary(claim.source_paragraph_id)]
        pending = False
        claim_dict = self._get_dictionary(self._dictionary_key("claim", claim.claim_id))
        if claim_dict is not None:
            dictionaries.append(claim_dict)
        else:
            row = self.store.conn.execute(
                "SELECT 1 FROM dictionaries WHERE key = ? AND status = 'pending'",
                (self._dictionary_key("claim", claim.claim_id),),
            ).fetchone()
            pending = row is not None
        scope = assemble_scope(self.corpus, claim.source_paragraph_id, dictionaries,
                               self.rng.randrange(2**31))
        scope.dictionary_pending = pending
        return scope

    def allowed_evidence_ids(self, scope: KnowledgeScope) -> set[str]:
        """Scope members plus every paragraph sharing an article with one."""
        allowed = set(scope.all_ids())
        for pid in list(allowed):
            try:
                for p in self.corpus.same_article_paragraphs(pid):
                    allowed.add(p.paragraph_id)
            except NotFoundError:
                continue
        return allowed

    def submit_label(
        self,
        annotator: str,
        claim_id: str,
        label: str,
        evidence_sets: Iterable[Iterable[str]],
        elapsed_seconds: float | None = None,
    ) -> Annotation:
        scope_json = self._require_lease(TASK_LABELING, claim_id, annotator)
        label = normalize_label(label)
        sets = normalize_evidence_sets(label, evidence_sets)
        scope = _scope_from_dict(json.loads(scope_json)) if scope_json else None
        if scope is not None and sets:
            allowed = self.allowed_evidence_ids(scope)
            outside = sorted({p for s in sets for p in s} - allowed)
            if outside:
                raise ValidationError(
                    f"evidence outside the presented scope: {outside}"
                )
        now = self.clock()
        annotation = Annotation(
            annotation_id=f"a{self.store.next_id('annotation'):06d}",
            claim_id=claim_id,
            annotator=annotator,
            label=label,
            evidence_sets=sets,
            elapsed_seconds=elapsed_seconds,
            created_at=now,
            state=STATE_ACTIVE,
        )
        self._insert_annotation(annotation)
        self._release(TASK_LABELING, claim_id)
        self.store.audit(now, annotator, "t2.label", annotation.to_dict())
        return annotation

    def _insert_annotation(self, annotation: Annotation) -> None:
        with self.store.lock, self.store.conn:
            self.store.conn.execute(
                "INSERT INTO annotations VALUES (?, ?, ?, ?, ?, ?, ?, ?)",
                (annotation.annotation_id, annotation.claim_id, annotation.annotator,
                 annotation.label, json.dumps(annotation.evidence_sets),
                 annotation.elapsed_seconds, annotation.created_at, annotation.state),
            )

    # ------------------------------------------------- label aggregation ----

    def annotations_for(self, claim_id: str, active_only: bool = False) -> list[Annotation]:
        rows = self.store.conn.execute(
            f"SELECT {AnnotationStore.ANNOTATION_COLUMNS} FROM annotations "
            "WHERE claim_id = ? ORDER BY annotation_id", (claim_id,),
        ).fetchall()
        annotations = [AnnotationStore.annotation_from_row(r) for r in rows]
        if active_only:
            annotations = [a for a in annotations if a.active]
        return annotations

    def aggregate_label(self, claim_id: str) -> str:
        """Strict-majority label over active annotations."""
        active = self.annotations_for(claim_id, active_only=True)
        if not active:
            raise NotFoundError(f"claim {claim_id!r} has no active annotations")
        labels = [a.label for a in active]
        counts = {label: labels.count(label) for label in set(labels)}
        best = max(counts.values())
        if best * 2 <= len(labels):
            raise LabelConflictError(claim_id, sorted(labels))
        winners = [label for label, n in counts.items() if n == best]
        return winners[0]

    def merge_evidence(self, claim_id: str) -> list[list[str]]:
        """Union of evidence sets from active annotations that agree with
        the aggregated label, deduplicated as sets."""
        label = self.aggregate_label(claim_id)  # conflict propagates
        merged: list[list[str]] = []
        seen: set[frozenset[str]] = set()
        for annotation in self.annotations_for(claim_id, active_only=True):
            if annotation.label != label:
                continue
            for ev in annotation.evidence_sets:
                key = frozenset(ev)
                if key not in seen:
                    seen.add(key)
                    merged.append(sorted(key))
        merged.sort()
        return merged

    def list_conflicts(self) -> list[str]:
        rows = self.store.conn.execute(
            "SELECT DISTINCT claim_id FROM annotations WHERE state != ? "
            "ORDER BY claim_id", (STATE_RETRACTED,),
        ).fetchall()
        conflicted = []
        for (claim_id,) in rows:
            try:
                self.aggregate_label(claim_id)
            except LabelConflictError:
                conflicted.append(claim_id)
        return conflicted

    def resolve_conflict(
        self,
        claim_id: str,
        retract_annotation_ids: Iterable[str],
        resolver: str,
        corrective: CorrectiveAnnotation | None = None,
        error_tag: str = "none",
    ) -> ConflictRecord:
        if error_tag not in ERROR_TAGS:
            raise ValidationError(f"unknown error tag {error_tag!r}")
        try:
            self.aggregate_label(claim_id)
        except LabelConflictError:
            pass
        else:
            raise ValidationError(f"claim {claim_id!r} has no conflict to resolve")
        before = {a.annotation_id: a.state for a in self.annotations_for(claim_id)}
        record, corrective_id = self._apply_corrections(
            claim_id, retract_annotation_ids, resolver, corrective, error_tag,
            verdict="conflict-resolution",
        )
        try:
            # Post-condition: the claim must aggregate cleanly now.
            self.aggregate_label(claim_id)
        except LabelConflictError:
            self._undo_corrections(record, corrective_id, before)
            raise ValidationError(
                f"resolution leaves claim {claim_id!r} without a majority label"
            )
        return record

    def _apply_corrections(
        self,
        claim_id: str,
        retract_annotation_ids: Iterable[str],
        resolver: str,
        corrective: CorrectiveAnnotation | None,
        error_tag: str,
        verdict: str,
    ) -> tuple[ConflictRecord, str | None]:
        self.get_claim(claim_id)
        retract_ids = list(retract_annotation_ids)
        known = {a.annotation_id for a in self.annotations_for(claim_id)}
        unknown = sorted(set(retract_ids) - known)
        if unknown:
            raise ValidationError(f"annotations not on claim {claim_id!r}: {unknown}")
        # Validate the corrective annotation before touching any state.
        corrective_label = None
        corrective_sets: list[list[str]] = []
        if corrective is not None:
            corrective_label = normalize_label(corrective.label)
            corrective_sets = normalize_evidence_sets(
                corrective_label, corrective.evidence_sets
            )
            for pid in {p for s in corrective_sets for p in s}:
                self.corpus.get_paragraph(pid)  # must exist

        now = self.clock()
        with self.store.lock, self.store.conn:
            for aid in retract_ids:
                self.store.conn.execute(
                    "UPDATE annotations SET state = ? WHERE annotation_id = ?",
                    (STATE_RETRACTED, aid),
                )
        corrective_id = None
        if corrective_label is not None:
            corrective_id = f"a{self.store.next_id('annotation'):06d}"
            self._insert_annotation(
                Annotation(
                    annotation_id=corrective_id,
                    claim_id=claim_id,
                    annotator=resolver,
                    label=corrective_label,
                    evidence_sets=corrective_sets,
                    elapsed_seconds=None,
                    created_at=now,
                    state=STATE_CORRECTIVE,
                )
            )
        with self.store.lock, self.store.conn:
            cursor = self.store.conn.execute(
                "INSERT INTO conflicts (claim_id, annotation_ids_json, verdict, "
                "error_tag, resolver, created_at) VALUES (?, ?, ?, ?, ?, ?)",
                (claim_id, json.dumps(retract_ids), verdict, error_tag, resolver, now),
            )
            conflict_id = cursor.lastrowid
        self.store.audit(now, resolver, "conflict.resolve",
                         {"claim_id": claim_id, "retracted": retract_ids,
                          "error_tag": error_tag})
        record = ConflictRecord(
            conflict_id=conflict_id,
            claim_id=claim_id,
            annotation_ids=retract_ids,
            verdict=verdict,
            error_tag=error_tag,
            resolver=resolver,
            created_at=now,
        )
        return record, corrective_id

    def _undo_corrections(
        self,
        record: ConflictRecord,
        corrective_id: str | None,
        previous_states: Mapping[str, str],
    ) -> None:
        with self.store.lock, self.store.conn:
            for aid, state in previous_states.items():
                self.store.conn.execute(
                    "UPDATE annotations SET state = ? WHERE annotation_id = ?",
                    (state, aid),
                )
            if corrective_id is not None:
                self.store.conn.execute(
                    "DELETE FROM annotations WHERE annotation_id = ?",
                    (corrective_id,),
                )
            self.store.conn.execute(
                "DELETE FROM conflicts WHERE conflict_id = ?", (record.conflict_id,)
            )
        self.store.audit(self.clock(), record.resolver, "conflict.rollback",
                         {"claim_id": record.claim_id})

    # ------------------------------------------------------ cleaning loop ----

    def labeled_claims(self) -> dict[str, str]:
        """claim_id -> aggregated label, skipping unresolved conflicts."""
        rows = self.store.conn.execute(
            "SELECT DISTINCT claim_id FROM annotations WHERE state != ?",
            (STATE_RETRACTED,),
        ).fetchall()
        out: dict[str, str] = {}
        for (claim_id,) in rows:
            try:
                out[claim_id] = self.aggregate_label(claim_id)
            except LabelConflictError:
                continue
        return out

    def create_fold(self, seed: int) -> Fold:
        labels = self.labeled_claims()
        if not labels:
            raise ValidationError("no labeled claims to fold")
        traversed = {
            r[0] for r in self.store.conn.execute(
                "SELECT claim_id FROM claims WHERE traversed = 1"
            )
        }
        untraversed = set(labels) - traversed
        if not untraversed:
            raise ValidationError("all claims already traversed")
        assignment = stratified_fold_splits(labels, untraversed, seed)
        now = self.clock()
        with self.store.lock, self.store.conn:
            cursor = self.store.conn.execute(
                "INSERT INTO folds (seed, created_at) VALUES (?, ?)", (seed, now)
            )
            fold_id = cursor.lastrowid
            self.store.conn.executemany(
                "INSERT INTO fold_assignments VALUES (?, ?, ?)",
                [(fold_id, cid, split) for cid, split in sorted(assignment.items())],
            )
            self.store.conn.executemany(
                "UPDATE claims SET traversed = 1 WHERE claim_id = ?",
                [(cid,) for cid, split in assignment.items() if split == "test"],
            )
        self.store.audit(now, "system", "fold.create",
                         {"fold_id": fold_id, "seed": seed})
        return Fold(fold_id=fold_id, seed=seed, assignment=assignment)

    def get_fold(self, fold_id: int) -> Fold:
        row = self.store.conn.execute(
            "SELECT seed FROM folds WHERE fold_id = ?", (fold_id,)
        ).fetchone()
        if row is None:
            raise NotFoundError(f"unknown fold {fold_id}")
        assignment = dict(
            self.store.conn.execute(
                "SELECT claim_id, split FROM fold_assignments WHERE fold_id = ?",
                (fold_id,),
            ).fetchall()
        )
        return Fold(fold_id=fold_id, seed=row[0], assignment=assignment)

    def list_folds(self) -> list[Fold]:
        rows = self.store.conn.execute("SELECT fold_id FROM folds ORDER BY fold_id")
        return [self.get_fold(r[0]) for r in rows.fetchall()]

    def submit_fold_predictions(
        self, fold_id: int, predictions: Mapping[str, str]
    ) -> list[dict]:
        """Queue test-split misclassifications for expert review."""
        fold = self.get_fold(fold_id)
        test_claims = set(fold.split_claims("test"))
        extra = sorted(set(predictions) - test_claims)
        if extra:
            raise ValidationError(f"predictions for non-test claims: {extra}")
        missing = sorted(test_claims - set(predictions))
        if missing:
            raise ValidationError(f"predictions missing for test claims: {missing}")
        queue: list[dict] = []
        now = self.clock()
        with self.store.lock, self.store.conn:
            for claim_id in sorted(test_claims):
                model_label = normalize_label(predictions[claim_id])
                current = self.aggregate_label(claim_id)
                if model_label == current:
                    continue
                self.store.conn.execute(
                    "INSERT OR REPLACE INTO review_queue VALUES (?, ?, ?, 'pending')",
                    (fold_id, claim_id, model_label),
                )
                queue.append(
                    {"claim_id": claim_id, "model_label": model_label,
                     "current_label": current}
                )
        self.store.audit(now, "system", "fold.predictions",
                         {"fold_id": fold_id, "queued": len(queue)})
        return queue

    def review_queue(self, fold_id: int) -> list[dict]:
        rows = self.store.conn.execute(
            "SELECT claim_id, model_label, status FROM review_queue "
            "WHERE fold_id = ? ORDER BY claim_id", (fold_id,),
        ).fetchall()
        return [
            {"claim_id": c, "model_label": m, "status": s} for c, m, s in rows
        ]

    def apply_review(
        self,
        claim_id: str,
        retract_annotation_ids: Iterable[str],
        reviewer: str,
        corrective: CorrectiveAnnotation | None = None,
        error_tag: str = "none",
    ) -> ConflictRecord:
        before = {a.annotation_id: a.state for a in self.annotations_for(claim_id)}
        record, corrective_id = self._apply_corrections(
            claim_id, retract_annotation_ids, reviewer, corrective, error_tag,
            verdict="fold-review",
        )
        try:
            self.aggregate_label(claim_id)  # must remain defined
        except (LabelConflictError, NotFoundError):
            self._undo_corrections(record, corrective_id, before)
            raise ValidationError(
                f"review leaves claim {claim_id!r} without a majority label"
            )
        with self.store.lock, self.store.conn:
            self.store.conn.execute(
                "UPDATE review_queue SET status = 'done' WHERE claim_id = ?",
                (claim_id,),
            )
        return record

    # ----------------------------------------------------------- export ----

    def export_dataset(self, seed: int, kind: str = "dr") -> list[dict]:
        """Leak-free stratified export; refuses while conflicts exist.

        ``dr`` rows keep evidence as paragraph-id sets; ``nli`` rows are
        (claim, context) pairs, one per merged evidence set, with the
        source paragraph standing in as NEI context.
        """
        if kind not in ("dr", "nli"):
            raise ValidationError(f"export kind must be dr|nli, got {kind!r}")
        conflicts = self.list_conflicts()
        if conflicts:
            raise ExportBlockedError(conflicts)
        labels = self.labeled_claims()
        groups: dict[str, list[str]] = {}
        claim_meta: dict[str, Claim] = {}
        for claim_id, label in labels.items():
            claim = self.get_claim(claim_id)
            claim_meta[claim_id] = claim
            groups.setdefault(claim.source_paragraph_id, []).append(claim_id)

        group_labels = {
            gid: [labels[cid] for cid in sorted(members)]
            for gid, members in groups.items()
        }
        split_of_group = group_stratified_splits(group_labels, seed=seed)

        records: list[dict] = []
        for gid in sorted(groups):
            split = split_of_group[gid]
            for claim_id in sorted(groups[gid]):
                claim = claim_meta[claim_id]
                label = labels[claim_id]
                merged = self.merge_evidence(claim_id) if label != NEI else []
                if kind == "dr":
                    records.append(
                        {
                            "id": claim_id,
                            "claim": claim.text,
                            "label": label,
                            "evidence": merged,
                            "split": split,
                            "source_paragraph": claim.source_paragraph_id,
                        }
                    )
                elif label == NEI:
                    records.append(
                        {
                            "id": f"{claim_id}:0",
                            "claim": claim.text,
                            "context": self.corpus.get_paragraph(
                                claim.source_paragraph_id
                            ).text,
                            "label": label,
                            "provenance": "source-paragraph",
                            "split": split,
                        }
                    )
                else:
                    for i, ev_set in enumerate(merged):
                        records.append(
                            {
                                "id": f"{claim_id}:{i}",
                                "claim": claim.text,
                                "context": "\n".join(
                                    self.corpus.get_paragraph(p).text for p in ev_set
                                ),
                                "label": label,
                                "provenance": "gold-evidence",
                                "split": split,
                            }
                        )
        return records

    # ------------------------------------------------------- agreement ----

    def label_matrix(self, fourth_category: str | None = None) -> list[list[str | None]]:
        """Claims x annotators matrix for agreement measures.

        Retracted annotations are missing observations by default; pass
        ``fourth_category`` to map them to an explicit fourth label
        instead (the mapping is a choice, not a given).
        """
        annotators = sorted(
            r[0] for r in self.store.conn.execute(
                "SELECT DISTINCT annotator FROM annotations"
            )
        )
        col = {a: i for i, a in enumerate(annotators)}
        rows = self.store.conn.execute(
            "SELECT claim_id, annotator, label, state FROM annotations "
            "ORDER BY claim_id, annotation_id"
        ).fetchall()
        matrix: dict[str, list[str | None]] = {}
        for claim_id, annotator, label, state in rows:
            row = matrix.setdefault(claim_id, [None] * len(annotators))
            if state == STATE_RETRACTED:
                if fourth_category is not None:
                    row[col[annotator]] = fourth_category
            else:
                row[col[annotator]] = label
        return [matrix[cid] for cid in sorted(matrix)]

    # -------------------------------------------------------- statistics ----

    def cross_annotation_mean(self) -> float:
        counts = self._active_label_counts()
        mutation_ids = [
            r[0] for r in self.store.conn.execute(
                "SELECT claim_id FROM claims WHERE parent_claim_id IS NOT NULL"
            )
        ]
        if not mutation_ids:
            return 0.0
        return sum(counts.get(c, 0) for c in mutation_ids) / len(mutation_ids)


def _scope_to_dict(scope: KnowledgeScope) -> dict:
    return {
        "source_paragraph_id": scope.source_paragraph_id,
        "paragraph_ids": scope.paragraph_ids,
        "seed": scope.seed,
        "provenance": scope.provenance,
        "augmentations": scope.augmentations,
        "dictionary_pending": scope.dictionary_pending,
    }


def _scope_from_dict(payload: dict) -> KnowledgeScope:
    return KnowledgeScope(
        source_paragraph_id=payload["source_paragraph_id"],
        paragraph_ids=payload["paragraph_ids"],
        seed=payload["seed"],
        provenance=payload.get("provenance", {}),
        augmentations=payload.get("augmentations", []),
        dictionary_pending=payload.get("dictionary_pending", False),
    )
