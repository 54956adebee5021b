// Payload shapes of the annotation service JSON API.

export interface ParagraphPayload {
    paragraph_id: string;
    article_id: string;
    rank: number;
    text: string;
    published_at: number;
    provenance?: string;
    score?: number;
}

export interface ScopePayload {
    source_paragraph_id: string;
    entries: ParagraphPayload[];
    dictionary_pending: boolean;
}

export interface ClaimPayload {
    claim_id: string;
    text: string;
    source_paragraph_id: string;
    formulated_at: number;
    parent_claim_id: string | null;
    mutation_type: string;
    author: string;
}

export interface AnnotationPayload {
    annotation_id: string;
    claim_id: string;
    annotator: string;
    label: string;
    evidence_sets: string[][];
    elapsed_seconds: number | null;
    state: string;
}

export interface ExtractionTaskPayload {
    paragraph: ParagraphPayload;
    scope: ScopePayload;
    resumed?: boolean;
}

export interface LabelingTaskPayload {
    claim: ClaimPayload;
    scope: ScopePayload;
    resumed?: boolean;
}

export interface ClaimDetailPayload {
    claim: ClaimPayload;
    annotations: AnnotationPayload[];
    aggregated_label: string | null;
    merged_evidence: string[][];
    conflict: boolean;
}

export type Label = "SUPPORTS" | "REFUTES" | "NOT ENOUGH INFO";

export const LABELS: Label[] = ["SUPPORTS", "REFUTES", "NOT ENOUGH INFO"];

export const MUTATION_TYPES = [
    "rephrase",
    "negate",
    "substitute-similar",
    "substitute-dissimilar",
    "generalize",
    "specify",
] as const;

export type MutationType = (typeof MUTATION_TYPES)[number];

export const ERROR_TAGS = [
    "exclusion-misassumption",
    "general",
    "reasoning",
    "extended-evidence",
    "insufficient-evidence",
    "none",
] as const;
