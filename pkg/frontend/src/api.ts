// Thin typed client over the annotation service JSON API.
//
// Every call awaits server acceptance before the UI reflects it; there
// is deliberately no optimistic state.

import {
    AnnotationPayload,
    ClaimDetailPayload,
    ClaimPayload,
    ExtractionTaskPayload,
    LabelingTaskPayload,
    ParagraphPayload,
} from "./types";

export class ApiError extends Error {
    constructor(
        public readonly status: number,
        public readonly detail: unknown,
    ) {
        super(typeof detail === "string" ? detail : JSON.stringify(detail));
        this.name = "ApiError";
    }
}

export class ApiClient {
    constructor(
        private readonly baseUrl: string,
        private token: string,
    ) {}

    setToken(token: string) {
        this.token = token;
    }

    private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
        const response = await fetch(this.baseUrl + path, {
            method,
            headers: {
                "Authorization": `Bearer ${this.token}`,
                ...(body !== undefined ? { "Content-Type": "application/json" } : {}),
            },
            body: body !== undefined ? JSON.stringify(body) : undefined,
        });
        const text = await response.text();
        let payload: unknown = text;
        try {
            payload = text ? JSON.parse(text) : null;
        } catch {
            // non-JSON body (e.g. ndjson export) stays a string
        }
        if (!response.ok) {
            const detail =
                payload && typeof payload === "object" && "detail" in payload
                    ? (payload as { detail: unknown }).detail
                    : payload;
            throw new ApiError(response.status, detail);
        }
        return payload as T;
    }

    health(): Promise<{ status: string; paragraphs: number }> {
        return this.request("GET", "/health");
    }

    // T1a ------------------------------------------------------------------

    extractionTask(): Promise<{ task: ExtractionTaskPayload | null }> {
        return this.request("GET", "/t1a/task");
    }

    submitClaim(paragraphId: string, text: string): Promise<{ claim: ClaimPayload }> {
        return this.request("POST", "/t1a/claim", { paragraph_id: paragraphId, text });
    }

    skipExtraction(paragraphId: string): Promise<{ skipped: string }> {
        return this.request("POST", "/t1a/skip", { paragraph_id: paragraphId });
    }

    // T1b ------------------------------------------------------------------

    submitMutations(
        claimId: string,
        mutations: { text: string; type: string }[],
    ): Promise<{ claims: ClaimPayload[]; warnings: string[] }> {
        return this.request("POST", "/t1b/mutations", { claim_id: claimId, mutations });
    }

    // T2 -------------------------------------------------------------------

    labelingTask(): Promise<{ task: LabelingTaskPayload | null }> {
        return this.request("GET", "/t2/task");
    }

    submitLabel(
        claimId: string,
        label: string,
        evidenceSets: string[][],
        elapsedSeconds: number,
    ): Promise<{ annotation: AnnotationPayload }> {
        return this.request("POST", "/t2/label", {
            claim_id: claimId,
            label,
            evidence_sets: evidenceSets,
            elapsed_seconds: elapsedSeconds,
        });
    }

    // claims / conflicts -----------------------------------------------------

    claim(claimId: string): Promise<ClaimDetailPayload> {
        return this.request("GET", `/claims/${claimId}`);
    }

    conflicts(): Promise<{ conflicts: string[] }> {
        return this.request("GET", "/conflicts");
    }

    resolveConflict(
        claimId: string,
        retract: string[],
        errorTag: string,
        corrective?: { label: string; evidence_sets: string[][] },
    ): Promise<{ conflict_id: number }> {
        return this.request("POST", `/conflicts/${claimId}/resolve`, {
            retract,
            error_tag: errorTag,
            corrective: corrective ?? null,
        });
    }

    // corpus -----------------------------------------------------------------

    articleParagraphs(paragraphId: string): Promise<{ paragraphs: ParagraphPayload[] }> {
        return this.request("GET", `/paragraphs/${paragraphId}/article`);
    }

    search(q: string, k = 10): Promise<{ results: ParagraphPayload[] }> {
        const query = new URLSearchParams({ q, k: String(k) });
        return this.request("GET", `/search?${query}`);
    }
}
