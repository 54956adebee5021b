// T1a claim extraction: source paragraph + dictionary scope, a claim
// box, a Skip button, and a view-only corpus search panel.  Search
// results widen the annotator's reading, never the evidence scope.

import { ApiClient, ApiError } from "../api";
import { ScopeView } from "../scopeView";
import { ExtractionTaskPayload } from "../types";

export class ExtractionView {
    readonly element: HTMLElement;
    private scopeView: ScopeView;
    private task: ExtractionTaskPayload | null = null;
    private onSubmitted: (claimId: string) => void;

    constructor(
        private readonly doc: Document,
        private readonly api: ApiClient,
        private readonly onStatus: (message: string) => void = () => {},
        onSubmitted: (claimId: string) => void = () => {},
    ) {
        this.element = doc.createElement("div");
        this.element.className = "view extraction-view";
        this.scopeView = new ScopeView(doc, api);
        this.onSubmitted = onSubmitted;
    }

    async load() {
        this.element.innerHTML = "";
        const { task } = await this.api.extractionTask();
        this.task = task;
        if (!task) {
            const empty = this.doc.createElement("p");
            empty.textContent = "No preselected paragraphs are waiting.";
            this.element.appendChild(empty);
            return;
        }
        if (task.resumed) {
            this.onStatus("resuming a task you already hold a lease on");
        }

        this.scopeView.render(task.scope);
        this.element.appendChild(this.scopeView.element);

        const box = this.doc.createElement("textarea");
        box.id = "claim-text";
        box.placeholder = "A simple true claim supported by the context above…";
        this.element.appendChild(box);

        const submit = this.doc.createElement("button");
        submit.type = "button";
        submit.id = "submit-claim";
        submit.textContent = "submit claim";
        submit.addEventListener("click", () => void this.submit(box.value));
        this.element.appendChild(submit);

        const skip = this.doc.createElement("button");
        skip.type = "button";
        skip.id = "skip-paragraph";
        skip.textContent = "Skip";
        skip.addEventListener("click", () => void this.skip());
        this.element.appendChild(skip);

        this.element.appendChild(this.buildSearchPanel());
    }

    private buildSearchPanel(): HTMLElement {
        const panel = this.doc.createElement("details");
        panel.className = "search-panel";
        const summary = this.doc.createElement("summary");
        summary.textContent = "corpus search (read-only)";
        panel.appendChild(summary);

        const input = this.doc.createElement("input");
        input.type = "search";
        panel.appendChild(input);
        const go = this.doc.createElement("button");
        go.type = "button";
        go.textContent = "search";
        panel.appendChild(go);
        const results = this.doc.createElement("div");
        results.className = "search-results";
        panel.appendChild(results);

        go.addEventListener("click", async () => {
            results.innerHTML = "";
            const { results: hits } = await this.api.search(input.value, 10);
            for (const hit of hits) {
                const row = this.doc.createElement("p");
                row.textContent = `${hit.paragraph_id}: ${hit.text}`;
                results.appendChild(row);
            }
        });
        return panel;
    }

    async submit(text: string) {
        if (!this.task) {
            return;
        }
        try {
            const { claim } = await this.api.submitClaim(
                this.task.paragraph.paragraph_id,
                text,
            );
            this.onStatus(`claim ${claim.claim_id} stored`);
            this.onSubmitted(claim.claim_id);
        } catch (err) {
            if (err instanceof ApiError) {
                this.onStatus(`rejected: ${err.message}`);
                return;
            }
            throw err;
        }
    }

    async skip() {
        if (!this.task) {
            return;
        }
        await this.api.skipExtraction(this.task.paragraph.paragraph_id);
        this.onStatus("paragraph skipped");
        await this.load();
    }
}
