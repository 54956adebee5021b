// T1b mutation screen: rewrite the fresh claim under the six mutation
// types, each tagged with its own loud color so types are hard to mix up.

import { ApiClient, ApiError } from "../api";
import { MUTATION_TYPES, MutationType } from "../types";

export const MUTATION_COLORS: Record<MutationType, string> = {
    "rephrase": "#1565c0",
    "negate": "#c62828",
    "substitute-similar": "#ef6c00",
    "substitute-dissimilar": "#6a1b9a",
    "generalize": "#2e7d32",
    "specify": "#00838f",
};

interface MutationRow {
    select: HTMLSelectElement;
    textarea: HTMLTextAreaElement;
    tag: HTMLSpanElement;
}

export class MutationView {
    readonly element: HTMLElement;
    private rows: MutationRow[] = [];
    private rowContainer: HTMLElement;
    private claimId: string | null = null;

    constructor(
        private readonly doc: Document,
        private readonly api: ApiClient,
        private readonly onStatus: (message: string) => void = () => {},
        private readonly onDone: () => void = () => {},
    ) {
        this.element = doc.createElement("div");
        this.element.className = "view mutation-view";
        this.rowContainer = doc.createElement("div");
    }

    start(claimId: string, claimText: string) {
        this.claimId = claimId;
        this.rows = [];
        this.element.innerHTML = "";

        const original = this.doc.createElement("blockquote");
        original.textContent = claimText;
        this.element.appendChild(original);

        this.rowContainer = this.doc.createElement("div");
        this.element.appendChild(this.rowContainer);
        this.addRow();

        const add = this.doc.createElement("button");
        add.type = "button";
        add.textContent = "add mutation";
        add.addEventListener("click", () => this.addRow());
        this.element.appendChild(add);

        const submit = this.doc.createElement("button");
        submit.type = "button";
        submit.id = "submit-mutations";
        submit.textContent = "submit mutations";
        submit.addEventListener("click", () => void this.submit());
        this.element.appendChild(submit);
    }

    addRow() {
        const row = this.doc.createElement("div");
        row.className = "mutation-row";

        const tag = this.doc.createElement("span");
        tag.className = "mutation-tag";

        const select = this.doc.createElement("select");
        for (const type of MUTATION_TYPES) {
            const option = this.doc.createElement("option");
            option.value = type;
            option.textContent = type;
            select.appendChild(option);
        }
        const paint = () => {
            const type = select.value as MutationType;
            tag.textContent = type;
            tag.style.backgroundColor = MUTATION_COLORS[type];
        };
        select.addEventListener("change", paint);
        paint();

        const textarea = this.doc.createElement("textarea");
        row.appendChild(tag);
        row.appendChild(select);
        row.appendChild(textarea);
        this.rowContainer.appendChild(row);
        this.rows.push({ select, textarea, tag });
    }

    async submit() {
        if (!this.claimId) {
            return;
        }
        const mutations = this.rows
            .filter((r) => r.textarea.value.trim().length > 0)
            .map((r) => ({ text: r.textarea.value, type: r.select.value }));
        try {
            const { claims, warnings } = await this.api.submitMutations(
                this.claimId,
                mutations,
            );
            const note = warnings.length ? ` (${warnings.length} warnings)` : "";
            this.onStatus(`${claims.length} mutations stored${note}`);
            this.onDone();
        } catch (err) {
            if (err instanceof ApiError) {
                this.onStatus(`rejected: ${err.message}`);
                return;
            }
            throw err;
        }
    }
}
