// T2 labeling screen: claim + knowledge scope + evidence matrix.
//
// The source paragraph is always the first scope entry.  Selecting NEI
// clears and disables the matrix (NEI annotations carry no evidence).
// Elapsed time is measured from task display to submit and sent with
// the annotation; no stopwatch is shown to the annotator.

import { ApiClient, ApiError } from "../api";
import { EvidenceMatrix } from "../evidenceMatrix";
import { ScopeView } from "../scopeView";
import { Label, LABELS, LabelingTaskPayload } from "../types";

export class LabelingView {
    readonly element: HTMLElement;
    private matrix: EvidenceMatrix;
    private scopeView: ScopeView;
    private task: LabelingTaskPayload | null = null;
    private shownAt = 0;
    private selected: Label = "SUPPORTS";

    constructor(
        private readonly doc: Document,
        private readonly api: ApiClient,
        private readonly onStatus: (message: string) => void = () => {},
    ) {
        this.element = doc.createElement("div");
        this.element.className = "view labeling-view";
        this.matrix = new EvidenceMatrix(doc);
        this.scopeView = new ScopeView(doc, api, {
            onAugment: (paragraph) => {
                this.matrix.addRow(
                    paragraph.paragraph_id,
                    `${paragraph.paragraph_id} (same article)`,
                );
            },
        });
    }

    async load() {
        this.element.innerHTML = "";
        const { task } = await this.api.labelingTask();
        this.task = task;
        if (!task) {
            const empty = this.doc.createElement("p");
            empty.textContent = "No claims waiting for labels.";
            this.element.appendChild(empty);
            return;
        }
        if (task.resumed) {
            this.onStatus("resuming a task you already hold a lease on");
        }
        this.shownAt = Date.now();

        const claim = this.doc.createElement("blockquote");
        claim.className = "claim-text";
        claim.textContent = task.claim.text;
        this.element.appendChild(claim);

        this.scopeView.render(task.scope);
        this.element.appendChild(this.scopeView.element);

        this.matrix = new EvidenceMatrix(this.doc);
        this.matrix.setRows(
            task.scope.entries.map((e) => ({
                id: e.paragraph_id,
                label: e.paragraph_id,
            })),
        );
        this.element.appendChild(this.buildLabelPicker());
        this.element.appendChild(this.matrix.element);

        const addSet = this.doc.createElement("button");
        addSet.type = "button";
        addSet.id = "add-evidence-set";
        addSet.textContent = "add evidence set";
        addSet.addEventListener("click", () => this.matrix.addColumn());
        this.element.appendChild(addSet);

        const submit = this.doc.createElement("button");
        submit.type = "button";
        submit.id = "submit-label";
        submit.textContent = "submit label";
        submit.addEventListener("click", () => void this.submit());
        this.element.appendChild(submit);
    }

    private buildLabelPicker(): HTMLElement {
        const picker = this.doc.createElement("div");
        picker.className = "label-picker";
        for (const label of LABELS) {
            const wrap = this.doc.createElement("label");
            const radio = this.doc.createElement("input");
            radio.type = "radio";
            radio.name = "verdict";
            radio.value = label;
            radio.checked = label === this.selected;
            radio.addEventListener("change", () => this.onLabelChange(label));
            wrap.appendChild(radio);
            wrap.appendChild(this.doc.createTextNode(label));
            picker.appendChild(wrap);
        }
        return picker;
    }

    onLabelChange(label: Label) {
        this.selected = label;
        // NEI carries no evidence: the matrix empties and locks.
        this.matrix.setEnabled(label !== "NOT ENOUGH INFO");
    }

    currentMatrix(): EvidenceMatrix {
        return this.matrix;
    }

    currentTask(): LabelingTaskPayload | null {
        return this.task;
    }

    async submit() {
        if (!this.task) {
            return;
        }
        const elapsed = (Date.now() - this.shownAt) / 1000;
        const sets = this.selected === "NOT ENOUGH INFO" ? [] : this.matrix.evidenceSets();
        try {
            await this.api.submitLabel(
                this.task.claim.claim_id,
                this.selected,
                sets,
                elapsed,
            );
        } catch (err) {
            if (err instanceof ApiError) {
                this.onStatus(`rejected: ${err.message}`);
                return;
            }
            throw err;
        }
        this.onStatus("label stored");
        await this.load();
    }
}
