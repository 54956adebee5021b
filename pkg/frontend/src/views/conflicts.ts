// Expert conflict-resolution screen: inspect the conflicting
// annotations of a claim, retract offenders, optionally add one
// corrective annotation, and tag the error type.

import { ApiClient, ApiError } from "../api";
import { ERROR_TAGS, LABELS } from "../types";

export class ConflictView {
    readonly element: HTMLElement;

    constructor(
        private readonly doc: Document,
        private readonly api: ApiClient,
        private readonly onStatus: (message: string) => void = () => {},
    ) {
        this.element = doc.createElement("div");
        this.element.className = "view conflict-view";
    }

    async load() {
        this.element.innerHTML = "";
        const { conflicts } = await this.api.conflicts();
        if (conflicts.length === 0) {
            const empty = this.doc.createElement("p");
            empty.textContent = "No unresolved conflicts.";
            this.element.appendChild(empty);
            return;
        }
        for (const claimId of conflicts) {
            this.element.appendChild(await this.renderConflict(claimId));
        }
    }

    private async renderConflict(claimId: string): Promise<HTMLElement> {
        const detail = await this.api.claim(claimId);
        const card = this.doc.createElement("section");
        card.className = "conflict-card";

        const heading = this.doc.createElement("h3");
        heading.textContent = `${claimId}: ${detail.claim.text}`;
        card.appendChild(heading);

        const retractBoxes: { box: HTMLInputElement; id: string }[] = [];
        for (const annotation of detail.annotations) {
            if (annotation.state === "retracted") {
                continue;
            }
            const row = this.doc.createElement("label");
            row.className = "conflict-annotation";
            const box = this.doc.createElement("input");
            box.type = "checkbox";
            retractBoxes.push({ box, id: annotation.annotation_id });
            row.appendChild(box);
            row.appendChild(
                this.doc.createTextNode(
                    ` retract ${annotation.annotation_id} (${annotation.annotator}): ` +
                    `${annotation.label} ${JSON.stringify(annotation.evidence_sets)}`,
                ),
            );
            card.appendChild(row);
        }

        const tagSelect = this.doc.createElement("select");
        for (const tag of ERROR_TAGS) {
            const option = this.doc.createElement("option");
            option.value = tag;
            option.textContent = tag;
            tagSelect.appendChild(option);
        }
        card.appendChild(tagSelect);

        const correctiveToggle = this.doc.createElement("input");
        correctiveToggle.type = "checkbox";
        const correctiveLabel = this.doc.createElement("select");
        for (const label of LABELS) {
            const option = this.doc.createElement("option");
            option.value = label;
            option.textContent = label;
            correctiveLabel.appendChild(option);
        }
        correctiveLabel.value = "NOT ENOUGH INFO";
        const corrective = this.doc.createElement("label");
        corrective.appendChild(correctiveToggle);
        corrective.appendChild(this.doc.createTextNode(" add corrective annotation "));
        corrective.appendChild(correctiveLabel);
        card.appendChild(corrective);

        const resolve = this.doc.createElement("button");
        resolve.type = "button";
        resolve.textContent = "resolve";
        resolve.addEventListener("click", async () => {
            const retract = retractBoxes.filter((r) => r.box.checked).map((r) => r.id);
            const body = correctiveToggle.checked
                ? { label: correctiveLabel.value, evidence_sets: [] }
                : undefined;
            try {
                await this.api.resolveConflict(claimId, retract, tagSelect.value, body);
                this.onStatus(`resolved ${claimId}`);
                await this.load();
            } catch (err) {
                if (err instanceof ApiError) {
                    this.onStatus(`rejected: ${err.message}`);
                    return;
                }
                throw err;
            }
        });
        card.appendChild(resolve);
        return card;
    }
}
