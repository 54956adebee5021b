// Knowledge-scope presentation: the source paragraph renders first and
// expanded, every other entry collapses behind a <details> with a
// provenance badge; a per-entry expander fetches same-article
// paragraphs, which the caller may add to the scope as augmentations.

import { ApiClient } from "./api";
import { ParagraphPayload, ScopePayload } from "./types";

export interface ScopeViewOptions {
    onAugment?: (paragraph: ParagraphPayload) => void;
}

function badgeClass(provenance: string): string {
    if (provenance === "source") {
        return "badge badge-source";
    }
    if (provenance.startsWith("keyword")) {
        return "badge badge-keyword";
    }
    if (provenance.startsWith("semantic")) {
        return "badge badge-semantic";
    }
    return "badge";
}

export class ScopeView {
    readonly element: HTMLElement;

    constructor(
        private readonly doc: Document,
        private readonly api: ApiClient,
        private readonly options: ScopeViewOptions = {},
    ) {
        this.element = doc.createElement("div");
        this.element.className = "scope-view";
    }

    render(scope: ScopePayload) {
        this.element.innerHTML = "";
        if (scope.dictionary_pending) {
            const note = this.doc.createElement("p");
            note.className = "pending-note";
            note.textContent =
                "Context for this claim is still being computed; " +
                "showing the source dictionary only.";
            this.element.appendChild(note);
        }
        scope.entries.forEach((entry, position) => {
            this.element.appendChild(this.renderEntry(entry, position === 0));
        });
    }

    private renderEntry(entry: ParagraphPayload, isSource: boolean): HTMLElement {
        const wrapper = this.doc.createElement(isSource ? "section" : "details") as
            | HTMLElement
            | HTMLDetailsElement;
        wrapper.className = isSource ? "scope-entry scope-source" : "scope-entry";
        wrapper.dataset.paragraphId = entry.paragraph_id;

        const heading = this.doc.createElement(isSource ? "h3" : "summary");
        const badge = this.doc.createElement("span");
        badge.className = badgeClass(entry.provenance ?? "");
        badge.textContent = entry.provenance || "dictionary";
        heading.appendChild(badge);
        heading.appendChild(
            this.doc.createTextNode(
                ` ${entry.paragraph_id} — ${new Date(entry.published_at * 1000)
                    .toISOString()
                    .slice(0, 10)}`,
            ),
        );
        wrapper.appendChild(heading);

        const text = this.doc.createElement("p");
        text.className = "scope-text";
        text.textContent = entry.text;
        wrapper.appendChild(text);

        wrapper.appendChild(this.renderAugmentExpander(entry));
        return wrapper;
    }

    private renderAugmentExpander(entry: ParagraphPayload): HTMLElement {
        const details = this.doc.createElement("details");
        details.className = "same-article";
        const summary = this.doc.createElement("summary");
        summary.textContent = "same-article paragraphs";
        details.appendChild(summary);
        const list = this.doc.createElement("div");
        details.appendChild(list);

        let loaded = false;
        details.addEventListener("toggle", async () => {
            if (!details.open || loaded) {
                return;
            }
            loaded = true;
            const { paragraphs } = await this.api.articleParagraphs(entry.paragraph_id);
            for (const paragraph of paragraphs) {
                if (paragraph.paragraph_id === entry.paragraph_id) {
                    continue;
                }
                const row = this.doc.createElement("div");
                row.className = "augment-row";
                const text = this.doc.createElement("span");
                text.textContent = `[${paragraph.rank}] ${paragraph.text}`;
                row.appendChild(text);
                if (this.options.onAugment) {
                    const button = this.doc.createElement("button");
                    button.type = "button";
                    button.textContent = "add to scope";
                    button.addEventListener("click", () => {
                        this.options.onAugment?.(paragraph);
                        button.disabled = true;
                    });
                    row.appendChild(button);
                }
                list.appendChild(row);
            }
        });
        return details;
    }
}
