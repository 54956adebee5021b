// Shell: token entry, tab navigation, one active view at a time.

import { ApiClient } from "./api";
import { ConflictView } from "./views/conflicts";
import { ExtractionView } from "./views/extraction";
import { LabelingView } from "./views/labeling";
import { MutationView } from "./views/mutation";

type TabName = "extract" | "mutate" | "label" | "conflicts";

export class App {
    readonly element: HTMLElement;
    private api: ApiClient;
    private status: HTMLElement;
    private content: HTMLElement;
    private extraction: ExtractionView;
    private mutation: MutationView;
    private labeling: LabelingView;
    private conflicts: ConflictView;

    constructor(private readonly doc: Document, baseUrl: string) {
        this.api = new ApiClient(baseUrl, "");
        this.element = doc.createElement("div");
        this.element.id = "app";
        this.status = doc.createElement("div");
        this.status.id = "status-line";
        this.content = doc.createElement("main");

        const report = (message: string) => this.report(message);
        this.extraction = new ExtractionView(doc, this.api, report, (claimId) => {
            // after a claim is stored the annotator moves straight to T1b
            const box = this.extraction.element.querySelector<HTMLTextAreaElement>(
                "#claim-text",
            );
            this.mutation.start(claimId, box?.value ?? "");
            this.show("mutate");
        });
        this.mutation = new MutationView(doc, this.api, report, () => {
            void this.extraction.load();
            this.show("extract");
        });
        this.labeling = new LabelingView(doc, this.api, report);
        this.conflicts = new ConflictView(doc, this.api, report);

        this.element.appendChild(this.buildLogin());
        this.element.appendChild(this.buildTabs());
        this.element.appendChild(this.status);
        this.element.appendChild(this.content);
    }

    private buildLogin(): HTMLElement {
        const bar = this.doc.createElement("div");
        bar.id = "login-bar";
        const input = this.doc.createElement("input");
        input.type = "password";
        input.placeholder = "annotator token";
        const stored = this.doc.defaultView?.sessionStorage.getItem("token") ?? "";
        input.value = stored;
        this.api.setToken(stored);
        const apply = this.doc.createElement("button");
        apply.type = "button";
        apply.textContent = "sign in";
        apply.addEventListener("click", async () => {
            this.api.setToken(input.value);
            this.doc.defaultView?.sessionStorage.setItem("token", input.value);
            try {
                await this.api.health();
                this.report("signed in");
                await this.extraction.load();
                this.show("extract");
            } catch {
                this.report("sign-in failed: check the token");
            }
        });
        bar.appendChild(input);
        bar.appendChild(apply);
        return bar;
    }

    private buildTabs(): HTMLElement {
        const nav = this.doc.createElement("nav");
        const tabs: [TabName, string][] = [
            ["extract", "extract (T1a)"],
            ["mutate", "mutate (T1b)"],
            ["label", "label (T2)"],
            ["conflicts", "conflicts"],
        ];
        for (const [name, title] of tabs) {
            const button = this.doc.createElement("button");
            button.type = "button";
            button.dataset.tab = name;
            button.textContent = title;
            button.addEventListener("click", () => void this.open(name));
            nav.appendChild(button);
        }
        return nav;
    }

    async open(tab: TabName) {
        if (tab === "extract") {
            await this.extraction.load();
        } else if (tab === "label") {
            await this.labeling.load();
        } else if (tab === "conflicts") {
            await this.conflicts.load();
        }
        this.show(tab);
    }

    private show(tab: TabName) {
        this.content.innerHTML = "";
        const view = {
            extract: this.extraction,
            mutate: this.mutation,
            label: this.labeling,
            conflicts: this.conflicts,
        }[tab];
        this.content.appendChild(view.element);
    }

    private report(message: string) {
        this.status.textContent = message;
    }
}
