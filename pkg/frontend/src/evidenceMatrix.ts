// Evidence matrix: rows are scope paragraphs, columns are evidence
// sets, one checkbox per cell.  A paragraph belongs to set j iff its
// checkbox in column j is checked; empty columns are dropped on submit.

export function serializeMatrix(rowIds: string[], checks: boolean[][]): string[][] {
    const columnCount = checks[0]?.length ?? 0;
    const sets: string[][] = [];
    for (let col = 0; col < columnCount; col++) {
        const members = rowIds.filter((_, row) => checks[row][col]);
        if (members.length > 0) {
            sets.push(members);
        }
    }
    return sets;
}

export class EvidenceMatrix {
    readonly element: HTMLTableElement;
    private rowIds: string[] = [];
    private rowLabels = new Map<string, string>();
    private columns = 1;
    private enabled = true;

    constructor(private readonly doc: Document) {
        this.element = doc.createElement("table");
        this.element.className = "evidence-matrix";
    }

    setRows(rows: { id: string; label: string }[]) {
        const previous = this.snapshotChecks();
        this.rowIds = rows.map((r) => r.id);
        this.rowLabels = new Map(rows.map((r) => [r.id, r.label]));
        this.render(previous);
    }

    addRow(id: string, label: string) {
        if (this.rowIds.includes(id)) {
            return;
        }
        const previous = this.snapshotChecks();
        this.rowIds.push(id);
        this.rowLabels.set(id, label);
        this.render(previous);
    }

    addColumn() {
        const previous = this.snapshotChecks();
        this.columns += 1;
        this.render(previous);
    }

    setEnabled(enabled: boolean) {
        this.enabled = enabled;
        if (!enabled) {
            this.clear();
        }
        for (const box of this.checkboxes()) {
            box.disabled = !enabled;
        }
    }

    isEnabled(): boolean {
        return this.enabled;
    }

    clear() {
        for (const box of this.checkboxes()) {
            box.checked = false;
        }
    }

    evidenceSets(): string[][] {
        return serializeMatrix(this.rowIds, this.checkMatrix());
    }

    setChecked(rowId: string, column: number, checked: boolean) {
        const row = this.rowIds.indexOf(rowId);
        const box = this.element.querySelector<HTMLInputElement>(
            `input[data-row="${row}"][data-col="${column}"]`,
        );
        if (box && !box.disabled) {
            box.checked = checked;
        }
    }

    private checkboxes(): HTMLInputElement[] {
        return Array.from(this.element.querySelectorAll("input[type=checkbox]"));
    }

    private checkMatrix(): boolean[][] {
        const matrix: boolean[][] = this.rowIds.map(() =>
            new Array(this.columns).fill(false),
        );
        for (const box of this.checkboxes()) {
            const row = Number(box.dataset.row);
            const col = Number(box.dataset.col);
            matrix[row][col] = box.checked;
        }
        return matrix;
    }

    private snapshotChecks(): Map<string, boolean[]> {
        const snapshot = new Map<string, boolean[]>();
        const matrix = this.checkMatrix();
        this.rowIds.forEach((id, row) => snapshot.set(id, matrix[row] ?? []));
        return snapshot;
    }

    private render(previous: Map<string, boolean[]>) {
        this.element.innerHTML = "";
        const head = this.doc.createElement("tr");
        head.appendChild(this.doc.createElement("th"));
        for (let col = 0; col < this.columns; col++) {
            const th = this.doc.createElement("th");
            th.textContent = `set ${col + 1}`;
            head.appendChild(th);
        }
        this.element.appendChild(head);

        this.rowIds.forEach((id, row) => {
            const tr = this.doc.createElement("tr");
            const cell = this.doc.createElement("td");
            cell.textContent = this.rowLabels.get(id) ?? id;
            cell.className = "evidence-row-label";
            tr.appendChild(cell);
            const kept = previous.get(id) ?? [];
            for (let col = 0; col < this.columns; col++) {
                const td = this.doc.createElement("td");
                const box = this.doc.createElement("input");
                box.type = "checkbox";
                box.dataset.row = String(row);
                box.dataset.col = String(col);
                box.checked = kept[col] ?? false;
                box.disabled = !this.enabled;
                td.appendChild(box);
                tr.appendChild(td);
            }
            this.element.appendChild(tr);
        });
    }
}
