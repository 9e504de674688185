// Reports panel: runs an event query, renders the result as a table, and
// offers the same bytes as a CSV download.  The table is built from the
// fetched CSV text itself — one source, so screen and file cannot drift.

import type { CampusApi, EventQuery } from "./api.js";

export const CSV_COLUMNS = ["seq", "terminal", "gate", "ts", "uid", "personal_id", "kind", "detail"];

type Save = (filename: string, text: string) => void;

export class ReportsPanel {
  private lastCsv = "";

  // save is injected: the browser path creates an object URL, tests capture
  // the text instead.
  constructor(
    private root: HTMLElement,
    private api: CampusApi,
    private save: Save = browserSave,
  ) {}

  get csv(): string {
    return this.lastCsv;
  }

  async run(query: EventQuery): Promise<void> {
    this.lastCsv = await this.api.reportCsv(query);
    this.render();
  }

  download(filename = "events.csv"): void {
    this.save(filename, this.lastCsv);
  }

  render(): void {
    this.root.textContent = "";

    const bar = document.createElement("div");
    bar.className = "report-bar";
    const rows = csvRows(this.lastCsv);
    const count = document.createElement("span");
    count.className = "count";
    count.textContent = `${rows.length} events`;
    bar.appendChild(count);
    const button = document.createElement("button");
    button.className = "download";
    button.textContent = "Download CSV";
    button.addEventListener("click", () => this.download());
    bar.appendChild(button);
    this.root.appendChild(bar);

    const table = document.createElement("table");
    table.className = "report";
    const thead = document.createElement("thead");
    const headRow = document.createElement("tr");
    for (const name of CSV_COLUMNS) {
      const th = document.createElement("th");
      th.textContent = name;
      headRow.appendChild(th);
    }
    thead.appendChild(headRow);
    table.appendChild(thead);

    const body = document.createElement("tbody");
    for (const fields of rows) {
      const tr = document.createElement("tr");
      for (const field of fields) {
        const td = document.createElement("td");
        td.textContent = field;
        tr.appendChild(td);
      }
      body.appendChild(tr);
    }
    table.appendChild(body);
    this.root.appendChild(table);
  }
}

// The server joins rows with "\n" and never quotes (every field is a number,
// hex UID, or enum name), so a line/comma split reproduces the fields
// exactly.  The header line is dropped; \r is stripped defensively.
export function csvRows(text: string): string[][] {
  const lines = text.split("\n").map((line) => line.replace(/\r$/, ""));
  while (lines.length > 0 && lines[lines.length - 1] === "") lines.pop();
  return lines.slice(1).map((line) => line.split(","));
}

function browserSave(filename: string, text: string): void {
  const blob = new Blob([text], { type: "text/csv" });
  const url = URL.createObjectURL(blob);
  const anchor = document.createElement("a");
  anchor.href = url;
  anchor.download = filename;
  anchor.click();
  URL.revokeObjectURL(url);
}
