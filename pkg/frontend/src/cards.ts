// Cards panel: the registry as a table, with lock/unlock actions for roles
// that are allowed to change card state.  Viewers get a read-only table; the
// server enforces the same rule, the UI just doesn't offer what would 403.

import type { CampusApi, CardRow, Role } from "./api.js";

export function canOperate(role: Role): boolean {
  return role === "OPERATOR" || role === "ADMIN";
}

// holder_type arrives as the on-card code
const HOLDER_NAMES: Record<number, string> = {
  0: "personnel",
  1: "student",
  2: "visitor",
};

export class CardsPanel {
  constructor(
    private root: HTMLElement,
    private api: CampusApi,
    private role: Role,
  ) {}

  async refresh(): Promise<void> {
    const rows = await this.api.cards();
    this.render(rows);
  }

  render(rows: CardRow[]): void {
    this.root.textContent = "";
    const table = document.createElement("table");
    table.className = "cards";
    table.appendChild(header(canOperate(this.role)));
    const body = document.createElement("tbody");
    for (const row of rows) {
      body.appendChild(this.cardRow(row));
    }
    table.appendChild(body);
    this.root.appendChild(table);
  }

  private cardRow(row: CardRow): HTMLElement {
    const tr = document.createElement("tr");
    tr.dataset.uid = row.uid;
    cell(tr, "uid", row.uid);
    cell(tr, "pid", String(row.personal_id));
    cell(tr, "holder", HOLDER_NAMES[row.holder_type] ?? String(row.holder_type));
    cell(tr, "issue", String(row.issue_number));
    cell(tr, "state", row.locked ? "LOCKED" : row.active ? "active" : "inactive");
    cell(tr, "gates", row.gates.join(" "));
    cell(tr, "seen", lastSeen(row));
    if (canOperate(this.role)) {
      const td = document.createElement("td");
      td.className = "actions";
      td.appendChild(this.actionButton(row));
      tr.appendChild(td);
    }
    return tr;
  }

  private actionButton(row: CardRow): HTMLButtonElement {
    const button = document.createElement("button");
    button.className = row.locked ? "unlock" : "lock";
    button.textContent = row.locked ? "Unlock" : "Lock";
    button.addEventListener("click", () => {
      const call = row.locked ? this.api.unlockCard(row.uid) : this.api.lockCard(row.uid);
      // Re-read after the server answers so the row shows what actually
      // happened, not what we hoped for.
      void call.then(() => this.refresh());
    });
    return button;
  }
}

function header(withActions: boolean): HTMLElement {
  const thead = document.createElement("thead");
  const tr = document.createElement("tr");
  const titles = ["UID", "Person", "Holder", "Issue", "State", "Gates", "Last seen"];
  if (withActions) titles.push("");
  for (const title of titles) {
    const th = document.createElement("th");
    th.textContent = title;
    tr.appendChild(th);
  }
  thead.appendChild(tr);
  return thead;
}

function cell(tr: HTMLElement, className: string, text: string): void {
  const td = document.createElement("td");
  td.className = className;
  td.textContent = text;
  tr.appendChild(td);
}

function lastSeen(row: CardRow): string {
  if (row.last_seen_ts === null) return "never";
  const when = new Date(row.last_seen_ts * 1000).toISOString().slice(0, 16).replace("T", " ");
  return row.last_seen_gate === null ? when : `${when} @ gate ${row.last_seen_gate}`;
}
