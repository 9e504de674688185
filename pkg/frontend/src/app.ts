// Application wiring: login, then the three panels plus the live feed.
// Each panel owns its DOM subtree; this file only connects them.

import { ApiError, CampusApi } from "./api.js";
import type { Session } from "./api.js";
import { CardsPanel } from "./cards.js";
import { DoorWall } from "./doorwall.js";
import { ReportsPanel } from "./reports.js";
import { subscribe } from "./sse.js";

const api = new CampusApi("");

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing element #${id}`);
  return node;
}

function showLoginError(message: string): void {
  el("login-error").textContent = message;
}

async function onLogin(event: Event): Promise<void> {
  event.preventDefault();
  const username = (el("login-user") as HTMLInputElement).value;
  const password = (el("login-pass") as HTMLInputElement).value;
  try {
    const session = await api.login(username, password);
    el("login").hidden = true;
    el("main").hidden = false;
    boot(session);
  } catch (err) {
    showLoginError(err instanceof ApiError ? err.message : "login failed");
  }
}

function boot(session: Session): void {
  el("who").textContent = `${session.username} (${session.role})`;

  const wall = new DoorWall(el("doors"), api);
  wall.start();

  const cards = new CardsPanel(el("cards"), api, session.role);
  void cards.refresh();

  const reports = new ReportsPanel(el("report"), api);
  el("report-form").addEventListener("submit", (event) => {
    event.preventDefault();
    const person = (el("q-person") as HTMLInputElement).value.trim();
    void reports.run(person === "" ? {} : { person });
  });

  subscribe(api.streamUrl(), {
    onAlarm: (alarm) => {
      wall.applyAlarm(alarm);
      const line = document.createElement("div");
      line.className = "alarm-line";
      line.textContent = `${alarm.kind} gate ${alarm.gate} terminal ${alarm.terminal}`;
      el("alarms").prepend(line);
    },
    onEvent: (row) => {
      const line = document.createElement("div");
      line.className = "event-line";
      line.textContent = `${row.kind} gate ${row.gate} ${row.uid ?? ""}`.trimEnd();
      const log = el("ticker");
      log.prepend(line);
      // keep the ticker bounded
      while (log.childElementCount > 50) log.lastElementChild?.remove();
    },
  });
}

export function main(): void {
  el("login-form").addEventListener("submit", (event) => void onLogin(event));
}

// In the browser the module runs at page load; under test main() is explicit.
if (typeof document !== "undefined" && document.getElementById("login-form") !== null) {
  main();
}
