// Door wall: one tile per terminal, refreshed on a timer and nudged by the
// live alarm stream so an open-door alarm is visible without waiting for the
// next poll of /v1/doors.

import type { AlarmRow, CampusApi, DoorRow } from "./api.js";

export const DEFAULT_REFRESH_MS = 2000;

export class DoorWall {
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(
    private root: HTMLElement,
    private api: CampusApi,
    private intervalMs: number = DEFAULT_REFRESH_MS,
  ) {}

  async refresh(): Promise<void> {
    const doors = await this.api.doors();
    this.render(doors);
  }

  render(doors: DoorRow[]): void {
    this.root.textContent = "";
    for (const row of doors) {
      this.root.appendChild(tile(row));
    }
  }

  start(): void {
    this.stop();
    void this.refresh();
    this.timer = setInterval(() => void this.refresh(), this.intervalMs);
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  // Streamed alarms mark the tile immediately; the next refresh re-reads the
  // authoritative flag from the server (already set by the time the server
  // emitted the alarm, so the two paths cannot disagree).
  applyAlarm(alarm: AlarmRow): void {
    const node = this.root.querySelector(`[data-terminal="${alarm.terminal}"]`);
    if (node !== null) node.classList.add("alarmed");
  }
}

function tile(row: DoorRow): HTMLElement {
  const node = document.createElement("div");
  node.className = row.alarmed ? "tile alarmed" : "tile";
  node.dataset.terminal = String(row.terminal);

  const gate = document.createElement("div");
  gate.className = "gate";
  gate.textContent = `Gate ${row.gate}`;
  node.appendChild(gate);

  const terminal = document.createElement("div");
  terminal.className = "terminal";
  terminal.textContent = `terminal ${row.terminal}`;
  node.appendChild(terminal);

  const door = document.createElement("div");
  door.className = "door";
  door.textContent = row.door ?? "unreachable";
  node.appendChild(door);

  const mode = document.createElement("div");
  mode.className = "mode";
  mode.textContent = row.mode ?? "—";
  node.appendChild(mode);

  return node;
}
