import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { CampusApi, type AlarmRow, type DoorRow } from "../src/api.js";
import { DoorWall } from "../src/doorwall.js";
import { FakeServer } from "./helpers.js";

const ALARM: AlarmRow = {
  id: 1,
  rule: 2,
  terminal: 2,
  gate: 7,
  seq: 9,
  ts: 1760000000,
  kind: "DOOR_LEFT_OPEN",
  raised_at: 1760000030,
  acknowledged_by: null,
};

function makeDoors(): DoorRow[] {
  return [
    { terminal: 1, gate: 3, door: "LOCKED", mode: "NORMAL", alarmed: false },
    { terminal: 2, gate: 7, door: "OPEN", mode: "NORMAL", alarmed: false },
    { terminal: 33, gate: 3, door: null, mode: null, alarmed: false },
  ];
}

describe("DoorWall", () => {
  let server: FakeServer;
  let doors: DoorRow[];
  let root: HTMLElement;
  let wall: DoorWall;

  beforeEach(() => {
    vi.useFakeTimers();
    server = new FakeServer();
    doors = makeDoors();
    server.on("GET /v1/doors", () => ({ json: doors }));
    root = document.createElement("div");
    wall = new DoorWall(root, new CampusApi("", server.fetch), 1000);
  });

  afterEach(() => {
    wall.stop();
    vi.useRealTimers();
  });

  function tileFor(terminal: number): HTMLElement {
    const node = root.querySelector<HTMLElement>(`[data-terminal="${terminal}"]`);
    expect(node).not.toBeNull();
    return node!;
  }

  it("shows one tile per terminal with door, mode, and unreachable state", async () => {
    wall.start();
    await vi.advanceTimersByTimeAsync(0);
    expect(root.querySelectorAll(".tile")).toHaveLength(3);
    expect(tileFor(1).querySelector(".door")!.textContent).toBe("LOCKED");
    expect(tileFor(1).querySelector(".gate")!.textContent).toBe("Gate 3");
    expect(tileFor(33).querySelector(".door")!.textContent).toBe("unreachable");
    expect(root.querySelector(".alarmed")).toBeNull();
  });

  it("surfaces a door-left-open alarm within one refresh interval", async () => {
    wall.start();
    await vi.advanceTimersByTimeAsync(0);
    expect(tileFor(2).classList.contains("alarmed")).toBe(false);

    // the backend raises the alarm between refreshes
    doors[1] = { ...doors[1], door: "OPEN_ALARMED", alarmed: true };
    await vi.advanceTimersByTimeAsync(1000);
    await vi.advanceTimersByTimeAsync(0);

    expect(tileFor(2).classList.contains("alarmed")).toBe(true);
    expect(tileFor(1).classList.contains("alarmed")).toBe(false);
  });

  it("marks the tile immediately when the alarm arrives on the stream", async () => {
    wall.start();
    await vi.advanceTimersByTimeAsync(0);

    wall.applyAlarm(ALARM);
    expect(tileFor(2).classList.contains("alarmed")).toBe(true);
  });

  it("stops polling once stopped", async () => {
    wall.start();
    await vi.advanceTimersByTimeAsync(0);
    wall.stop();
    const seen = server.callsTo("/v1/doors").length;
    await vi.advanceTimersByTimeAsync(5000);
    expect(server.callsTo("/v1/doors")).toHaveLength(seen);
  });
});
