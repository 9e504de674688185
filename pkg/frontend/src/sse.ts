// Server-sent-events handling for /v1/stream.
//
// The stream carries two named event types: "event" (one access event row)
// and "alarm" (one alarm row).  parseChunk() is a plain incremental parser so
// the frame grammar is testable without a browser EventSource; subscribe()
// wires the same payloads up through the real EventSource API.

import type { AlarmRow } from "./api.js";

export interface StreamEvent {
  id: number;
  terminal: number;
  gate: number;
  seq: number;
  ts: number;
  uid: string | null;
  kind: string;
  detail: number;
}

export interface SseFrame {
  id: number | null;
  event: string;
  data: string;
}

export interface StreamHandlers {
  onEvent?: (row: StreamEvent) => void;
  onAlarm?: (row: AlarmRow) => void;
  onError?: () => void;
}

// Incremental parser state: call feed() with each chunk as it arrives and it
// returns every frame completed so far, buffering any partial tail.
export class SseParser {
  private buffer = "";

  feed(chunk: string): SseFrame[] {
    this.buffer += chunk;
    const frames: SseFrame[] = [];
    let boundary: number;
    while ((boundary = this.buffer.indexOf("\n\n")) !== -1) {
      const raw = this.buffer.slice(0, boundary);
      this.buffer = this.buffer.slice(boundary + 2);
      const frame = parseFrame(raw);
      if (frame !== null) frames.push(frame);
    }
    return frames;
  }
}

function parseFrame(raw: string): SseFrame | null {
  let id: number | null = null;
  let event = "message";
  const data: string[] = [];
  for (const line of raw.split("\n")) {
    if (line.startsWith("id:")) id = Number(line.slice(3).trim());
    else if (line.startsWith("event:")) event = line.slice(6).trim();
    else if (line.startsWith("data:")) data.push(line.slice(5).trim());
    // comment lines (leading ":") and blanks are ignored per the SSE spec
  }
  if (data.length === 0) return null;
  return { id, event, data: data.join("\n") };
}

// Dispatch one parsed frame to the right handler.  Shared by the EventSource
// path and the tests, so both agree on payload decoding.
export function dispatchFrame(frame: SseFrame, handlers: StreamHandlers): void {
  if (frame.event === "event" && handlers.onEvent) {
    handlers.onEvent(JSON.parse(frame.data) as StreamEvent);
  } else if (frame.event === "alarm" && handlers.onAlarm) {
    handlers.onAlarm(JSON.parse(frame.data) as AlarmRow);
  }
}

export function subscribe(url: string, handlers: StreamHandlers): () => void {
  const source = new EventSource(url);
  source.addEventListener("event", (ev) => {
    dispatchFrame({ id: null, event: "event", data: (ev as MessageEvent).data }, handlers);
  });
  source.addEventListener("alarm", (ev) => {
    dispatchFrame({ id: null, event: "alarm", data: (ev as MessageEvent).data }, handlers);
  });
  source.onerror = () => handlers.onError?.();
  return () => source.close();
}
