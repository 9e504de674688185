// Typed client for the campus access HTTP API.
//
// Every method maps to one endpoint and returns the parsed JSON body (or raw
// text for CSV reports).  Errors come back from the server as {"error": msg}
// with a meaningful status code; we surface both through ApiError so callers
// can branch on status without string-matching.

export type Role = "VIEWER" | "OPERATOR" | "ADMIN";

export interface Session {
  token: string;
  username: string;
  role: Role;
  expires_at: number;
}

export interface DoorRow {
  terminal: number;
  gate: number;
  door: string | null; // LOCKED | RELEASED | OPEN, null when unreachable
  mode: string | null; // NORMAL | UNLOCKED_UNTIL | CATEGORY
  alarmed: boolean;
}

export interface CardRow {
  uid: string; // 16 hex chars
  personal_id: number;
  holder_type: number; // 0 personnel, 1 student, 2 visitor
  issue_number: number;
  locked: boolean;
  active: boolean;
  gates: number[];
  schedule: [number, number][]; // one [from, to) quarter-hour window per weekday
  last_seen_ts: number | null;
  last_seen_gate: number | null;
}

export interface AlarmRow {
  id: number;
  rule: number;
  terminal: number;
  gate: number;
  seq: number;
  ts: number;
  kind: string;
  raised_at: number;
  acknowledged_by: string | null;
}

export interface EventQuery {
  gates?: number[];
  from?: number;
  to?: number;
  person?: string;
  kinds?: string[];
  sort?: "ts" | "gate" | "person";
  desc?: boolean;
}

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

type Fetch = typeof fetch;

export class CampusApi {
  private token: string | null = null;

  // fetch is injected so tests can run against a canned implementation.
  constructor(private base: string = "", private doFetch: Fetch = fetch.bind(globalThis)) {}

  get authToken(): string | null {
    return this.token;
  }

  async login(username: string, password: string): Promise<Session> {
    const session = await this.request<Session>("POST", "/v1/login", { username, password });
    this.token = session.token;
    return session;
  }

  doors(): Promise<DoorRow[]> {
    return this.request("GET", "/v1/doors");
  }

  unlockBrief(terminal: number): Promise<{ ok: boolean }> {
    return this.request("POST", `/v1/terminals/${terminal}/unlock-brief`);
  }

  unlockUntil(terminal: number, until: number): Promise<{ ok: boolean }> {
    return this.request("POST", `/v1/terminals/${terminal}/unlock-until`, { until });
  }

  setMode(
    terminal: number,
    mode: string,
    opts: { until?: number; categories?: string[] } = {},
  ): Promise<{ ok: boolean }> {
    return this.request("POST", `/v1/terminals/${terminal}/mode`, { mode, ...opts });
  }

  poll(terminal: number): Promise<{ ingested: number }> {
    return this.request("POST", `/v1/terminals/${terminal}/poll`);
  }

  cards(): Promise<CardRow[]> {
    return this.request("GET", "/v1/cards");
  }

  lockCard(uid: string): Promise<{ pushed: number }> {
    return this.request("POST", `/v1/cards/${uid}/lock`);
  }

  unlockCard(uid: string): Promise<{ queued: number }> {
    return this.request("POST", `/v1/cards/${uid}/unlock`);
  }

  alarms(includeAcknowledged = false): Promise<AlarmRow[]> {
    return this.request("GET", includeAcknowledged ? "/v1/alarms?all=true" : "/v1/alarms");
  }

  acknowledgeAlarm(id: number): Promise<AlarmRow> {
    return this.request("POST", `/v1/alarms/${id}/ack`);
  }

  // The report comes back as the same delimited text the desk tooling writes,
  // so the on-screen table and the downloaded file share one source of truth.
  reportCsv(query: EventQuery): Promise<string> {
    return this.requestText("GET", `/v1/events?${eventParams(query, "csv")}`);
  }

  // SSE URL for the live feed.  EventSource cannot set headers, so the token
  // rides as a query parameter, which the server accepts as an alternative.
  streamUrl(since = 0, alarmsSince = 0): string {
    const params = new URLSearchParams({
      since: String(since),
      alarms_since: String(alarmsSince),
    });
    if (this.token !== null) params.set("token", this.token);
    return `${this.base}/v1/stream?${params}`;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.send(method, path, body);
    return (await response.json()) as T;
  }

  private async requestText(method: string, path: string): Promise<string> {
    const response = await this.send(method, path);
    return response.text();
  }

  private async send(method: string, path: string, body?: unknown): Promise<Response> {
    const headers: Record<string, string> = {};
    if (this.token !== null) headers["Authorization"] = `Bearer ${this.token}`;
    if (body !== undefined) headers["Content-Type"] = "application/json";
    const response = await this.doFetch(this.base + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      let message = `HTTP ${response.status}`;
      try {
        const parsed = (await response.json()) as { error?: string };
        if (parsed.error) message = parsed.error;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, message);
    }
    return response;
  }
}

function eventParams(query: EventQuery, format: string): URLSearchParams {
  const params = new URLSearchParams();
  for (const gate of query.gates ?? []) params.append("gate", String(gate));
  if (query.from !== undefined) params.set("from", String(query.from));
  if (query.to !== undefined) params.set("to", String(query.to));
  if (query.person !== undefined && query.person !== "") params.set("person", query.person);
  for (const kind of query.kinds ?? []) params.append("kind", kind);
  if (query.sort !== undefined) params.set("sort", query.sort);
  if (query.desc) params.set("desc", "1");
  params.set("format", format);
  return params;
}
