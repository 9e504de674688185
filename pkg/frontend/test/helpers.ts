// Test doubles: an in-memory HTTP backend exposed as a fetch function, with
// just enough routing for the endpoints the panels touch.  Handlers see the
// parsed URL so tests can assert on query parameters, and every call is
// recorded for inspection.

export interface Recorded {
  method: string;
  path: string;
  url: URL;
  headers: Record<string, string>;
  body: unknown;
}

type Handler = (url: URL, call: Recorded) => { status?: number; json?: unknown; text?: string };

export class FakeServer {
  readonly calls: Recorded[] = [];
  private routes = new Map<string, Handler>();

  // key is "METHOD /path" without the query string
  on(key: string, handler: Handler): void {
    this.routes.set(key, handler);
  }

  fetch = async (input: RequestInfo | URL, init?: RequestInit): Promise<Response> => {
    const url = new URL(String(input), "http://test");
    const method = init?.method ?? "GET";
    const call: Recorded = {
      method,
      path: url.pathname,
      url,
      headers: Object.fromEntries(
        Object.entries((init?.headers as Record<string, string>) ?? {}),
      ),
      body: typeof init?.body === "string" ? JSON.parse(init.body) : undefined,
    };
    this.calls.push(call);
    const handler = this.routes.get(`${method} ${url.pathname}`);
    if (handler === undefined) {
      return jsonResponse(404, { error: `no route ${method} ${url.pathname}` });
    }
    const result = handler(url, call);
    const status = result.status ?? 200;
    if (result.text !== undefined) {
      return new Response(result.text, {
        status,
        headers: { "Content-Type": "text/csv; charset=utf-8" },
      });
    }
    return jsonResponse(status, result.json ?? {});
  };

  callsTo(path: string): Recorded[] {
    return this.calls.filter((c) => c.path === path);
  }
}

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

// Drain pending microtasks plus one macrotask hop, so fire-and-forget
// promise chains started by DOM event handlers settle before assertions.
export function settle(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}
