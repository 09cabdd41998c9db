// Thin client for the session service. The server is the single semantics
// authority: the client never computes moves or rewrites, it only displays
// what the server returns and posts choices back.

export interface EndpointJson {
  node?: string;
  port?: string;
  input?: string;
  output?: string;
}

export interface EdgeJson {
  id: string;
  source: EndpointJson;
  target: EndpointJson;
}

export interface NodeJson {
  id: string;
  kind: string;
  coef?: string;
}

export interface GraphJson {
  nodes: NodeJson[];
  edges: EdgeJson[];
  loops: string[];
  inputs: string[];
  outputs: string[];
  canonicalKey: string;
  sector: { lambda: boolean; emergent: boolean };
}

export interface PatternIds {
  nodes: string[];
  edges: string[];
  loops: string[];
}

export interface MoveDescriptor {
  move: string;
  direction: "forward" | "reverse";
  anchor: unknown[];
  fingerprint: string;
  label: string;
  pattern: PatternIds;
  params?: { coef?: string; coef2?: string; bound?: number };
}

export interface SessionSnapshot {
  id: string;
  graph: GraphJson;
  moves: MoveDescriptor[];
  historyLength: number;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

async function unwrap(resp: Response): Promise<any> {
  if (resp.status === 204) return null;
  const type = resp.headers.get("content-type") ?? "";
  const body = type.includes("json") ? await resp.json() : await resp.text();
  if (!resp.ok) {
    const code = typeof body === "object" && body?.error ? body.error : "HTTP";
    const message =
      typeof body === "object" && body?.message ? body.message : String(body);
    throw new ApiError(resp.status, code, message);
  }
  return body;
}

export class ApiClient {
  constructor(readonly baseUrl: string) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, "") + path;
  }

  async createSession(body: { term: string } | { glc: string }): Promise<SessionSnapshot> {
    const resp = await fetch(this.url("/sessions"), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    return unwrap(resp);
  }

  async moves(id: string): Promise<MoveDescriptor[]> {
    const resp = await fetch(this.url(`/sessions/${id}/moves`));
    return (await unwrap(resp)).moves;
  }

  async apply(id: string, site: MoveDescriptor): Promise<SessionSnapshot> {
    const resp = await fetch(this.url(`/sessions/${id}/apply`), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ site }),
    });
    return unwrap(resp);
  }

  async undo(id: string): Promise<SessionSnapshot> {
    const resp = await fetch(this.url(`/sessions/${id}/undo`), { method: "POST" });
    return unwrap(resp);
  }

  async dot(id: string): Promise<string> {
    const resp = await fetch(this.url(`/sessions/${id}/dot`));
    return unwrap(resp);
  }

  async close(id: string): Promise<void> {
    await fetch(this.url(`/sessions/${id}`), { method: "DELETE" });
  }
}
