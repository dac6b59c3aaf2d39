/**
 * Typed client for the /v1 annotation API.
 *
 * Every method maps one-to-one onto a service route and returns the parsed
 * JSON body. Non-2xx replies raise ApiError carrying the HTTP status and
 * the server's `detail` payload so callers can branch on 409 (stale
 * revision) and 422 (rejected input) without string matching.
 */

import type { RleMask } from "./rle.js";

export interface SessionInfo {
  session_id: string;
  image_id: string;
  width: number;
  height: number;
  revision: number;
}

export interface SessionState extends SessionInfo {
  prompts: PromptPoint[];
  finalized: boolean;
}

export interface PromptPoint {
  x: number;
  y: number;
  kind: string;
}

export interface ClusterSummary {
  label: number;
  bbox: [number, number, number, number];
  centroid: [number, number];
  kept: boolean;
}

export interface MutationReply {
  revision: number;
  label: RleMask;
  clusters: ClusterSummary[];
}

export interface FinalizeReply {
  label_path: string;
  prompts_path: string;
  revision: number;
}

export class ApiError extends Error {
  readonly status: number;
  readonly detail: unknown;

  constructor(status: number, detail: unknown) {
    super(`HTTP ${status}: ${typeof detail === "string" ? detail : JSON.stringify(detail)}`);
    this.name = "ApiError";
    this.status = status;
    this.detail = detail;
  }

  /** Server's current revision from a 409 body, if present. */
  staleRevision(): number | null {
    if (
      this.status === 409 &&
      typeof this.detail === "object" &&
      this.detail !== null &&
      typeof (this.detail as { revision?: unknown }).revision === "number"
    ) {
      return (this.detail as { revision: number }).revision;
    }
    return null;
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private readonly base: string;
  private readonly fetchFn: FetchLike;

  constructor(base = "", fetchFn: FetchLike = (input, init) => fetch(input, init)) {
    this.base = base.replace(/\/+$/, "");
    this.fetchFn = fetchFn;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: {} };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const resp = await this.fetchFn(this.base + path, init);
    const payload: unknown = await resp.json();
    if (!resp.ok) {
      const detail =
        typeof payload === "object" && payload !== null && "detail" in payload
          ? (payload as { detail: unknown }).detail
          : payload;
      throw new ApiError(resp.status, detail);
    }
    return payload as T;
  }

  health(): Promise<{ status: string }> {
    return this.request("GET", "/v1/healthz");
  }

  listImages(): Promise<{ images: string[] }> {
    return this.request("GET", "/v1/images");
  }

  openSession(body: { image_id?: string; png_base64?: string }): Promise<SessionInfo> {
    return this.request("POST", "/v1/sessions", body);
  }

  sessionState(sessionId: string): Promise<SessionState> {
    return this.request("GET", `/v1/sessions/${sessionId}`);
  }

  addPrompt(
    sessionId: string,
    prompt: { x: number; y: number; kind?: string; revision?: number },
  ): Promise<MutationReply> {
    return this.request("POST", `/v1/sessions/${sessionId}/prompts`, prompt);
  }

  undoPrompt(sessionId: string, revision?: number): Promise<MutationReply> {
    const query = revision === undefined ? "" : `?revision=${revision}`;
    return this.request("DELETE", `/v1/sessions/${sessionId}/prompts/last${query}`);
  }

  finalize(sessionId: string): Promise<FinalizeReply> {
    return this.request("POST", `/v1/sessions/${sessionId}/finalize`);
  }

  labelPngUrl(sessionId: string): string {
    return `${this.base}/v1/sessions/${sessionId}/label.png`;
  }

  imagePngUrl(sessionId: string): string {
    return `${this.base}/v1/sessions/${sessionId}/image.png`;
  }
}
