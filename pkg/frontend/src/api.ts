/** Typed client for the annotation API. The server is the source of truth;
 * the client never fabricates state it did not receive. */

import type { LabelAck, Progress, RawLabel, Task } from "./types.js";
import { isRawLabel } from "./types.js";

export type LabelResult =
  | { kind: "ok"; ack: LabelAck }
  | { kind: "conflict"; detail: string }
  | { kind: "rejected"; status: number; detail: string }
  | { kind: "offline"; detail: string };

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class AnnotationApi {
  private readonly fetchImpl: FetchLike;
  readonly baseUrl: string;

  constructor(baseUrl = "", fetchImpl?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  /** Next unlabeled task in the server's deterministic order; null when done. */
  async nextTask(): Promise<Task | null> {
    const response = await this.fetchImpl(`${this.baseUrl}/api/tasks/next`);
    if (response.status === 204) return null;
    if (!response.ok) throw new Error(`tasks/next failed: ${response.status}`);
    return (await response.json()) as Task;
  }

  async getTask(subclaimId: string): Promise<Task> {
    const response = await this.fetchImpl(
      `${this.baseUrl}/api/tasks/${encodeURIComponent(subclaimId)}`,
    );
    if (!response.ok) throw new Error(`tasks/${subclaimId} failed: ${response.status}`);
    return (await response.json()) as Task;
  }

  /** Persist one label. Only the four legal values can ever leave the client. */
  async postLabel(
    subclaimId: string,
    label: RawLabel,
    overwrite = false,
  ): Promise<LabelResult> {
    if (!isRawLabel(label)) {
      throw new Error(`illegal label ${label}; this is a client bug`);
    }
    const query = overwrite ? "?overwrite=true" : "";
    let response: Response;
    try {
      response = await this.fetchImpl(`${this.baseUrl}/api/labels${query}`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ subclaim_id: subclaimId, raw_label: label }),
      });
    } catch (error) {
      return { kind: "offline", detail: String(error) };
    }
    if (response.ok) {
      return { kind: "ok", ack: (await response.json()) as LabelAck };
    }
    const detail = await readDetail(response);
    if (response.status === 409) return { kind: "conflict", detail };
    return { kind: "rejected", status: response.status, detail };
  }

  async progress(): Promise<Progress> {
    const response = await this.fetchImpl(`${this.baseUrl}/api/progress`);
    if (!response.ok) throw new Error(`progress failed: ${response.status}`);
    return (await response.json()) as Progress;
  }

  exportUrl(): string {
    return `${this.baseUrl}/api/export`;
  }
}

async function readDetail(response: Response): Promise<string> {
  try {
    const body = (await response.json()) as { detail?: string };
    return body.detail ?? `HTTP ${response.status}`;
  } catch {
    return `HTTP ${response.status}`;
  }
}
