// REST client for the aggregation service. Pure pass-through: every
// capability here is one HTTP endpoint, nothing UI-only.

import { Manifest, QueryJson, SourceStats } from "./types.js";
import { queryRequestBody } from "./canonical.js";

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function errorMessage(resp: Response): Promise<string> {
  try {
    const body = await resp.json();
    if (body && typeof body.error === "string") return body.error;
  } catch {
    // fall through to the status line
  }
  return `HTTP ${resp.status}`;
}

export class ApiClient {
  constructor(public baseUrl: string = "") {}

  private async getJson<T>(path: string): Promise<T> {
    let resp: Response;
    try {
      resp = await fetch(this.baseUrl + path);
    } catch (e) {
      throw new ApiError(0, `service unreachable: ${e}`);
    }
    if (!resp.ok) throw new ApiError(resp.status, await errorMessage(resp));
    return (await resp.json()) as T;
  }

  async health(): Promise<boolean> {
    try {
      await this.getJson<{ status: string }>("/api/v1/health");
      return true;
    } catch {
      return false;
    }
  }

  sources(): Promise<SourceStats[]> {
    return this.getJson<SourceStats[]>("/api/v1/sources");
  }

  async postQuery(q: QueryJson): Promise<{ collection_id: string; manifest_url: string }> {
    let resp: Response;
    try {
      resp = await fetch(this.baseUrl + "/api/v1/queries", {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: queryRequestBody(q),
      });
    } catch (e) {
      throw new ApiError(0, `service unreachable: ${e}`);
    }
    if (!resp.ok) throw new ApiError(resp.status, await errorMessage(resp));
    return (await resp.json()) as { collection_id: string; manifest_url: string };
  }

  getManifest(collectionId: string): Promise<Manifest> {
    return this.getJson<Manifest>(`/api/v1/collections/${collectionId}`);
  }

  /** Download URL for one manifest entry (entry paths may contain slashes;
   * each segment is escaped individually). */
  fileUrl(collectionId: string, entryPath: string): string {
    const encoded = entryPath.split("/").map(encodeURIComponent).join("/");
    return `${this.baseUrl}/api/v1/collections/${collectionId}/files/${encoded}`;
  }
}
