/** Typed fetch client for the verification service. */

import type { ApiErrorBody, AskResponse, SessionSummary, VerifyResponse } from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
    public readonly image?: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function raiseForStatus(response: Response): Promise<void> {
  if (response.ok) return;
  let code = "UNKNOWN";
  let message = `HTTP ${response.status}`;
  let image: string | undefined;
  try {
    const body = (await response.json()) as ApiErrorBody;
    code = body.error.code;
    message = body.error.message;
    image = body.error.image;
  } catch {
    // non-JSON error body; keep the status-derived defaults
  }
  throw new ApiError(response.status, code, message, image);
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: typeof fetch = globalThis.fetch.bind(globalThis),
  ) {}

  async verify(imageA: Blob, imageB: Blob): Promise<VerifyResponse> {
    const form = new FormData();
    form.append("image_a", imageA, "image_a.png");
    form.append("image_b", imageB, "image_b.png");
    const response = await this.fetchFn(`${this.baseUrl}/v1/verify`, {
      method: "POST",
      body: form,
    });
    await raiseForStatus(response);
    return (await response.json()) as VerifyResponse;
  }

  async ask(sessionId: string, question: string): Promise<AskResponse> {
    const response = await this.fetchFn(`${this.baseUrl}/v1/sessions/${sessionId}/ask`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ question }),
    });
    await raiseForStatus(response);
    return (await response.json()) as AskResponse;
  }

  async getSession(sessionId: string): Promise<SessionSummary> {
    const response = await this.fetchFn(`${this.baseUrl}/v1/sessions/${sessionId}`);
    await raiseForStatus(response);
    return (await response.json()) as SessionSummary;
  }

  /** heatmap_urls values are service-relative paths. */
  resolveUrl(path: string): string {
    return `${this.baseUrl}${path}`;
  }
}
