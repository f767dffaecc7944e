// Typed client for the workbench service. All state changes go through
// these endpoints; optimistic revisions guard concurrent tabs.

import type {
  EditResponse,
  HeatmapResponse,
  InterchangeDocument,
  SegmentsResponse,
  Span,
  SuggestResponse,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ConflictError extends Error {
  constructor(detail: string) {
    super(detail);
    this.name = "ConflictError";
  }
}

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
    this.name = "ApiError";
  }
}

async function raiseForStatus(response: Response): Promise<void> {
  if (response.ok) return;
  let detail = response.statusText;
  try {
    const body = await response.json();
    if (body && typeof body.detail === "string") detail = body.detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  if (response.status === 409) throw new ConflictError(detail);
  throw new ApiError(response.status, detail);
}

export class WorkbenchClient {
  constructor(
    private baseUrl: string,
    private fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async post<T>(path: string, body: unknown): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    await raiseForStatus(response);
    return (await response.json()) as T;
  }

  async createDocument(doc: InterchangeDocument): Promise<{ id: string }> {
    return this.post("/documents", doc);
  }

  async getSegments(docId: string): Promise<SegmentsResponse> {
    const response = await this.fetchImpl(`${this.baseUrl}/documents/${docId}/segments`);
    await raiseForStatus(response);
    return (await response.json()) as SegmentsResponse;
  }

  async suggest(
    docId: string,
    segment: number,
    span: Span,
    revision: number,
    k?: number,
  ): Promise<SuggestResponse> {
    return this.post(`/documents/${docId}/segments/${segment}/suggest`, {
      start: span.start,
      end: span.end,
      revision,
      ...(k === undefined ? {} : { k }),
    });
  }

  async applyEdit(
    docId: string,
    segment: number,
    span: Span,
    replacement: string,
    revision: number,
    refreshQe = false,
  ): Promise<EditResponse> {
    const response = await this.fetchImpl(
      `${this.baseUrl}/documents/${docId}/segments/${segment}`,
      {
        method: "PATCH",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({
          start: span.start,
          end: span.end,
          replacement,
          revision,
          refreshQe,
        }),
      },
    );
    await raiseForStatus(response);
    return (await response.json()) as EditResponse;
  }

  async exportDocument(docId: string): Promise<InterchangeDocument> {
    const response = await this.fetchImpl(`${this.baseUrl}/documents/${docId}/export`);
    await raiseForStatus(response);
    return (await response.json()) as InterchangeDocument;
  }

  async heatmap(
    docId: string,
    segment: number,
    span: Span,
  ): Promise<HeatmapResponse> {
    const response = await this.fetchImpl(
      `${this.baseUrl}/documents/${docId}/segments/${segment}/heatmap?start=${span.start}&end=${span.end}`,
    );
    await raiseForStatus(response);
    return (await response.json()) as HeatmapResponse;
  }
}
