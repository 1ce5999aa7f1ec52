// Typed client for the fidaudit annotation service.
//
// Mirrors API.md in the repository root: JSON in, JSON out, and every
// error body shaped {"error": {code, message, detail}}. The fetch
// implementation is injectable so tests can run against an in-memory
// server.

export interface DocumentSummary {
  doc_id: string;
  profile_id: string | null;
  generator_id: string;
  variant_index: number;
  char_count: number;
}

export interface RepresentationRow {
  key: string;
  display_name: string;
  raw: string;
  decoded: string;
}

export interface DocumentDetail extends DocumentSummary {
  text: string;
  representation: RepresentationRow[] | null;
}

export interface SchemaLabel {
  rendered: string;
  key: string;
  display_name: string;
}

export interface NewSubject {
  name: string;
  rendered: string;
  created_by: string;
  created_at: number;
}

export interface Palette {
  schema_name: string;
  schema_labels: SchemaLabel[];
  new_subjects: NewSubject[];
  other: string[];
}

export interface SpanPayload {
  start: number;
  end: number;
  labels: string[];
}

export interface AnnotationPayload {
  doc_id: string;
  annotator_id: string;
  version: number;
  spans: SpanPayload[];
}

export interface CountsPayload {
  additional_schema: number;
  new_subjects: number;
  aspects: number;
  specializations: number;
  distinct_schema_labels: number;
  omitted_subjects: number;
  fidelity: number;
  coverage: number;
}

interface ErrorBody {
  error: { code: string; message: string; detail: unknown };
}

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;
  readonly detail: unknown;

  constructor(status: number, code: string, message: string, detail: unknown) {
    super(message);
    this.name = "ApiError";
    this.status = status;
    this.code = code;
    this.detail = detail;
  }

  /** stored_version from a version_conflict answer, if present. */
  get storedVersion(): number | null {
    if (this.code !== "version_conflict") return null;
    const d = this.detail as { stored_version?: unknown } | null;
    return typeof d?.stored_version === "number" ? d.stored_version : null;
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private readonly base: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn?: FetchLike) {
    this.base = baseUrl.replace(/\/+$/, "");
    this.fetchFn = fetchFn ?? ((url, init) => fetch(url, init));
  }

  listDocuments(): Promise<{ documents: DocumentSummary[] }> {
    return this.request("GET", "/api/documents");
  }

  getDocument(docId: string): Promise<DocumentDetail> {
    return this.request("GET", `/api/documents/${encodeURIComponent(docId)}`);
  }

  getLabels(): Promise<Palette> {
    return this.request("GET", "/api/labels");
  }

  mintLabel(name: string, annotatorId: string): Promise<NewSubject> {
    return this.request("POST", "/api/labels/new", {
      name,
      annotator_id: annotatorId,
    });
  }

  getAnnotation(docId: string, annotatorId: string): Promise<AnnotationPayload> {
    return this.request("GET", this.annotationPath(docId, annotatorId));
  }

  putAnnotation(payload: AnnotationPayload): Promise<AnnotationPayload> {
    return this.request(
      "PUT",
      this.annotationPath(payload.doc_id, payload.annotator_id),
      payload
    );
  }

  getCounts(docId: string, annotatorId: string): Promise<CountsPayload> {
    return this.request("GET", `${this.annotationPath(docId, annotatorId)}/counts`);
  }

  private annotationPath(docId: string, annotatorId: string): string {
    return `/api/annotations/${encodeURIComponent(docId)}/${encodeURIComponent(annotatorId)}`;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchFn(this.base + path, init);
    if (response.ok) {
      return (await response.json()) as T;
    }
    let parsed: ErrorBody | null = null;
    try {
      parsed = (await response.json()) as ErrorBody;
    } catch {
      parsed = null;
    }
    if (parsed?.error?.code) {
      throw new ApiError(
        response.status,
        parsed.error.code,
        parsed.error.message,
        parsed.error.detail
      );
    }
    throw new ApiError(response.status, "http_error", `HTTP ${response.status}`, null);
  }
}
