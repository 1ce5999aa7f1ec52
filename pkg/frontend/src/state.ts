// One annotator's working copy of one document's annotation.
//
// The session keeps a local draft of the spans, remembers which stored
// version the draft is based on, and saves optimistically: if someone
// else saved first, the server answers version_conflict, the session
// records it for the banner, and nothing is stored until the user reloads
// and redoes the edit.

import { AnnotationPayload, ApiClient, ApiError, CountsPayload, SpanPayload } from "./api.js";
import { codePointLength } from "./offsets.js";

export interface Conflict {
  storedVersion: number | null;
  message: string;
}

export type SaveResult = { ok: true; version: number } | { ok: false; conflict: Conflict };

export class AnnotationSession {
  readonly docId: string;
  readonly annotatorId: string;

  private readonly api: ApiClient;
  private textValue = "";
  private charCount = 0;
  private version = 0;
  private draft: SpanPayload[] = [];
  private dirtyFlag = false;
  private conflictValue: Conflict | null = null;

  constructor(api: ApiClient, docId: string, annotatorId: string) {
    this.api = api;
    this.docId = docId;
    this.annotatorId = annotatorId;
  }

  /** Fetch the document text and the stored annotation. */
  async load(): Promise<void> {
    const doc = await this.api.getDocument(this.docId);
    this.textValue = doc.text;
    this.charCount = doc.char_count;
    const stored = await this.api.getAnnotation(this.docId, this.annotatorId);
    this.acceptStored(stored);
  }

  get text(): string {
    return this.textValue;
  }

  get textLength(): number {
    return this.charCount;
  }

  get baseVersion(): number {
    return this.version;
  }

  get spans(): readonly SpanPayload[] {
    return this.draft;
  }

  get dirty(): boolean {
    return this.dirtyFlag;
  }

  /** The banner state; null when the last save went through. */
  get conflict(): Conflict | null {
    return this.conflictValue;
  }

  /** Append a span to the draft. Offsets are code points, end exclusive. */
  addSpan(start: number, end: number, labels: string[]): void {
    if (!Number.isInteger(start) || !Number.isInteger(end) || start < 0 || end <= start) {
      throw new RangeError(`invalid span [${start}, ${end})`);
    }
    if (end > this.charCount) {
      throw new RangeError(`span [${start}, ${end}) exceeds text length ${this.charCount}`);
    }
    if (labels.length === 0) {
      throw new RangeError("a span needs at least one label");
    }
    this.draft = [...this.draft, { start, end, labels: [...labels] }];
    this.dirtyFlag = true;
  }

  removeSpan(index: number): void {
    if (index < 0 || index >= this.draft.length) {
      throw new RangeError(`no span at index ${index}`);
    }
    this.draft = this.draft.filter((_, i) => i !== index);
    this.dirtyFlag = true;
  }

  /**
   * Save the draft against the version it was loaded from. A conflict
   * leaves the draft intact and fills the banner state instead of
   * throwing; other failures propagate.
   */
  async save(): Promise<SaveResult> {
    const payload: AnnotationPayload = {
      doc_id: this.docId,
      annotator_id: this.annotatorId,
      version: this.version,
      spans: this.draft,
    };
    try {
      const stored = await this.api.putAnnotation(payload);
      this.acceptStored(stored);
      return { ok: true, version: stored.version };
    } catch (err) {
      if (err instanceof ApiError && err.code === "version_conflict") {
        this.conflictValue = {
          storedVersion: err.storedVersion,
          message: err.message,
        };
        return { ok: false, conflict: this.conflictValue };
      }
      throw err;
    }
  }

  /**
   * Replace the draft with the server's copy and clear the banner. The
   * caller confirms with the user first; local edits are discarded.
   */
  async reloadFromServer(): Promise<void> {
    const stored = await this.api.getAnnotation(this.docId, this.annotatorId);
    this.acceptStored(stored);
  }

  /** Stored-state component counts and coverage, for the advisory meter. */
  counts(): Promise<CountsPayload> {
    return this.api.getCounts(this.docId, this.annotatorId);
  }

  /** Coverage of the local draft, unsaved spans included. */
  draftCoverage(): number {
    if (this.draft.length === 0 || this.charCount === 0) {
      return 0;
    }
    const sorted = [...this.draft].sort((a, b) => a.start - b.start || a.end - b.end);
    let covered = 0;
    let lastEnd = 0;
    for (const span of sorted) {
      const start = Math.max(span.start, lastEnd);
      if (span.end > start) {
        covered += span.end - start;
        lastEnd = span.end;
      }
    }
    return covered / this.charCount;
  }

  private acceptStored(stored: AnnotationPayload): void {
    if (codePointLength(this.textValue) !== this.charCount) {
      // char_count is authoritative; a mismatch here would mean the
      // conversion layer and the server disagree about length.
      throw new Error(`text length mismatch for ${this.docId}`);
    }
    this.version = stored.version;
    this.draft = stored.spans.map((s) => ({ ...s, labels: [...s.labels] }));
    this.dirtyFlag = false;
    this.conflictValue = null;
  }
}
