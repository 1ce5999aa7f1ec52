// Session bookkeeping: draft edits, dirty tracking, local validation,
// the coverage meter, and the counts passthrough.

import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { FakeServer } from "../src/fakeserver.js";
import { AnnotationSession } from "../src/state.js";

const DOC_ID = "modelB-p0002-1";
const TEXT = "0123456789abcdefghij"; // 20 chars, coverage math stays readable

let server: FakeServer;
let session: AnnotationSession;

beforeEach(async () => {
  server = new FakeServer({
    schemaName: "GCD",
    schemaKeys: ["purpose", "duration"],
    documents: [
      {
        doc_id: DOC_ID,
        profile_id: "p0002",
        generator_id: "modelB",
        variant_index: 1,
        text: TEXT,
        representation: null,
      },
    ],
  });
  session = new AnnotationSession(new ApiClient("http://s", server.fetch), DOC_ID, "bob");
  await session.load();
});

describe("draft editing", () => {
  it("starts clean at version 0", () => {
    expect(session.baseVersion).toBe(0);
    expect(session.spans).toEqual([]);
    expect(session.dirty).toBe(false);
    expect(session.text).toBe(TEXT);
    expect(session.textLength).toBe(20);
  });

  it("add and remove mark the session dirty", () => {
    session.addSpan(0, 5, ["aspect"]);
    session.addSpan(10, 12, ["GCD_purpose"]);
    expect(session.dirty).toBe(true);
    expect(session.spans).toHaveLength(2);
    session.removeSpan(0);
    expect(session.spans).toEqual([{ start: 10, end: 12, labels: ["GCD_purpose"] }]);
  });

  it("rejects bad spans locally, before any request", () => {
    expect(() => session.addSpan(5, 5, ["aspect"])).toThrow(RangeError);
    expect(() => session.addSpan(-1, 3, ["aspect"])).toThrow(RangeError);
    expect(() => session.addSpan(0, 21, ["aspect"])).toThrow(RangeError);
    expect(() => session.addSpan(0, 3, [])).toThrow(RangeError);
    expect(() => session.removeSpan(0)).toThrow(RangeError);
    expect(session.dirty).toBe(false);
  });

  it("save round-trips the draft and clears dirty", async () => {
    session.addSpan(0, 5, ["aspect"]);
    const result = await session.save();
    expect(result).toEqual({ ok: true, version: 1 });
    expect(session.dirty).toBe(false);
    expect(session.baseVersion).toBe(1);
    expect(server.stored(DOC_ID, "bob").spans).toEqual([
      { start: 0, end: 5, labels: ["aspect"] },
    ]);
  });
});

describe("coverage meter", () => {
  it("is zero with no spans", () => {
    expect(session.draftCoverage()).toBe(0);
  });

  it("counts overlapping drafts once", () => {
    session.addSpan(0, 10, ["aspect"]);
    session.addSpan(5, 15, ["specialization"]);
    expect(session.draftCoverage()).toBeCloseTo(15 / 20, 12);
  });

  it("reflects unsaved edits immediately", () => {
    session.addSpan(0, 4, ["aspect"]);
    expect(session.draftCoverage()).toBeCloseTo(0.2, 12);
  });
});

describe("counts passthrough", () => {
  it("serves the stored annotation's components", async () => {
    session.addSpan(0, 5, ["GCD_purpose"]);
    session.addSpan(5, 8, ["GCD_purpose"]);
    session.addSpan(8, 12, ["aspect"]);
    await session.save();
    const counts = await session.counts();
    expect(counts.additional_schema).toBe(1);
    expect(counts.aspects).toBe(1);
    expect(counts.distinct_schema_labels).toBe(1);
    expect(counts.omitted_subjects).toBe(1);
    expect(counts.fidelity).toBe(2);
    expect(counts.coverage).toBeCloseTo(12 / 20, 12);
  });
});
