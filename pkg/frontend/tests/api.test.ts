// The typed client against the in-memory server: payload shapes, error
// mapping, and the label registry endpoints.

import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { FakeServer } from "../src/fakeserver.js";
import { PaletteStore } from "../src/palette.js";

const SCHEMA_KEYS = ["checking_status", "duration", "purpose", "housing"];

function makeServer(): FakeServer {
  return new FakeServer({
    schemaName: "GCD",
    schemaKeys: SCHEMA_KEYS,
    documents: [
      {
        doc_id: "modelA-p0001-1",
        profile_id: "p0001",
        generator_id: "modelA",
        variant_index: 1,
        text: "I would like a loan for a radio.",
        representation: [
          {
            key: "purpose",
            display_name: "purpose",
            raw: "A43",
            decoded: "radio/television",
          },
        ],
      },
      {
        doc_id: "modelA-free-1",
        profile_id: null,
        generator_id: "modelA",
        variant_index: 1,
        text: "I am writing about a loan.",
        representation: null,
      },
    ],
  });
}

let server: FakeServer;
let client: ApiClient;

beforeEach(() => {
  server = makeServer();
  client = new ApiClient("http://service", server.fetch);
});

describe("documents", () => {
  it("lists summaries with char counts", async () => {
    const { documents } = await client.listDocuments();
    expect(documents.map((d) => d.doc_id)).toEqual(["modelA-p0001-1", "modelA-free-1"]);
    expect(documents[0]?.char_count).toBe("I would like a loan for a radio.".length);
    expect(documents[1]?.profile_id).toBeNull();
  });

  it("returns text and the linked record", async () => {
    const doc = await client.getDocument("modelA-p0001-1");
    expect(doc.text).toContain("radio");
    expect(doc.representation?.[0]?.decoded).toBe("radio/television");
  });

  it("maps unknown ids to a 404 ApiError", async () => {
    const err = await client.getDocument("nope").catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(404);
    expect(err.code).toBe("not_found");
  });
});

describe("labels", () => {
  it("serves the palette with schema labels and fixed kinds", async () => {
    const palette = await client.getLabels();
    expect(palette.schema_name).toBe("GCD");
    expect(palette.schema_labels.map((l) => l.rendered)).toContain("GCD_purpose");
    expect(palette.other).toEqual(["aspect", "specialization"]);
    expect(palette.new_subjects).toEqual([]);
  });

  it("mints subjects with normalization and idempotence", async () => {
    const first = await client.mintLabel("Side Income", "alice");
    expect(first.rendered).toBe("new_side_income");
    const again = await client.mintLabel("side income", "bob");
    expect(again.created_by).toBe("alice");
    const palette = await client.getLabels();
    expect(palette.new_subjects).toHaveLength(1);
  });

  it("answers 409 name_collision for schema feature names", async () => {
    const err = await client.mintLabel(" Purpose ", "alice").catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(409);
    expect(err.code).toBe("name_collision");
  });

  it("PaletteStore refreshes after minting", async () => {
    const store = new PaletteStore(client);
    await store.refresh();
    expect(store.has("new_pet")).toBe(false);
    await store.mint("pet", "alice");
    expect(store.has("new_pet")).toBe(true);
    expect(store.renderedLabels()[0]).toBe("aspect");
  });
});

describe("annotations", () => {
  it("serves an empty version 0 for fresh pairs", async () => {
    const stored = await client.getAnnotation("modelA-p0001-1", "alice");
    expect(stored).toEqual({
      doc_id: "modelA-p0001-1",
      annotator_id: "alice",
      version: 0,
      spans: [],
    });
  });

  it("rejects out-of-bounds spans with 400 out_of_bounds", async () => {
    const err = await client
      .putAnnotation({
        doc_id: "modelA-p0001-1",
        annotator_id: "alice",
        version: 0,
        spans: [{ start: 0, end: 10_000, labels: ["aspect"] }],
      })
      .catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(400);
    expect(err.code).toBe("out_of_bounds");
  });

  it("rejects unknown labels", async () => {
    const err = await client
      .putAnnotation({
        doc_id: "modelA-p0001-1",
        annotator_id: "alice",
        version: 0,
        spans: [{ start: 0, end: 4, labels: ["new_pet"] }],
      })
      .catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.code).toBe("unknown_label");
  });

  it("accepts minted labels and bumps the version", async () => {
    await client.mintLabel("pet", "alice");
    const saved = await client.putAnnotation({
      doc_id: "modelA-p0001-1",
      annotator_id: "alice",
      version: 0,
      spans: [{ start: 0, end: 4, labels: ["new_pet", "GCD_purpose"] }],
    });
    expect(saved.version).toBe(1);
    const counts = await client.getCounts("modelA-p0001-1", "alice");
    expect(counts.new_subjects).toBe(1);
    expect(counts.distinct_schema_labels).toBe(1);
    expect(counts.omitted_subjects).toBe(SCHEMA_KEYS.length - 1);
    expect(counts.fidelity).toBe(1);
    expect(counts.coverage).toBeCloseTo(4 / "I would like a loan for a radio.".length, 12);
  });
});
