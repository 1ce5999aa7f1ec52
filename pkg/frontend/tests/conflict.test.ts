// Two browser sessions against one service: a label minted in one shows
// up in the other, and when both edit the same annotation the slower save
// is rejected, banner up, stored copy untouched, until its session
// reloads and redoes the edit.

import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { FakeServer } from "../src/fakeserver.js";
import { PaletteStore } from "../src/palette.js";
import { AnnotationSession } from "../src/state.js";

const DOC_ID = "modelA-p0001-1";
const TEXT = "I would like a loan of 1169 DM for a radio, and my cat agrees.";

function makeServer(): FakeServer {
  return new FakeServer({
    schemaName: "GCD",
    schemaKeys: ["purpose", "credit_amount", "housing"],
    documents: [
      {
        doc_id: DOC_ID,
        profile_id: "p0001",
        generator_id: "modelA",
        variant_index: 1,
        text: TEXT,
        representation: null,
      },
    ],
  });
}

describe("two sessions, one registry", () => {
  it("a subject minted in session one is offered in session two", async () => {
    const server = makeServer();
    const paletteOne = new PaletteStore(new ApiClient("http://s", server.fetch));
    const paletteTwo = new PaletteStore(new ApiClient("http://s", server.fetch));
    await paletteOne.refresh();
    await paletteTwo.refresh();
    expect(paletteTwo.has("new_pet")).toBe(false);

    await paletteOne.mint("Pet", "alice");
    expect(paletteOne.has("new_pet")).toBe(true);

    // Session two sees it on its next refresh, no restart needed.
    await paletteTwo.refresh();
    expect(paletteTwo.has("new_pet")).toBe(true);
    const entry = paletteTwo.current.new_subjects[0]!;
    expect(entry.created_by).toBe("alice");
  });
});

describe("two sessions, one annotation", () => {
  it("the stale save raises the banner and stores nothing", async () => {
    const server = makeServer();
    const api = new ApiClient("http://s", server.fetch);
    const tabOne = new AnnotationSession(api, DOC_ID, "alice");
    const tabTwo = new AnnotationSession(api, DOC_ID, "alice");
    await tabOne.load();
    await tabTwo.load();
    expect(tabOne.baseVersion).toBe(0);
    expect(tabTwo.baseVersion).toBe(0);

    // Tab one wins the race.
    tabOne.addSpan(15, 30, ["GCD_credit_amount"]);
    const first = await tabOne.save();
    expect(first).toEqual({ ok: true, version: 1 });
    expect(tabOne.conflict).toBeNull();

    // Tab two, still based on version 0, loses.
    tabTwo.addSpan(0, 7, ["aspect"]);
    const second = await tabTwo.save();
    expect(second.ok).toBe(false);
    expect(tabTwo.conflict).not.toBeNull();
    expect(tabTwo.conflict?.storedVersion).toBe(1);

    // The rejected save changed nothing on the server.
    const stored = server.stored(DOC_ID, "alice");
    expect(stored.version).toBe(1);
    expect(stored.spans).toEqual([{ start: 15, end: 30, labels: ["GCD_credit_amount"] }]);
    // The loser keeps its draft for the user to reapply.
    expect(tabTwo.spans).toEqual([{ start: 0, end: 7, labels: ["aspect"] }]);
    expect(tabTwo.dirty).toBe(true);
  });

  it("reload clears the banner and the redone edit saves", async () => {
    const server = makeServer();
    const api = new ApiClient("http://s", server.fetch);
    const tabOne = new AnnotationSession(api, DOC_ID, "alice");
    const tabTwo = new AnnotationSession(api, DOC_ID, "alice");
    await tabOne.load();
    await tabTwo.load();

    tabOne.addSpan(15, 30, ["GCD_credit_amount"]);
    await tabOne.save();
    tabTwo.addSpan(0, 7, ["aspect"]);
    await tabTwo.save();
    expect(tabTwo.conflict?.storedVersion).toBe(1);

    // The banner's reload action: fetch the winner's copy.
    await tabTwo.reloadFromServer();
    expect(tabTwo.conflict).toBeNull();
    expect(tabTwo.baseVersion).toBe(1);
    expect(tabTwo.spans).toEqual([{ start: 15, end: 30, labels: ["GCD_credit_amount"] }]);

    // Redo the edit on top and save for real.
    tabTwo.addSpan(0, 7, ["aspect"]);
    const retried = await tabTwo.save();
    expect(retried).toEqual({ ok: true, version: 2 });

    const stored = server.stored(DOC_ID, "alice");
    expect(stored.version).toBe(2);
    expect(stored.spans).toHaveLength(2);

    // Tab one is now the stale one.
    tabOne.addSpan(40, 45, ["specialization"]);
    const late = await tabOne.save();
    expect(late.ok).toBe(false);
    expect(tabOne.conflict?.storedVersion).toBe(2);
  });
});
