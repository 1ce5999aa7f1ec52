// Page wiring: document picker, record table on the left, letter with
// highlights on the right, label palette, save with conflict banner, and
// the advisory counts meter.
//
// One annotator per browser session; the id is asked for once and kept in
// sessionStorage. The service URL defaults to same-origin and can be
// overridden with ?api=http://127.0.0.1:8787 for a page served elsewhere.

import { ApiClient, DocumentSummary, SpanPayload } from "./api.js";
import { codePointToUtf16 } from "./offsets.js";
import { PaletteStore } from "./palette.js";
import { selectionToRange } from "./selection.js";
import { AnnotationSession } from "./state.js";

const query = new URLSearchParams(window.location.search);
const api = new ApiClient(query.get("api") ?? "");
const palette = new PaletteStore(api);

let annotatorId = sessionStorage.getItem("fidaudit_annotator") ?? "";
let session: AnnotationSession | null = null;
let documents: DocumentSummary[] = [];

const el = {
  annotator: document.getElementById("annotator") as HTMLElement,
  picker: document.getElementById("picker") as HTMLSelectElement,
  record: document.getElementById("record") as HTMLElement,
  letter: document.getElementById("letter") as HTMLElement,
  labels: document.getElementById("labels") as HTMLElement,
  spans: document.getElementById("spans") as HTMLElement,
  counts: document.getElementById("counts") as HTMLElement,
  banner: document.getElementById("banner") as HTMLElement,
  status: document.getElementById("status") as HTMLElement,
  save: document.getElementById("save") as HTMLButtonElement,
  mintName: document.getElementById("mint-name") as HTMLInputElement,
  mint: document.getElementById("mint") as HTMLButtonElement,
};

function setStatus(text: string): void {
  el.status.textContent = text;
}

function askAnnotator(): string {
  while (!annotatorId) {
    annotatorId = (window.prompt("Annotator id:") ?? "").trim();
  }
  sessionStorage.setItem("fidaudit_annotator", annotatorId);
  el.annotator.textContent = annotatorId;
  return annotatorId;
}

async function boot(): Promise<void> {
  askAnnotator();
  try {
    await palette.refresh();
    documents = (await api.listDocuments()).documents;
  } catch (err) {
    serviceUnreachable(err);
    return;
  }
  el.picker.replaceChildren(
    ...documents.map((d) => {
      const option = document.createElement("option");
      option.value = d.doc_id;
      option.textContent = `${d.doc_id} (${d.char_count} chars)`;
      return option;
    })
  );
  el.picker.addEventListener("change", () => void openDocument(el.picker.value));
  el.save.addEventListener("click", () => void saveNow());
  el.mint.addEventListener("click", () => void mintNow());
  el.letter.addEventListener("mouseup", () => renderLabelChoices());
  if (documents.length > 0) {
    await openDocument(documents[0]!.doc_id);
  } else {
    setStatus("the corpus has no documents");
  }
}

// Without the service there is nothing to label: disable the palette
// controls and offer a retry instead of a dead page.
function serviceUnreachable(err: unknown): void {
  el.mint.disabled = true;
  el.save.disabled = true;
  setStatus(err instanceof Error ? err.message : String(err));
  el.banner.hidden = false;
  const text = document.createElement("span");
  text.textContent = "annotation service unreachable";
  const retry = document.createElement("button");
  retry.textContent = "retry";
  retry.addEventListener("click", () => {
    el.banner.hidden = true;
    el.banner.replaceChildren();
    el.mint.disabled = false;
    el.save.disabled = false;
    void boot();
  });
  el.banner.replaceChildren(text, retry);
}

async function openDocument(docId: string): Promise<void> {
  session = new AnnotationSession(api, docId, annotatorId);
  await session.load();
  const doc = await api.getDocument(docId);
  el.record.replaceChildren();
  if (doc.representation) {
    for (const row of doc.representation) {
      const tr = document.createElement("tr");
      const name = document.createElement("td");
      name.textContent = row.display_name;
      const value = document.createElement("td");
      value.textContent = row.decoded;
      value.title = row.raw;
      tr.append(name, value);
      el.record.append(tr);
    }
  } else {
    const tr = document.createElement("tr");
    const td = document.createElement("td");
    td.colSpan = 2;
    td.textContent = "free letter: no linked record";
    tr.append(td);
    el.record.append(tr);
  }
  renderAll();
  setStatus(`editing ${docId} as ${annotatorId}`);
}

function renderAll(): void {
  renderLetter();
  renderSpanList();
  renderBanner();
  void renderCounts();
}

// The letter is rebuilt from scratch: plain text segments interleaved
// with <mark> elements wherever at least one span covers the position.
function renderLetter(): void {
  if (!session) return;
  const text = session.text;
  const boundaries = new Set<number>([0, text.length]);
  for (const span of session.spans) {
    boundaries.add(codePointToUtf16(text, span.start));
    boundaries.add(codePointToUtf16(text, span.end));
  }
  const cuts = [...boundaries].sort((a, b) => a - b);
  const u16Spans = session.spans.map((s) => ({
    start: codePointToUtf16(text, s.start),
    end: codePointToUtf16(text, s.end),
    labels: s.labels,
  }));
  el.letter.replaceChildren();
  for (let i = 0; i + 1 < cuts.length; i++) {
    const from = cuts[i]!;
    const to = cuts[i + 1]!;
    const piece = text.slice(from, to);
    const covering = u16Spans.filter((s) => s.start <= from && to <= s.end);
    if (covering.length === 0) {
      el.letter.append(document.createTextNode(piece));
    } else {
      const mark = document.createElement("mark");
      mark.textContent = piece;
      mark.title = covering.flatMap((s) => s.labels).join(", ");
      el.letter.append(mark);
    }
  }
}

function renderLabelChoices(): void {
  if (!session) return;
  const range = selectionToRange(el.letter, session.text);
  el.labels.replaceChildren();
  if (!range) return;
  const caption = document.createElement("div");
  caption.textContent = `label [${range.start}, ${range.end}) as:`;
  el.labels.append(caption);
  const p = palette.current;
  const groups: [string, string[]][] = [
    ["kinds", p.other],
    ["schema", p.schema_labels.map((l) => l.rendered)],
    ["new subjects", p.new_subjects.map((s) => s.rendered)],
  ];
  for (const [title, rendereds] of groups) {
    if (rendereds.length === 0) continue;
    const group = document.createElement("div");
    const heading = document.createElement("em");
    heading.textContent = `${title}: `;
    group.append(heading);
    for (const rendered of rendereds) {
      const button = document.createElement("button");
      button.textContent = rendered;
      button.addEventListener("click", () => {
        session?.addSpan(range.start, range.end, [rendered]);
        window.getSelection()?.removeAllRanges();
        el.labels.replaceChildren();
        renderAll();
      });
      group.append(button);
    }
    el.labels.append(group);
  }
}

function renderSpanList(): void {
  if (!session) return;
  el.spans.replaceChildren();
  session.spans.forEach((span: SpanPayload, index: number) => {
    const li = document.createElement("li");
    const remove = document.createElement("button");
    remove.textContent = "remove";
    remove.addEventListener("click", () => {
      session?.removeSpan(index);
      renderAll();
    });
    li.textContent = `[${span.start}, ${span.end}) ${span.labels.join(", ")} `;
    li.append(remove);
    el.spans.append(li);
  });
  el.save.disabled = !session.dirty;
}

function renderBanner(): void {
  if (!session) return;
  const conflict = session.conflict;
  el.banner.replaceChildren();
  el.banner.hidden = conflict === null;
  if (!conflict) return;
  const text = document.createElement("span");
  text.textContent =
    `someone saved version ${conflict.storedVersion ?? "?"} first; ` +
    "reload to get it, then redo your edit";
  const reload = document.createElement("button");
  reload.textContent = "reload server copy";
  reload.addEventListener("click", () => {
    void session?.reloadFromServer().then(renderAll);
  });
  el.banner.append(text, reload);
}

// The meter is advisory while annotating; audited numbers come from the
// command-line aggregation over the saved files.
async function renderCounts(): Promise<void> {
  if (!session) return;
  const draftCoverage = (session.draftCoverage() * 100).toFixed(1);
  try {
    const counts = await session.counts();
    el.counts.textContent =
      `fidelity ${counts.fidelity} (repeat ${counts.additional_schema}, ` +
      `new ${counts.new_subjects}, aspects ${counts.aspects}, ` +
      `spec ${counts.specializations}), omitted ${counts.omitted_subjects}, ` +
      `draft coverage ${draftCoverage}%`;
  } catch {
    el.counts.textContent = `draft coverage ${draftCoverage}%`;
  }
}

async function saveNow(): Promise<void> {
  if (!session) return;
  const result = await session.save();
  renderAll();
  setStatus(
    result.ok ? `saved version ${result.version}` : "save rejected: newer version on the server"
  );
}

async function mintNow(): Promise<void> {
  const name = el.mintName.value.trim();
  if (!name) return;
  try {
    const entry = await palette.mint(name, annotatorId);
    el.mintName.value = "";
    setStatus(`label ${entry.rendered} is available to everyone`);
    renderLabelChoices();
  } catch (err) {
    setStatus(err instanceof Error ? err.message : String(err));
  }
}

void boot();
