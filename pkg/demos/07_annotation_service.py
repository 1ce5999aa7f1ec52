"""
Annotation service: the HTTP contract, one request at a time
============================================================

Walks the annotation service API with an in-process test client: list
documents, fetch one with its linked record, read the label palette, mint
a new subject, save spans with optimistic concurrency, and collide two
writers on purpose to see the conflict answer.

`fidaudit serve --corpus ... --annotations ...` exposes the same app over
a real socket.
"""

import json
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

import fidaudit
from fidaudit.corpus import (
    Corpus,
    SelfDescription,
    load_representations,
    load_schema,
    save_corpus,
)
from fidaudit.service import create_app_from_dirs

SCHEMA_PATH = Path(fidaudit.__file__).parent / "data" / "gcd_schema.json"

RAW_ROW = "A11 6 A34 A43 1169 A65 A75 4 A93 A101 4 A121 67 A143 A152 2 A173 1 A192 A201 1\n"

work = Path(tempfile.mkdtemp(prefix="fidaudit-demo-"))
schema = load_schema(SCHEMA_PATH)
rows = work / "rows.txt"
rows.write_text(RAW_ROW, encoding="utf-8")
letter = SelfDescription(
    doc_id="demo-p0001-1",
    profile_id="p0001",
    generator_id="demo",
    variant_index=1,
    text="I would like a loan of 1169 DM for a radio. I am 67 and I own my house.",
)
save_corpus(Corpus(schema, load_representations(rows, schema), [letter]), work / "corpus")

client = TestClient(create_app_from_dirs(work / "corpus", work / "annotations"))


def show(title, payload):
    print(f"--- {title}")
    print(json.dumps(payload, indent=2, ensure_ascii=False)[:400])
    print()


# What is there to annotate?
r = client.get("/api/documents")
show("GET /api/documents", r.json())

# One document, with its text and the decoded record beside it.
r = client.get("/api/documents/demo-p0001-1")
doc = r.json()
print(f"--- GET /api/documents/demo-p0001-1")
print(f"text: {doc['text'][:50]}...")
print(f"representation rows: {len(doc['representation'])}, first: {doc['representation'][0]}\n")

# The palette: schema labels, minted subjects, and the two fixed kinds.
r = client.get("/api/labels")
palette = r.json()
print(f"--- GET /api/labels")
print(f"{len(palette['schema_labels'])} schema labels, "
      f"{len(palette['new_subjects'])} new subjects, other: {palette['other']}\n")

# Minting a subject makes it available to every annotator immediately.
r = client.post("/api/labels/new", json={"name": "pet", "annotator_id": "alice"})
show("POST /api/labels/new {'name': 'pet'}", r.json())

# A fresh annotation is an empty version 0.
r = client.get("/api/annotations/demo-p0001-1/alice")
mine = r.json()
show("GET /api/annotations/demo-p0001-1/alice", mine)

# Save two spans. The server accepts the write only if `version` still
# matches its stored copy, then bumps it.
mine["spans"] = [
    {"start": 15, "end": 30, "labels": ["GCD_credit_amount"]},
    {"start": 45, "end": 50, "labels": ["aspect"]},
]
r = client.put("/api/annotations/demo-p0001-1/alice", json=mine)
saved = r.json()
print(f"--- PUT ... (version {mine['version']}) -> {r.status_code}, stored version {saved['version']}\n")

# A second writer who still holds version 0 loses: the server answers 409
# and keeps what it has. The loser must reload and redo its edit.
stale = dict(saved, version=0, spans=[{"start": 0, "end": 5, "labels": ["aspect"]}])
r = client.put("/api/annotations/demo-p0001-1/alice", json=stale)
show(f"stale PUT -> {r.status_code}", r.json())

# Live component counts for the annotation as saved.
r = client.get("/api/annotations/demo-p0001-1/alice/counts")
show("GET .../alice/counts", r.json())
