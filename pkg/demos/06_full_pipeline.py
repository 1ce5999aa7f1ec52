"""
Full pipeline: generate, ingest, annotate, count, measure, correlate
====================================================================

Drives every stage with the same commands a shell user would type:
mock-generate letters for two profiles, ingest them into a corpus, sample
documents, annotate them with two scripted annotators, aggregate fidelity
counts, check agreement, compute distances, and correlate the two.

The only step normally done by people, span annotation, is scripted here
through the same store the annotation service writes to.
"""

import hashlib
import tempfile
from pathlib import Path

import fidaudit
from fidaudit.annotation import (
    ASPECT_LABEL,
    AnnotationDoc,
    AnnotationStore,
    add_span,
    make_span,
    new_subject_label,
    schema_label,
)
from fidaudit.baseline import serialize_representation, tokenize
from fidaudit.cli import main as fidaudit_main
from fidaudit.corpus import load_corpus

SCHEMA_PATH = Path(fidaudit.__file__).parent / "data" / "gcd_schema.json"

RAW_ROWS = """\
A11 6 A34 A43 1169 A65 A75 4 A93 A101 4 A121 67 A143 A152 2 A173 1 A192 A201 1
A12 48 A32 A43 5951 A61 A73 2 A92 A101 2 A121 22 A143 A152 1 A173 1 A191 A201 2
"""

work = Path(tempfile.mkdtemp(prefix="fidaudit-demo-"))
print(f"working in {work}\n")


def run(*argv: str) -> None:
    """Invoke one CLI command, shell-transcript style."""
    shown = [a.replace(f"{work}/", "").replace(str(SCHEMA_PATH), "gcd_schema.json") for a in argv]
    print(f"$ fidaudit {' '.join(shown)}")
    code = fidaudit_main(list(argv))
    assert code == 0, f"command failed with exit code {code}"
    print()


rows = work / "rows.txt"
rows.write_text(RAW_ROWS, encoding="utf-8")

# Stage 1: letters. The offline mock client stands in for a hosted model.
run(
    "generate", "--schema", str(SCHEMA_PATH), "--representations", str(rows),
    "--models", "modelA,modelB", "--variants", "2", "--mock",
    "--out", str(work / "gen"),
)

# Stage 2: one corpus directory holding schema, records, and letters.
run(
    "ingest", "--schema", str(SCHEMA_PATH), "--representations", str(rows),
    "--descriptions", str(work / "gen" / "descriptions.jsonl"),
    "--out", str(work / "corpus"),
)
run("validate", str(work / "corpus"))

# Stage 3: choose documents to annotate.
run(
    "sample", "--corpus", str(work / "corpus"), "--n", "6", "--seed", "7",
    "--out", str(work / "sampled.txt"),
)
sampled = (work / "sampled.txt").read_text(encoding="utf-8").split()
print(f"sampled: {sampled}\n")

# Stage 4: annotation. Two annotators mark each sampled letter; the second
# one drifts by one character and skips the final aspect span, so strict
# and relaxed agreement come out different.
corpus = load_corpus(work / "corpus")
store = AnnotationStore(work / "annotations", corpus.schema)
registry = store.mint("household", "ann1")

for index, doc_id in enumerate(sorted(sampled)):
    text = corpus.by_doc[doc_id].text
    anchors = [
        (text.find("apply for a loan"), len("apply for a loan"), schema_label("purpose")),
        (text.find("an applicant"), len("an applicant"), new_subject_label("household")),
    ]
    for annotator, shift in (("ann1", 0), ("ann2", 1)):
        doc = AnnotationDoc(doc_id=doc_id, annotator_id=annotator)
        spans = [make_span(s, s + n, [label]) for s, n, label in anchors]
        n_aspects = index % 3 + 1 - (1 if annotator == "ann2" else 0)
        for j in range(n_aspects):
            start = 5 * j + shift
            spans.append(make_span(start, start + 4, [ASPECT_LABEL]))
        for span in spans:
            doc = add_span(doc, span, len(text), schema=corpus.schema, registry=registry)
        store.save(doc)
print(f"annotated {len(sampled)} documents x 2 annotators\n")

# Stage 5: fidelity counts and agreement.
run(
    "fidelity", "--corpus", str(work / "corpus"),
    "--annotations", str(work / "annotations"), "--out", str(work / "report"),
)
run(
    "agreement", "--corpus", str(work / "corpus"),
    "--annotations", str(work / "annotations"), "--annotators", "ann1,ann2",
)

# Stage 6: distances. A throwaway embedding table covers the working
# vocabulary with deterministic vectors; real runs point at a published
# table instead.
vocab = set()
for x in corpus.representations:
    vocab.update(tokenize(serialize_representation(x, corpus.schema)))
for d in corpus.descriptions:
    vocab.update(tokenize(d.text))
lines = []
for token in sorted(vocab):
    digest = hashlib.sha256(token.encode()).digest()
    lines.append(f"{token} {digest[0] / 25.5:.4f} {digest[1] / 25.5:.4f}")
embeddings = work / "embeddings.txt"
embeddings.write_text("\n".join(lines) + "\n", encoding="utf-8")
print(f"wrote {len(vocab)} toy embedding vectors\n")

for variant in ("plain", "preprocessed"):
    run(
        "wmd", "--corpus", str(work / "corpus"), "--docs", "@" + str(work / "sampled.txt"),
        "--embeddings", str(embeddings), "--dim", "2", "--variant", variant,
        "--out", str(work / "distances" / f"{variant}.csv"),
    )

# Stage 7: does distance track what annotators count? With six documents
# this is a smoke run, not an estimate; the letters (a) through (f) name
# the fidelity components. Components that never vary across this tiny
# batch have no defined correlation and print as NA.
run(
    "correlate",
    "--distances",
    f"{work / 'distances' / 'plain.csv'},{work / 'distances' / 'preprocessed.csv'}",
    "--fidelity", str(work / "report" / "report.json"),
    "--out", str(work / "correlation.csv"),
)

print("artifacts:")
for path in sorted(work.rglob("*")):
    if path.is_file():
        print(f"  {path.relative_to(work)}")
