"""
Corpus tour: schema, coded rows, decoded representations
=========================================================

Loads the bundled German-credit feature schema, ingests two raw
space-separated rows, decodes every categorical code, links a couple of
loan-application letters, and round-trips the whole corpus through a
directory.
"""

import tempfile
from pathlib import Path

import fidaudit
from fidaudit.corpus import (
    Corpus,
    SelfDescription,
    load_corpus,
    load_representations,
    load_schema,
    save_corpus,
)

SCHEMA_PATH = Path(fidaudit.__file__).parent / "data" / "gcd_schema.json"

# Two applicants in the dataset's native coded format: 20 feature columns
# plus the credit outcome, which the loader ignores.
RAW_ROWS = """\
A11 6 A34 A43 1169 A65 A75 4 A93 A101 4 A121 67 A143 A152 2 A173 1 A192 A201 1
A12 48 A32 A43 5951 A61 A73 2 A92 A101 2 A121 22 A143 A152 1 A173 1 A191 A201 2
"""

workdir = Path(tempfile.mkdtemp(prefix="fidaudit-demo-"))
print(f"working in {workdir}\n")

schema = load_schema(SCHEMA_PATH)
print(f"schema {schema.name}: {len(schema)} features")
for f in schema.features[:4]:
    print(f"  {f.key} ({f.kind}): {f.display_name}")
print("  ...\n")

raw_path = workdir / "rows.txt"
raw_path.write_text(RAW_ROWS, encoding="utf-8")
representations = load_representations(raw_path, schema)
print(f"ingested {len(representations)} representations")

# Every raw code is stored next to its decoded reading.
x = representations[0]
print(f"\nprofile {x.profile_id}, decoded:")
for f in schema.features:
    value = x.values[f.key]
    print(f"  {f.display_name:<42s} {value.raw:>6s} -> {value.decoded}")

# Self-descriptions are the texts the audit compares against x.
letters = [
    SelfDescription(
        doc_id="demo-p0001-1",
        profile_id="p0001",
        generator_id="demo",
        variant_index=1,
        text=(
            "Dear Sir or Madam, I would like to apply for a loan of 1169 DM "
            "to replace my radio. I am 67 years old and own my house. "
            "Yours faithfully."
        ),
    ),
    SelfDescription(
        doc_id="demo-p0002-1",
        profile_id="p0002",
        generator_id="demo",
        variant_index=1,
        text=(
            "Dear Sir or Madam, I am asking for 5951 DM over 48 months "
            "for a new radio for my flat. Yours faithfully."
        ),
    ),
]

corpus = Corpus(schema, representations, letters)
print(f"\ncorpus: {len(corpus.representations)} profiles, {len(corpus.descriptions)} letters")
print(f"invariant problems: {corpus.problems() or 'none'}")

# The directory layout is the interchange format every other command reads.
corpus_dir = workdir / "corpus"
save_corpus(corpus, corpus_dir)
reloaded = load_corpus(corpus_dir)
print(f"\nsaved to {corpus_dir} and reloaded:")
for name in ("schema.json", "representations.jsonl", "descriptions.jsonl"):
    print(f"  {name}: {(corpus_dir / name).stat().st_size} bytes")
print(f"reloaded letter text matches: {reloaded.by_doc['demo-p0001-1'].text == letters[0].text}")
