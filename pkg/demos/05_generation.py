"""
Generation: prompts, a scripted client, and the resumable ledger
================================================================

Builds the two prompt flavors for one applicant, runs a small batch of
generation jobs against an offline scripted client, and shows that the
ledger makes reruns free: finished variants are never requested twice.
"""

import tempfile
from pathlib import Path

import fidaudit
from fidaudit.corpus import load_representations, load_schema
from fidaudit.genclient import (
    MockChatClient,
    TransientProviderError,
    build_prompt,
    make_jobs,
    run_jobs,
)

SCHEMA_PATH = Path(fidaudit.__file__).parent / "data" / "gcd_schema.json"

schema = load_schema(SCHEMA_PATH)

RAW_ROW = "A11 6 A34 A43 1169 A65 A75 4 A93 A101 4 A121 67 A143 A152 2 A173 1 A192 A201 1\n"
workdir = Path(tempfile.mkdtemp(prefix="fidaudit-demo-"))
raw_path = workdir / "rows.txt"
raw_path.write_text(RAW_ROW, encoding="utf-8")
[profile] = load_representations(raw_path, schema)

# Value-based prompts carry the decoded record; free prompts name the
# subjects but never their values.
value_prompt = build_prompt(profile, schema, mode="value_based")
free_prompt = build_prompt(None, schema, mode="free")
print("value-based prompt, last 3 lines:")
for line in value_prompt.strip().splitlines()[-3:]:
    print(f"  {line}")
print("free prompt, last 3 lines:")
for line in free_prompt.strip().splitlines()[-3:]:
    print(f"  {line}")

# Two generators, one profile, two variants each: four work items.
jobs = make_jobs(schema, [profile], ["modelA", "modelB"], n_variants=2)
print(f"\n{len(jobs)} jobs, {sum(j.n_variants for j in jobs)} variants to produce")

# The scripted client fails once with a transient error, then recovers.
client = MockChatClient(
    script=[
        "Dear Sir or Madam, I wish to borrow 1169 DM for a new radio.",
        TransientProviderError("rate limited"),
        "To whom it may concern, I am 67, own my home, and need 1169 DM.",
    ]
)

ledger_path = workdir / "ledger.jsonl"
naps: list[float] = []
letters = run_jobs(jobs, client, ledger_path, sleep=naps.append)
print(f"\nproduced {len(letters)} letters with {len(client.calls)} requests")
print(f"backoff naps after the transient failure: {naps}")
for d in letters:
    print(f"  {d.doc_id}: {d.text[:55]}...")

# Rerunning the same jobs touches the client zero times: every variant is
# already in the ledger, keyed by (generator, profile, variant).
before = len(client.calls)
again = run_jobs(jobs, client, ledger_path, sleep=naps.append)
print(f"\nrerun: {len(again)} letters, {len(client.calls) - before} new requests")
print(f"texts identical across runs: {[d.text for d in again] == [d.text for d in letters]}")
print(f"ledger lines: {len(ledger_path.read_text().splitlines())}")
