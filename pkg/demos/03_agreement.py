"""
Agreement: strict and relaxed span matching between two annotators
==================================================================

Two annotators label the same letter with slightly different boundaries.
Strict matching demands identical offsets; relaxed matching pairs
overlapping spans with the same label, each span used at most once.
"""

import fidaudit
from fidaudit.agreement import match, micro_average
from fidaudit.annotation import (
    ASPECT_LABEL,
    AnnotationDoc,
    make_span,
    schema_label,
)
from fidaudit.corpus import load_schema

SCHEMA_PATH = fidaudit.__file__.rsplit("/", 1)[0] + "/data/gcd_schema.json"

schema = load_schema(SCHEMA_PATH)

TEXT = (
    "I need 5951 DM over 48 months to buy a new radio. "
    "My flat is rented and I have lived there for two years."
)


def span_for(needle: str, *labels):
    """Locate a phrase in TEXT and wrap it in a labeled span."""
    start = TEXT.find(needle)
    assert start >= 0, needle
    return make_span(start, start + len(needle), labels)


# Annotator A places tight spans; annotator B sweeps wider ones. They agree
# on the subjects, mostly disagree on where a mention starts and ends.
a = AnnotationDoc(
    doc_id="demo-1",
    annotator_id="alice",
    spans=(
        span_for("5951 DM", schema_label("credit_amount")),
        span_for("48 months", schema_label("duration")),
        span_for("buy a new radio", schema_label("purpose")),
        span_for("My flat is rented", schema_label("housing")),
        span_for("I have lived there for two years", ASPECT_LABEL),
    ),
)
b = AnnotationDoc(
    doc_id="demo-1",
    annotator_id="bob",
    spans=(
        span_for("5951 DM", schema_label("credit_amount")),      # identical to A's
        span_for("over 48 months", schema_label("duration")),    # wider
        span_for("a new radio", schema_label("purpose")),        # narrower
        span_for("My flat is rented", schema_label("housing")),  # identical to A's
    ),
)


def show(result, title):
    print(f"{title}: tp={result.tp} of A={result.a_total}, B={result.b_total}")
    print(f"  precision={result.precision:.3f} recall={result.recall:.3f} f1={result.f1:.3f}")
    for ia, ib, label in result.pairs:
        print(f"  A[{ia}] <-> B[{ib}]  {label.render(schema.name)}")
    print()


# Strict: only the offset-for-offset identical (start, end, label) triples pair.
strict = match(a, b, mode="strict")
show(strict, "strict")

# Relaxed: same label plus any positive overlap pairs, largest overlap first.
relaxed = match(a, b, mode="relaxed")
show(relaxed, "relaxed")

# Strict can never beat relaxed: every strict pair is also a relaxed pair.
assert strict.tp <= relaxed.tp

# Corpus-level agreement pools raw counts before taking the ratio, so large
# documents weigh more than small ones.
pooled = micro_average([strict, match(a, a, mode="strict")])
print(f"micro average over two docs: f1={pooled.f1:.3f} (tp={pooled.tp}, A={pooled.a_total}, B={pooled.b_total})")
