"""
Distance baseline: Word Mover's Distance between letter and record
==================================================================

Builds a four-word embedding space by hand, serializes a feature record to
text, and measures how far two letters travel from it. The preprocessed
variant strips every word the letter shares with the record first, so only
the letter's additions move any mass.
"""

import numpy as np

from fidaudit.baseline import (
    EmbeddingTable,
    nbow,
    preprocess_remove_shared,
    tokenize,
    wmd,
)

# A tiny planar embedding space: synonyms sit close together, unrelated
# words far apart. Real runs load a published table from disk instead.
table = EmbeddingTable(
    "demo",
    dim=2,
    entries={
        "radio": np.array([0.0, 0.0]),
        "television": np.array([1.0, 0.0]),
        "car": np.array([8.0, 0.0]),
        "loan": np.array([0.0, 5.0]),
        "credit": np.array([0.5, 5.0]),
    },
)

record_text = "purpose: radio\nloan: yes"
close_letter = "I want a television on credit."
far_letter = "Please finance a car, a car is what I need."

print(f"record tokens: {tokenize(record_text)}")
print(f"close letter:  {tokenize(close_letter)}")
print(f"far letter:    {tokenize(far_letter)}\n")

# Out-of-vocabulary tokens ("purpose", "yes", "I", ...) drop out when the
# distribution is built; the rest are frequency-weighted.
record = nbow(tokenize(record_text), table)
close = nbow(tokenize(close_letter), table)
far = nbow(tokenize(far_letter), table)
print(f"record nbow: {dict(zip(record.tokens, record.weights))}")
print(f"close nbow:  {dict(zip(close.tokens, close.weights))}")
print(f"far nbow:    {dict(zip(far.tokens, far.weights))}\n")

# The optimal transport plan ships "television" the 1.0 to "radio" and
# "credit" the 0.5 to "loan": distance (1.0 + 0.5) / 2 = 0.75.
d_close = wmd(close, record, table)
d_far = wmd(far, record, table)
print(f"wmd(close letter, record) = {d_close:.4f}")
print(f"wmd(far letter,   record) = {d_far:.4f}")
assert d_close < d_far

# Symmetry and self-distance, as a distance should behave.
assert wmd(record, close, table) == d_close
assert wmd(record, record, table) == 0.0

# Preprocessing: remove from the letter every word type the record uses.
# A letter that parrots the record verbatim has nothing left to measure.
echo_letter = "radio loan radio"
kept = preprocess_remove_shared(tokenize(echo_letter), tokenize(record_text))
print(f"\npreprocessed echo letter: {kept!r} (every token was shared)")

kept = preprocess_remove_shared(tokenize(close_letter), tokenize(record_text))
print(f"preprocessed close letter: {kept}")
d_pre = wmd(nbow(kept, table), record, table)
print(f"wmd(preprocessed close letter, record) = {d_pre:.4f}")
