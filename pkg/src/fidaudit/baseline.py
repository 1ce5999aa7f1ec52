"""Embedding-distance baseline: exact Word Mover's Distance.

The automatic counterpart to manual mismatch counting: serialize the input
representation to text, tokenize both sides, embed tokens with a GloVe
table, and compute the exact optimal-transport cost between the two
normalized bags of words. Two variants: ``plain`` uses the full
self-description; ``preprocessed`` first removes every token that exactly
matches a token of the serialized representation.

Ground cost is the Euclidean distance between raw embedding vectors. The
transportation problem is solved exactly; no lower-bound relaxation.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .corpus import Corpus, FeatureSchema, InputRepresentation
from .errors import (
    DimensionMismatch,
    EmptyAfterOov,
    MissingRepresentation,
    ParseError,
    SolverFailure,
    ValidationError,
)

PLAIN = "plain"
PREPROCESSED = "preprocessed"
VARIANTS = (PLAIN, PREPROCESSED)


class EmbeddingTable:
    """Immutable token → vector map with a fixed dimension."""

    def __init__(self, name: str, dim: int, entries: dict[str, np.ndarray]):
        if dim <= 0:
            raise DimensionMismatch(f"dimension must be positive, got {dim}")
        for token, vec in entries.items():
            if not token:
                raise ParseError("embedding tokens must be non-empty")
            if vec.shape != (dim,):
                raise DimensionMismatch(
                    f"token {token!r} has {vec.shape[0]} components, expected {dim}"
                )
            if not np.all(np.isfinite(vec)):
                raise ParseError(f"token {token!r} has non-finite components")
        self.name = name
        self.dim = dim
        self.entries = entries

    def __contains__(self, token: str) -> bool:
        return token in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def vector(self, token: str) -> np.ndarray:
        return self.entries[token]


def load_embeddings(
    path: str | Path, expected_dim: int | None = None, name: str | None = None
) -> EmbeddingTable:
    """Load a whitespace-separated "token f1 ... fD" text file.

    The dimension is inferred from the first line unless ``expected_dim``
    pins it. Duplicate tokens keep the last occurrence with a warning.

    Raises:
        ParseError: malformed line (reported with its line number).
        DimensionMismatch: a line disagrees with the established dimension.
    """
    path = Path(path)
    entries: dict[str, np.ndarray] = {}
    dim = expected_dim
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            fields = line.split()
            if len(fields) < 2:
                raise ParseError(f"{path}:{lineno}: need a token and at least one float")
            token = fields[0]
            try:
                vec = np.array([float(v) for v in fields[1:]], dtype=np.float64)
            except ValueError:
                raise ParseError(f"{path}:{lineno}: non-numeric vector component") from None
            if dim is None:
                dim = vec.shape[0]
            elif vec.shape[0] != dim:
                raise DimensionMismatch(
                    f"{path}:{lineno}: {vec.shape[0]} components, expected {dim}"
                )
            if not np.all(np.isfinite(vec)):
                raise ParseError(f"{path}:{lineno}: non-finite vector component")
            if token in entries:
                warnings.warn(
                    f"{path}:{lineno}: duplicate token {token!r}, keeping last",
                    stacklevel=2,
                )
            entries[token] = vec
    if dim is None:
        raise ParseError(f"{path}: no embedding lines found")
    return EmbeddingTable(name=name or path.stem, dim=dim, entries=entries)


def tokenize(text: str) -> list[str]:
    """Lowercase and split on every non-alphanumeric character."""
    out = []
    buf: list[str] = []
    for ch in text.lower():
        if ch.isalnum():
            buf.append(ch)
        elif buf:
            out.append("".join(buf))
            buf.clear()
    if buf:
        out.append("".join(buf))
    return out


def serialize_representation(x: InputRepresentation, schema: FeatureSchema) -> str:
    """One "<display_name>: <decoded value>" line per feature, schema order."""
    return "\n".join(
        f"{f.display_name}: {x.values[f.key].decoded}" for f in schema.features
    )


def preprocess_remove_shared(
    d_tokens: Sequence[str], x_tokens: Sequence[str]
) -> list[str]:
    """Drop every d token whose type occurs anywhere in x."""
    shared = set(x_tokens)
    return [t for t in d_tokens if t not in shared]


@dataclass(frozen=True)
class NBow:
    """Normalized bag of words over in-vocabulary tokens."""

    tokens: tuple[str, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        if len(self.tokens) != len(self.weights):
            raise ValidationError("tokens and weights must align")
        if abs(sum(self.weights) - 1.0) > 1e-12:
            raise ValidationError("weights must sum to 1")


def nbow(tokens: Iterable[str], table: EmbeddingTable) -> NBow:
    """Frequency-normalized distribution over the in-vocabulary tokens.

    Raises:
        EmptyAfterOov: no token is in the table's vocabulary.
    """
    counts: dict[str, int] = {}
    for t in tokens:
        if t in table:
            counts[t] = counts.get(t, 0) + 1
    if not counts:
        raise EmptyAfterOov("no in-vocabulary tokens remain")
    total = sum(counts.values())
    items = tuple(counts.items())
    return NBow(
        tokens=tuple(t for t, _ in items),
        weights=tuple(c / total for _, c in items),
    )


def wmd(p: NBow, q: NBow, table: EmbeddingTable) -> float:
    """Exact Word Mover's Distance between two distributions.

    Minimizes Σ T_ij · ‖v_i − v_j‖₂ over transport plans T with row sums
    ``p.weights`` and column sums ``q.weights``.

    Raises:
        SolverFailure: the LP solver did not report an optimal solution.
    """
    if p.tokens == q.tokens and p.weights == q.weights:
        return 0.0
    vp = np.stack([table.vector(t) for t in p.tokens])
    vq = np.stack([table.vector(t) for t in q.tokens])
    diff = vp[:, None, :] - vq[None, :, :]
    cost = np.sqrt(np.sum(diff * diff, axis=2))
    m, n = cost.shape
    # Row-sum constraints for p plus all-but-one column constraint for q;
    # the last column constraint is implied because both sides sum to 1.
    rows = []
    cols = []
    vals = []
    for i in range(m):
        for j in range(n):
            rows.append(i)
            cols.append(i * n + j)
            vals.append(1.0)
    for j in range(n - 1):
        for i in range(m):
            rows.append(m + j)
            cols.append(i * n + j)
            vals.append(1.0)
    a_eq = sparse.coo_matrix(
        (vals, (rows, cols)), shape=(m + n - 1, m * n)
    ).tocsr()
    b_eq = np.concatenate([np.array(p.weights), np.array(q.weights[: n - 1])])
    res = linprog(
        cost.reshape(-1),
        A_eq=a_eq,
        b_eq=b_eq,
        bounds=(0, None),
        method="highs",
    )
    if res.status != 0:
        raise SolverFailure(f"transport LP did not solve: {res.message}")
    return max(float(res.fun), 0.0)


@dataclass(frozen=True)
class PairDistance:
    """Distance outcome for one (x, d) pair; error text when it failed."""

    doc_id: str
    distance: float | None
    error: str | None = None


def distance_matrix(
    corpus: Corpus,
    doc_ids: Sequence[str],
    table: EmbeddingTable,
    variant: str = PLAIN,
) -> list[PairDistance]:
    """WMD per (representation, description) pair; failures stay per-pair.

    A pair with no linked representation, an empty in-vocabulary side, or
    a solver failure yields a PairDistance with ``distance=None`` and the
    error recorded; the batch always completes.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    out = []
    for doc_id in doc_ids:
        try:
            desc = corpus.description(doc_id)
            x = corpus.representation_for(doc_id)
            if x is None:
                raise MissingRepresentation(
                    f"{doc_id!r} has no linked input representation"
                )
            x_tokens = tokenize(serialize_representation(x, corpus.schema))
            d_tokens = tokenize(desc.text)
            if variant == PREPROCESSED:
                d_tokens = preprocess_remove_shared(d_tokens, x_tokens)
            p = nbow(d_tokens, table)
            q = nbow(x_tokens, table)
            out.append(PairDistance(doc_id=doc_id, distance=wmd(p, q, table)))
        except Exception as e:  # noqa: BLE001 - per-pair isolation is the contract
            out.append(PairDistance(doc_id=doc_id, distance=None, error=str(e)))
    return out
