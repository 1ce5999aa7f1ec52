"""Inter-annotator agreement: strict and relaxed span F1.

Both modes score span-label assignments (a span with k labels contributes
k assignments) one-to-one: no assignment participates in two pairs. Strict
requires identical offsets and label; relaxed requires the same label and
an overlap of at least one code point, pairing greedily by descending
overlap with deterministic tie-breaks.

Two empty docs agree perfectly (F1 = 1.0); one empty doc against a
non-empty one scores 0.0.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Sequence

from .annotation import AnnotationDoc, Label
from .errors import DocMismatch, EmptyInput, MixedModes

STRICT = "strict"
RELAXED = "relaxed"


@dataclass(frozen=True)
class MatchResult:
    """Outcome of matching two docs' assignments.

    ``pairs`` holds (span index in A, span index in B, shared label);
    micro-averaged results carry no pairs.
    """

    mode: str
    pairs: tuple[tuple[int, int, Label], ...]
    tp: int
    a_total: int
    b_total: int
    precision: float
    recall: float
    f1: float


def _ratios(tp: int, a_total: int, b_total: int) -> tuple[float, float, float]:
    if a_total == 0 and b_total == 0:
        return 1.0, 1.0, 1.0
    precision = tp / a_total if a_total else 0.0
    recall = tp / b_total if b_total else 0.0
    if precision + recall == 0:
        return precision, recall, 0.0
    return precision, recall, 2 * precision * recall / (precision + recall)


def _result(
    mode: str, pairs: Sequence[tuple[int, int, Label]], a_total: int, b_total: int
) -> MatchResult:
    tp = len(pairs)
    precision, recall, f1 = _ratios(tp, a_total, b_total)
    return MatchResult(
        mode=mode,
        pairs=tuple(pairs),
        tp=tp,
        a_total=a_total,
        b_total=b_total,
        precision=precision,
        recall=recall,
        f1=f1,
    )


def _require_same_doc(a: AnnotationDoc, b: AnnotationDoc) -> None:
    if a.doc_id != b.doc_id:
        raise DocMismatch(
            f"cannot compare annotations of {a.doc_id!r} and {b.doc_id!r}"
        )


def _assignment_total(doc: AnnotationDoc) -> int:
    return sum(len(span.labels) for span in doc.spans)


def match_strict(a: AnnotationDoc, b: AnnotationDoc) -> MatchResult:
    """Exact-offset agreement: multiset intersection of (start, end, label).

    Raises:
        DocMismatch: the docs annotate different texts.
    """
    _require_same_doc(a, b)
    a_slots: dict[tuple[int, int, Label], list[int]] = defaultdict(list)
    b_slots: dict[tuple[int, int, Label], list[int]] = defaultdict(list)
    for i, span in enumerate(a.spans):
        for label in span.labels:
            a_slots[(span.start, span.end, label)].append(i)
    for j, span in enumerate(b.spans):
        for label in span.labels:
            b_slots[(span.start, span.end, label)].append(j)
    pairs = []
    for key, a_idx in a_slots.items():
        b_idx = b_slots.get(key)
        if not b_idx:
            continue
        label = key[2]
        for i, j in zip(a_idx, b_idx):
            pairs.append((i, j, label))
    pairs.sort(key=lambda p: (p[0], p[1]))
    return _result(STRICT, pairs, _assignment_total(a), _assignment_total(b))


def match_relaxed(a: AnnotationDoc, b: AnnotationDoc) -> MatchResult:
    """Overlap agreement: per label, greedy one-to-one pairing.

    Candidate pairs share a label and overlap by ≥ 1 code point; they are
    consumed in order of descending overlap, ties by earlier A start, then
    earlier B start, then span order. The greedy outcome is symmetric in
    (a, b): forward and reverse orders agree on the relative order of every
    two candidates that share an endpoint, which fixes the matched set.

    Raises:
        DocMismatch: the docs annotate different texts.
    """
    _require_same_doc(a, b)
    a_nodes: dict[Label, list[int]] = defaultdict(list)
    b_nodes: dict[Label, list[int]] = defaultdict(list)
    for i, span in enumerate(a.spans):
        for label in span.labels:
            a_nodes[label].append(i)
    for j, span in enumerate(b.spans):
        for label in span.labels:
            b_nodes[label].append(j)
    edges: list[tuple[tuple[int, int, int, int, int], Label]] = []
    for label, a_idx in a_nodes.items():
        b_idx = b_nodes.get(label)
        if not b_idx:
            continue
        for i in a_idx:
            sa = a.spans[i]
            for j in b_idx:
                sb = b.spans[j]
                overlap = min(sa.end, sb.end) - max(sa.start, sb.start)
                if overlap >= 1:
                    edges.append(((-overlap, sa.start, sb.start, i, j), label))
    edges.sort(key=lambda e: e[0])
    used_a: set[tuple[int, Label]] = set()
    used_b: set[tuple[int, Label]] = set()
    pairs = []
    for (_, _, _, i, j), label in edges:
        if (i, label) in used_a or (j, label) in used_b:
            continue
        used_a.add((i, label))
        used_b.add((j, label))
        pairs.append((i, j, label))
    pairs.sort(key=lambda p: (p[0], p[1]))
    return _result(RELAXED, pairs, _assignment_total(a), _assignment_total(b))


def match(a: AnnotationDoc, b: AnnotationDoc, mode: str) -> MatchResult:
    if mode == STRICT:
        return match_strict(a, b)
    if mode == RELAXED:
        return match_relaxed(a, b)
    raise ValueError(f"unknown mode {mode!r}")


def micro_average(results: Sequence[MatchResult]) -> MatchResult:
    """Pool tp and totals across documents, then recompute the ratios.

    Raises:
        EmptyInput: no results given.
        MixedModes: strict and relaxed results mixed in one call.
    """
    if not results:
        raise EmptyInput("no match results to average")
    modes = {r.mode for r in results}
    if len(modes) > 1:
        raise MixedModes(f"cannot pool modes {sorted(modes)}")
    if len(results) == 1:
        return results[0]
    tp = sum(r.tp for r in results)
    a_total = sum(r.a_total for r in results)
    b_total = sum(r.b_total for r in results)
    precision, recall, f1 = _ratios(tp, a_total, b_total)
    return MatchResult(
        mode=modes.pop(),
        pairs=(),
        tp=tp,
        a_total=a_total,
        b_total=b_total,
        precision=precision,
        recall=recall,
        f1=f1,
    )
