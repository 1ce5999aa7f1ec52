"""Correlation of automatic distances with manual mismatch counts.

The component table correlates each embedding method's per-document
distance against six count series: fidelity (a), additional schema
labels (b), new subjects (c), aspects (d), their sum (e) = (b)+(c)+(d),
and specializations (f). Counts are annotator-averaged per document
before correlating.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .baseline import PairDistance
from .errors import (
    InsufficientOverlap,
    LengthMismatch,
    TooFewPoints,
    ZeroVariance,
)
from .fidelity import FidelityReport

COMPONENT_ORDER = ("a", "b", "c", "d", "e", "f")

COMPONENT_NAMES = {
    "a": "fidelity",
    "b": "additional_schema",
    "c": "new_subjects",
    "d": "aspects",
    "e": "additional_aspects",
    "f": "specializations",
}


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Product-moment correlation coefficient.

    Raises:
        LengthMismatch: series lengths differ.
        TooFewPoints: fewer than two points.
        ZeroVariance: either series is constant.
    """
    if len(xs) != len(ys):
        raise LengthMismatch(f"series lengths differ: {len(xs)} vs {len(ys)}")
    n = len(xs)
    if n < 2:
        raise TooFewPoints(f"need at least 2 points, got {n}")
    mx = math.fsum(xs) / n
    my = math.fsum(ys) / n
    sxx = math.fsum((x - mx) ** 2 for x in xs)
    syy = math.fsum((y - my) ** 2 for y in ys)
    # A constant series can leave a tiny nonzero sum of squares behind in
    # floating arithmetic; check the exact range as well.
    if sxx == 0.0 or min(xs) == max(xs):
        raise ZeroVariance("first series is constant")
    if syy == 0.0 or min(ys) == max(ys):
        raise ZeroVariance("second series is constant")
    sxy = math.fsum((x - mx) * (y - my) for x, y in zip(xs, ys))
    r = sxy / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


@dataclass(frozen=True)
class ComponentSeries:
    """Per-document values of one count component."""

    component: str
    values: tuple[tuple[str, float], ...]


def component_series(report: FidelityReport) -> dict[str, ComponentSeries]:
    """The six (a)-(f) series from a report's per-document averages."""
    rows: dict[str, list[tuple[str, float]]] = {k: [] for k in COMPONENT_ORDER}
    for doc_id in sorted(report.per_document):
        means = report.per_document[doc_id]
        b = means.additional_schema
        c = means.new_subjects
        d = means.aspects
        rows["a"].append((doc_id, means.fidelity))
        rows["b"].append((doc_id, b))
        rows["c"].append((doc_id, c))
        rows["d"].append((doc_id, d))
        rows["e"].append((doc_id, b + c + d))
        rows["f"].append((doc_id, means.specializations))
    return {
        k: ComponentSeries(component=k, values=tuple(v)) for k, v in rows.items()
    }


@dataclass(frozen=True)
class CorrelationRow:
    """One method's correlations against the six components.

    ``cells`` maps component letter to r, or to None when that cell was
    skipped; ``flags`` records why (e.g. "zero_variance"). ``n`` is the
    number of documents the row correlates over.
    """

    method: str
    n: int
    cells: Mapping[str, float | None]
    flags: Mapping[str, str]


def correlation_table(
    distances: Mapping[str, Sequence[PairDistance]],
    counts: FidelityReport,
) -> list[CorrelationRow]:
    """One row per method; docs without a distance are excluded pairwise.

    Raises:
        InsufficientOverlap: a method shares fewer than 2 documents with
            the count report.
    """
    series = component_series(counts)
    doc_counts = {
        k: dict(s.values) for k, s in series.items()
    }
    out = []
    for method in sorted(distances):
        usable = [
            pd
            for pd in distances[method]
            if pd.distance is not None and pd.doc_id in counts.per_document
        ]
        if len(usable) < 2:
            raise InsufficientOverlap(
                f"method {method!r} shares only {len(usable)} documents with the counts"
            )
        doc_ids = [pd.doc_id for pd in usable]
        dist = [pd.distance for pd in usable]
        cells: dict[str, float | None] = {}
        flags: dict[str, str] = {}
        for k in COMPONENT_ORDER:
            ys = [doc_counts[k][doc_id] for doc_id in doc_ids]
            try:
                cells[k] = pearson(dist, ys)  # type: ignore[arg-type]
            except ZeroVariance:
                cells[k] = None
                flags[k] = "zero_variance"
        out.append(
            CorrelationRow(method=method, n=len(usable), cells=cells, flags=flags)
        )
    return out
