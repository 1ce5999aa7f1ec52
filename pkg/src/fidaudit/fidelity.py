"""Representation-fidelity counting and corpus-level aggregation.

Fidelity counts the additive (Type-1) material in a self-description that
the fixed input representation has no room for: schema-label assignments
beyond each key's first occurrence, new subjects, aspects, and
specializations. Omitted subjects (Type-2) are the schema features the
description never mentions.

Counts are over span-label assignments, not spans: a multi-label span
contributes to every component it carries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .annotation import ASPECT, NEW_SUBJECT, SCHEMA_FEATURE, SPECIALIZATION, AnnotationDoc
from .corpus import FeatureSchema
from .errors import (
    EmptyInput,
    InsufficientData,
    ParseError,
    SchemaMismatch,
    ValidationError,
)

COMPONENT_FIELDS = (
    "additional_schema",
    "new_subjects",
    "aspects",
    "specializations",
    "distinct_schema_labels",
    "omitted_subjects",
    "fidelity",
)


@dataclass(frozen=True)
class ComponentCounts:
    """Integer fidelity components for one (doc, annotator) pair."""

    additional_schema: int
    new_subjects: int
    aspects: int
    specializations: int
    distinct_schema_labels: int
    omitted_subjects: int
    fidelity: int

    def __post_init__(self):
        for name in COMPONENT_FIELDS:
            if getattr(self, name) < 0:
                raise ValidationError(f"component {name} is negative")
        expected = (
            self.additional_schema
            + self.new_subjects
            + self.aspects
            + self.specializations
        )
        if self.fidelity != expected:
            raise ValidationError(
                f"fidelity {self.fidelity} != sum of additive components {expected}"
            )

    def as_tuple(self) -> tuple[int, ...]:
        return tuple(getattr(self, name) for name in COMPONENT_FIELDS)


@dataclass(frozen=True)
class ComponentMeans:
    """Real-valued component vector (averages or standard deviations)."""

    additional_schema: float
    new_subjects: float
    aspects: float
    specializations: float
    distinct_schema_labels: float
    omitted_subjects: float
    fidelity: float

    def as_tuple(self) -> tuple[float, ...]:
        return tuple(getattr(self, name) for name in COMPONENT_FIELDS)


def counts_from_parts(
    additional_schema: int,
    new_subjects: int,
    aspects: int,
    specializations: int,
    distinct_schema_labels: int,
    schema_size: int,
) -> ComponentCounts:
    return ComponentCounts(
        additional_schema=additional_schema,
        new_subjects=new_subjects,
        aspects=aspects,
        specializations=specializations,
        distinct_schema_labels=distinct_schema_labels,
        omitted_subjects=schema_size - distinct_schema_labels,
        fidelity=additional_schema + new_subjects + aspects + specializations,
    )


def count_components(doc: AnnotationDoc, schema: FeatureSchema) -> ComponentCounts:
    """Tally fidelity components over all span-label assignments.

    Raises:
        SchemaMismatch: a span references a feature key the schema lacks.
    """
    total_schema = 0
    keys: set[str] = set()
    new_subjects = 0
    aspects = 0
    specializations = 0
    for span in doc.spans:
        for label in span.labels:
            if label.kind == SCHEMA_FEATURE:
                if label.name not in schema:
                    raise SchemaMismatch(
                        f"{doc.doc_id}/{doc.annotator_id}: unknown schema key {label.name!r}"
                    )
                total_schema += 1
                keys.add(label.name)  # type: ignore[arg-type]
            elif label.kind == NEW_SUBJECT:
                new_subjects += 1
            elif label.kind == ASPECT:
                aspects += 1
            elif label.kind == SPECIALIZATION:
                specializations += 1
    return counts_from_parts(
        additional_schema=total_schema - len(keys),
        new_subjects=new_subjects,
        aspects=aspects,
        specializations=specializations,
        distinct_schema_labels=len(keys),
        schema_size=len(schema),
    )


# -- aggregation -------------------------------------------------------------


@dataclass(frozen=True)
class FidelityReport:
    """Two-stage averages: annotators within a doc, then docs."""

    per_annotation: Mapping[tuple[str, str], ComponentCounts]
    per_document: Mapping[str, ComponentMeans]
    corpus_mean: ComponentMeans
    corpus_std: ComponentMeans
    label: str = ""


def _mean_vectors(vectors: Sequence[tuple[float, ...]]) -> tuple[float, ...]:
    n = len(vectors)
    return tuple(
        math.fsum(v[i] for v in vectors) / n for i in range(len(COMPONENT_FIELDS))
    )


def _std_vectors(
    vectors: Sequence[tuple[float, ...]], means: tuple[float, ...]
) -> tuple[float, ...]:
    # Population standard deviation over document averages.
    n = len(vectors)
    return tuple(
        math.sqrt(math.fsum((v[i] - means[i]) ** 2 for v in vectors) / n)
        for i in range(len(COMPONENT_FIELDS))
    )


def aggregate(
    counts: Mapping[tuple[str, str], ComponentCounts], label: str = ""
) -> FidelityReport:
    """Average over annotators per document, then over documents.

    Raises:
        EmptyInput: no counts given.
    """
    if not counts:
        raise EmptyInput("no component counts to aggregate")
    by_doc: dict[str, list[tuple[float, ...]]] = {}
    for (doc_id, _annotator_id), c in counts.items():
        by_doc.setdefault(doc_id, []).append(tuple(float(v) for v in c.as_tuple()))
    per_document = {
        doc_id: ComponentMeans(*_mean_vectors(vs)) for doc_id, vs in by_doc.items()
    }
    doc_vectors = [m.as_tuple() for m in per_document.values()]
    mean = _mean_vectors(doc_vectors)
    std = _std_vectors(doc_vectors, mean)
    return FidelityReport(
        per_annotation=dict(counts),
        per_document=per_document,
        corpus_mean=ComponentMeans(*mean),
        corpus_std=ComponentMeans(*std),
        label=label,
    )


@dataclass(frozen=True)
class RankingEntry:
    label: str
    mean: ComponentMeans
    std: ComponentMeans


def compare_systems(reports: Sequence[FidelityReport]) -> list[RankingEntry]:
    """Rank reports by mean fidelity, highest first; ties keep label order.

    Raises:
        InsufficientData: fewer than two reports.
    """
    if len(reports) < 2:
        raise InsufficientData("need at least two reports to compare")
    entries = [
        RankingEntry(label=r.label, mean=r.corpus_mean, std=r.corpus_std)
        for r in reports
    ]
    return sorted(entries, key=lambda e: (-e.mean.fidelity, e.label))


def report_to_payload(report: FidelityReport) -> dict:
    """JSON-ready form of a report; annotation keys become 'doc/annotator'."""

    def comp(values) -> dict:
        return {name: v for name, v in zip(COMPONENT_FIELDS, values.as_tuple())}

    return {
        "label": report.label,
        "per_annotation": {
            f"{doc_id}/{annotator_id}": comp(c)
            for (doc_id, annotator_id), c in sorted(report.per_annotation.items())
        },
        "per_document": {
            doc_id: comp(m) for doc_id, m in sorted(report.per_document.items())
        },
        "corpus": {"mean": comp(report.corpus_mean), "std": comp(report.corpus_std)},
    }


def report_from_payload(payload: dict) -> FidelityReport:
    """Inverse of :func:`report_to_payload`.

    Raises:
        ParseError: the payload misses fields or holds non-numeric values.
    """
    try:
        per_annotation = {}
        for key, comp in payload.get("per_annotation", {}).items():
            doc_id, _, annotator_id = key.partition("/")
            per_annotation[(doc_id, annotator_id)] = ComponentCounts(
                **{name: int(comp[name]) for name in COMPONENT_FIELDS}
            )
        per_document = {
            doc_id: ComponentMeans(
                **{name: float(comp[name]) for name in COMPONENT_FIELDS}
            )
            for doc_id, comp in payload["per_document"].items()
        }
        corpus = payload["corpus"]
        mean = ComponentMeans(
            **{name: float(corpus["mean"][name]) for name in COMPONENT_FIELDS}
        )
        std = ComponentMeans(
            **{name: float(corpus["std"][name]) for name in COMPONENT_FIELDS}
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"malformed fidelity report payload: {e}") from None
    return FidelityReport(
        per_annotation=per_annotation,
        per_document=per_document,
        corpus_mean=mean,
        corpus_std=std,
        label=str(payload.get("label", "")),
    )
