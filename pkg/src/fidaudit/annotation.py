"""Span annotations, the four-label scheme, and the mismatch taxonomy.

Annotators mark spans of a self-description and give each span one or more
labels: a schema feature (a subject already in the input representation), a
dynamically minted new subject, an aspect marker, or a specialization
marker. Docs are value-like; operations return updated copies. Persistence
is one file per (doc_id, annotator_id) with version-based optimistic
concurrency.

All offsets count Unicode code points.
"""

from __future__ import annotations

import json
import os
import re
import threading
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import ID_PATTERN, FeatureSchema
from .errors import (
    EmptyLabelSet,
    NameCollision,
    NotFound,
    OutOfBounds,
    ParseError,
    UnknownLabel,
    UnknownMismatch,
    ValidationError,
    VersionConflict,
)

SCHEMA_FEATURE = "schema_feature"
NEW_SUBJECT = "new_subject"
ASPECT = "aspect"
SPECIALIZATION = "specialization"

_KINDS_WITH_NAME = (SCHEMA_FEATURE, NEW_SUBJECT)
_KINDS_BARE = (ASPECT, SPECIALIZATION)

_NORMALIZED_NAME = re.compile(r"^[a-z0-9]+(_[a-z0-9]+)*$")


@dataclass(frozen=True)
class Label:
    """One label on a span.

    ``name`` is the feature key for schema-feature labels and the
    normalized subject name for new-subject labels; bare kinds carry none.
    """

    kind: str
    name: str | None = None

    def __post_init__(self):
        if self.kind in _KINDS_WITH_NAME:
            if not self.name:
                raise ValidationError(f"label kind {self.kind!r} needs a name")
        elif self.kind in _KINDS_BARE:
            if self.name is not None:
                raise ValidationError(f"label kind {self.kind!r} takes no name")
        else:
            raise ValidationError(f"unknown label kind {self.kind!r}")
        if self.kind == NEW_SUBJECT and not _NORMALIZED_NAME.match(self.name):  # type: ignore[arg-type]
            raise ValidationError(
                f"new-subject name {self.name!r} is not normalized "
                "(lowercase, single underscores)"
            )

    def render(self, schema_name: str) -> str:
        """External string form, e.g. ``"GCD_age"`` or ``"new_pet"``."""
        if self.kind == SCHEMA_FEATURE:
            return f"{schema_name}_{self.name}"
        if self.kind == NEW_SUBJECT:
            return f"new_{self.name}"
        return self.kind

    def sort_key(self) -> tuple[str, str]:
        return (self.kind, self.name or "")


ASPECT_LABEL = Label(ASPECT)
SPECIALIZATION_LABEL = Label(SPECIALIZATION)


def schema_label(key: str) -> Label:
    return Label(SCHEMA_FEATURE, key)


def new_subject_label(name: str) -> Label:
    return Label(NEW_SUBJECT, name)


def parse_label(rendered: str, schema: FeatureSchema) -> Label:
    """Inverse of :meth:`Label.render` under the given schema.

    Raises:
        UnknownLabel: the string matches no label form, or names a schema
            feature that does not exist.
    """
    if rendered == ASPECT:
        return ASPECT_LABEL
    if rendered == SPECIALIZATION:
        return SPECIALIZATION_LABEL
    prefix = schema.name + "_"
    if rendered.startswith(prefix) and rendered[len(prefix):] in schema:
        return Label(SCHEMA_FEATURE, rendered[len(prefix):])
    if rendered.startswith("new_"):
        name = rendered[len("new_"):]
        if _NORMALIZED_NAME.match(name):
            return Label(NEW_SUBJECT, name)
    raise UnknownLabel(f"unrecognized label {rendered!r}")


@dataclass(frozen=True)
class Span:
    """A labeled, half-open code-point interval ``[start, end)``."""

    start: int
    end: int
    labels: tuple[Label, ...]

    def __post_init__(self):
        if not self.labels:
            raise EmptyLabelSet("a span needs at least one label")
        if self.start < 0 or self.end <= self.start:
            raise OutOfBounds(f"bad span interval [{self.start}, {self.end})")
        canon = tuple(sorted(set(self.labels), key=Label.sort_key))
        object.__setattr__(self, "labels", canon)


def make_span(start: int, end: int, labels: Iterable[Label]) -> Span:
    return Span(start=start, end=end, labels=tuple(labels))


@dataclass(frozen=True)
class AnnotationDoc:
    """All spans one annotator placed on one self-description.

    ``version`` is the optimistic-concurrency counter of the persisted
    copy; 0 means never saved.
    """

    doc_id: str
    annotator_id: str
    spans: tuple[Span, ...] = ()
    version: int = 0


def add_span(
    doc: AnnotationDoc,
    span: Span,
    text_len: int,
    schema: FeatureSchema | None = None,
    registry: "LabelRegistry | None" = None,
) -> AnnotationDoc:
    """Copy of ``doc`` with ``span`` appended.

    When ``schema`` or ``registry`` are given, the span's labels are
    validated against them first.

    Raises:
        OutOfBounds: the span does not fit in ``[0, text_len]``.
        UnknownLabel: a label fails validation.
    """
    if span.end > text_len:
        raise OutOfBounds(
            f"span [{span.start}, {span.end}) exceeds text length {text_len}"
        )
    if schema is not None or registry is not None:
        check_labels(span.labels, schema=schema, registry=registry)
    return replace(doc, spans=doc.spans + (span,))


def check_labels(
    labels: Iterable[Label],
    schema: FeatureSchema | None = None,
    registry: "LabelRegistry | None" = None,
) -> None:
    """Raise UnknownLabel for labels that the schema/registry reject."""
    for label in labels:
        if label.kind == SCHEMA_FEATURE and schema is not None:
            if label.name not in schema:
                raise UnknownLabel(f"schema has no feature {label.name!r}")
        if label.kind == NEW_SUBJECT and registry is not None:
            if not registry.has_new_subject(label.name):  # type: ignore[arg-type]
                raise UnknownLabel(f"new subject {label.name!r} is not registered")


def coverage(doc: AnnotationDoc, text_len: int) -> float:
    """Fraction of the text's code points inside at least one span.

    Overlapping spans count once. An empty doc covers nothing.
    """
    if not doc.spans:
        return 0.0
    if text_len <= 0:
        raise OutOfBounds("text_len must be positive for a non-empty doc")
    covered = 0
    last_end = 0
    for span in sorted(doc.spans, key=lambda s: (s.start, s.end)):
        start = max(span.start, last_end)
        if span.end > start:
            covered += span.end - start
            last_end = span.end
    return covered / text_len


def annotation_warnings(
    doc: AnnotationDoc, text_len: int, coverage_threshold: float = 0.9
) -> list[str]:
    """Soft findings: low coverage. Hard violations raise elsewhere."""
    out = []
    ratio = coverage(doc, text_len)
    if ratio < coverage_threshold:
        out.append(
            f"{doc.doc_id}/{doc.annotator_id}: coverage {ratio:.3f} "
            f"below threshold {coverage_threshold:.3f}"
        )
    return out


def check_annotation(
    doc: AnnotationDoc,
    text_len: int,
    schema: FeatureSchema,
    registry: "LabelRegistry | None" = None,
) -> None:
    """Recheck persisted-doc invariants (bounds, known labels)."""
    for span in doc.spans:
        if span.end > text_len:
            raise OutOfBounds(
                f"{doc.doc_id}/{doc.annotator_id}: span [{span.start}, {span.end}) "
                f"exceeds text length {text_len}"
            )
        check_labels(span.labels, schema=schema, registry=registry)


# -- mismatch taxonomy -------------------------------------------------------


@dataclass(frozen=True)
class MismatchKind:
    """One row of the mismatch typology."""

    name: str
    type_class: int
    traits: tuple[str, str, str]


_T1 = ("asymmetric", "quantitative", "additive")
_T2 = ("asymmetric", "quantitative", "omissive")
_T3 = ("symmetric", "qualitative", "semantic")

MISMATCH_TAXONOMY: tuple[MismatchKind, ...] = (
    MismatchKind("additional aspect", 1, _T1),
    MismatchKind("specialization", 1, _T1),
    MismatchKind("additional subject", 1, _T1),
    MismatchKind("omitted aspect", 2, _T2),
    MismatchKind("generalization", 2, _T2),
    MismatchKind("omitted subject", 2, _T2),
    MismatchKind("inconsistent aspect", 3, _T3),
    MismatchKind("inconsistent specification", 3, _T3),
    MismatchKind("inconsistent generalization", 3, _T3),
    MismatchKind("inconsistent subject", 3, _T3),
)

_TAXONOMY_BY_NAME = {k.name: k for k in MISMATCH_TAXONOMY}


def classify_mismatch(name: str) -> tuple[int, tuple[str, str, str]]:
    """Type class and trait triple for a mismatch name.

    Raises:
        UnknownMismatch: the name is not one of the ten taxonomy entries.
    """
    try:
        kind = _TAXONOMY_BY_NAME[name]
    except KeyError:
        raise UnknownMismatch(f"unknown mismatch name {name!r}") from None
    return kind.type_class, kind.traits


# -- label registry ----------------------------------------------------------


def normalize_subject_name(name: str) -> str:
    """Lowercase, collapse non-alphanumeric runs to single underscores."""
    parts = re.split(r"[^a-z0-9]+", name.lower())
    return "_".join(p for p in parts if p)


@dataclass(frozen=True)
class NewSubjectEntry:
    name: str
    created_by: str
    created_at: float


@dataclass(frozen=True)
class LabelRegistry:
    """Schema-derived labels plus the append-only new-subject set."""

    schema: FeatureSchema
    new_subjects: tuple[NewSubjectEntry, ...] = ()

    def schema_labels(self) -> tuple[str, ...]:
        return tuple(f"{self.schema.name}_{key}" for key in self.schema.keys())

    def new_subject_names(self) -> tuple[str, ...]:
        return tuple(e.name for e in self.new_subjects)

    def has_new_subject(self, name: str) -> bool:
        return any(e.name == name for e in self.new_subjects)


def mint_new_subject(
    registry: LabelRegistry,
    name: str,
    annotator_id: str,
    now: float | None = None,
) -> LabelRegistry:
    """Registry with the normalized subject added; idempotent.

    Raises:
        ValidationError: nothing is left of the name after normalization.
        NameCollision: the normalized name is already a schema key.
    """
    normalized = normalize_subject_name(name)
    if not normalized:
        raise ValidationError(f"subject name {name!r} normalizes to nothing")
    if normalized in registry.schema:
        raise NameCollision(
            f"{normalized!r} is already a feature key of schema {registry.schema.name!r}"
        )
    if registry.has_new_subject(normalized):
        return registry
    entry = NewSubjectEntry(
        name=normalized,
        created_by=annotator_id,
        created_at=time.time() if now is None else now,
    )
    return replace(registry, new_subjects=registry.new_subjects + (entry,))


def registry_to_payload(registry: LabelRegistry) -> dict:
    return {
        "schema_labels": list(registry.schema_labels()),
        "new_subjects": [
            {"name": e.name, "created_by": e.created_by, "created_at": e.created_at}
            for e in registry.new_subjects
        ],
    }


def registry_from_payload(payload: dict, schema: FeatureSchema) -> LabelRegistry:
    entries = []
    raw = payload.get("new_subjects", [])
    if not isinstance(raw, list):
        raise ParseError("registry new_subjects must be a list")
    for item in raw:
        try:
            entries.append(
                NewSubjectEntry(
                    name=item["name"],
                    created_by=item["created_by"],
                    created_at=float(item["created_at"]),
                )
            )
        except (KeyError, TypeError) as e:
            raise ParseError(f"bad registry entry {item!r}: {e}") from None
    return LabelRegistry(schema=schema, new_subjects=tuple(entries))


# -- annotation file format --------------------------------------------------


def annotation_to_payload(doc: AnnotationDoc, schema: FeatureSchema) -> dict:
    """Interchange form: rendered labels, spans sorted by position."""
    spans = []
    for span in sorted(doc.spans, key=lambda s: (s.start, s.end, s.labels)):
        spans.append(
            {
                "start": span.start,
                "end": span.end,
                "labels": sorted(label.render(schema.name) for label in span.labels),
            }
        )
    return {
        "doc_id": doc.doc_id,
        "annotator_id": doc.annotator_id,
        "version": doc.version,
        "spans": spans,
    }


def annotation_from_payload(payload: dict, schema: FeatureSchema) -> AnnotationDoc:
    """Parse the interchange form.

    Raises:
        ParseError: structurally malformed payload.
        UnknownLabel, OutOfBounds, EmptyLabelSet: invalid span content.
    """
    if not isinstance(payload, dict):
        raise ParseError("annotation payload must be an object")
    doc_id = payload.get("doc_id")
    annotator_id = payload.get("annotator_id")
    version = payload.get("version", 0)
    raw_spans = payload.get("spans", [])
    if not isinstance(doc_id, str) or not doc_id:
        raise ParseError("annotation needs a doc_id")
    if not isinstance(annotator_id, str) or not annotator_id:
        raise ParseError("annotation needs an annotator_id")
    if not isinstance(version, int) or version < 0:
        raise ParseError("version must be a non-negative integer")
    if not isinstance(raw_spans, list):
        raise ParseError("spans must be a list")
    spans = []
    for i, item in enumerate(raw_spans):
        if not isinstance(item, dict):
            raise ParseError(f"span #{i + 1} is not an object")
        try:
            start = item["start"]
            end = item["end"]
            labels = item["labels"]
        except KeyError as e:
            raise ParseError(f"span #{i + 1}: missing field {e}") from None
        if not isinstance(start, int) or not isinstance(end, int):
            raise ParseError(f"span #{i + 1}: offsets must be integers")
        if not isinstance(labels, list):
            raise ParseError(f"span #{i + 1}: labels must be a list")
        spans.append(
            Span(
                start=start,
                end=end,
                labels=tuple(parse_label(s, schema) for s in labels),
            )
        )
    return AnnotationDoc(
        doc_id=doc_id,
        annotator_id=annotator_id,
        spans=tuple(spans),
        version=version,
    )


def annotation_to_text(doc: AnnotationDoc, schema: FeatureSchema) -> str:
    return json.dumps(annotation_to_payload(doc, schema), ensure_ascii=False, indent=2) + "\n"


# -- persistence -------------------------------------------------------------


def _write_durable(path: Path, text: str) -> None:
    # Write-to-temp + fsync + rename so readers never observe a torn file.
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def _check_id(value: str, what: str) -> str:
    if not ID_PATTERN.match(value):
        raise ValidationError(f"{what} {value!r} must match {ID_PATTERN.pattern}")
    return value


class AnnotationStore:
    """File-backed annotation persistence under one directory.

    Layout: ``<root>/<doc_id>/<annotator_id>.json`` plus
    ``<root>/registry.json`` for minted labels. Saves take the version the
    caller based its edit on; a mismatch with the stored version raises
    VersionConflict and changes nothing.
    """

    REGISTRY_FILENAME = "registry.json"

    def __init__(self, root: str | Path, schema: FeatureSchema):
        self.root = Path(root)
        self.schema = schema
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def _path(self, doc_id: str, annotator_id: str) -> Path:
        _check_id(doc_id, "doc_id")
        _check_id(annotator_id, "annotator_id")
        return self.root / doc_id / f"{annotator_id}.json"

    def load(self, doc_id: str, annotator_id: str) -> AnnotationDoc:
        """Stored doc, or an empty version-0 doc if never saved."""
        path = self._path(doc_id, annotator_id)
        if not path.exists():
            return AnnotationDoc(doc_id=doc_id, annotator_id=annotator_id)
        try:
            payload = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise ParseError(f"{path}: invalid JSON: {e}") from e
        doc = annotation_from_payload(payload, self.schema)
        if doc.doc_id != doc_id or doc.annotator_id != annotator_id:
            raise ParseError(f"{path}: ids in file do not match its location")
        return doc

    def save(self, doc: AnnotationDoc) -> AnnotationDoc:
        """Persist ``doc``, bumping its version.

        ``doc.version`` must equal the stored version (0 if never saved).

        Raises:
            VersionConflict: someone saved a newer version in between.
        """
        path = self._path(doc.doc_id, doc.annotator_id)
        with self._lock:
            stored = self.load(doc.doc_id, doc.annotator_id)
            if doc.version != stored.version:
                raise VersionConflict(
                    f"{doc.doc_id}/{doc.annotator_id}: save is based on version "
                    f"{doc.version} but stored version is {stored.version}",
                    detail={"stored_version": stored.version},
                )
            updated = replace(doc, version=doc.version + 1)
            path.parent.mkdir(parents=True, exist_ok=True)
            _write_durable(path, annotation_to_text(updated, self.schema))
            return updated

    def doc_ids(self) -> list[str]:
        return sorted(
            p.name for p in self.root.iterdir() if p.is_dir() and ID_PATTERN.match(p.name)
        )

    def annotator_ids(self, doc_id: str) -> list[str]:
        _check_id(doc_id, "doc_id")
        folder = self.root / doc_id
        if not folder.is_dir():
            return []
        return sorted(
            p.stem
            for p in folder.glob("*.json")
            if ID_PATTERN.match(p.stem)
        )

    def load_pair(self, doc_id: str, a: str, b: str) -> tuple[AnnotationDoc, AnnotationDoc]:
        doc_a = self.load(doc_id, a)
        doc_b = self.load(doc_id, b)
        if not doc_a.spans and not self._path(doc_id, a).exists():
            raise NotFound(f"no annotation for {doc_id!r} by {a!r}")
        if not doc_b.spans and not self._path(doc_id, b).exists():
            raise NotFound(f"no annotation for {doc_id!r} by {b!r}")
        return doc_a, doc_b

    # registry

    def load_registry(self) -> LabelRegistry:
        path = self.root / self.REGISTRY_FILENAME
        if not path.exists():
            return LabelRegistry(schema=self.schema)
        try:
            payload = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise ParseError(f"{path}: invalid JSON: {e}") from e
        return registry_from_payload(payload, self.schema)

    def save_registry(self, registry: LabelRegistry) -> None:
        path = self.root / self.REGISTRY_FILENAME
        with self._lock:
            text = json.dumps(registry_to_payload(registry), ensure_ascii=False, indent=2)
            _write_durable(path, text + "\n")

    def mint(self, name: str, annotator_id: str) -> LabelRegistry:
        """Mint under the store lock and persist the updated registry."""
        with self._lock:
            registry = self.load_registry()
            updated = mint_new_subject(registry, name, annotator_id)
            if updated is not registry:
                text = json.dumps(
                    registry_to_payload(updated), ensure_ascii=False, indent=2
                )
                _write_durable(self.root / self.REGISTRY_FILENAME, text + "\n")
            return updated
