"""Corpus loading, validation, and indexing.

A corpus couples three things: a feature schema, one fixed feature record
(input representation) per person, and any number of free-text
self-descriptions about those people. This module defines the in-memory
types, the canonical on-disk formats, and a deterministic sampler used to
pick documents for annotation.

Canonical formats (all UTF-8):

* schema: a single JSON object, 2-space indent, written by
  :func:`schema_to_text`;
* representations: JSON lines, one record per line, written by
  :func:`representations_to_text`;
* descriptions: JSON lines, one record per line, written by
  :func:`descriptions_to_text`.

``load`` followed by the matching ``*_to_text`` reproduces a canonical file
byte for byte. All text offsets and lengths in this package count Unicode
code points.
"""

from __future__ import annotations

import json
import random
import re
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import (
    DuplicateId,
    InsufficientData,
    ParseError,
    SchemaError,
    UnknownCode,
)

CATEGORICAL = "categorical"
NUMERIC = "numeric"

SCHEMA_FILENAME = "schema.json"
REPRESENTATIONS_FILENAME = "representations.jsonl"
DESCRIPTIONS_FILENAME = "descriptions.jsonl"

# doc_ids become path components of annotation files; keep them safe.
ID_PATTERN = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]*$")


@dataclass(frozen=True)
class FeatureDef:
    """One feature of the fixed input representation."""

    key: str
    display_name: str
    kind: str
    value_map: Mapping[str, str] | None = None
    unit: str | None = None

    def decode(self, raw: str) -> str:
        """Human-readable text for a raw stored code."""
        if self.kind == CATEGORICAL:
            assert self.value_map is not None
            return self.value_map[raw]
        if self.unit:
            return f"{raw} {self.unit}"
        return raw


class FeatureSchema:
    """Ordered, validated collection of feature definitions.

    The schema ``name`` prefixes rendered feature labels (``"GCD_age"`` for
    a schema named ``"GCD"``), so it must be non-empty.
    """

    def __init__(self, name: str, features: Sequence[FeatureDef]):
        if not name:
            raise SchemaError("schema name must be non-empty")
        seen: set[str] = set()
        for f in features:
            if not f.key:
                raise SchemaError("feature key must be non-empty")
            if f.key in seen:
                raise SchemaError(f"duplicate feature key {f.key!r}")
            seen.add(f.key)
            if f.kind not in (CATEGORICAL, NUMERIC):
                raise SchemaError(f"feature {f.key!r}: unknown kind {f.kind!r}")
            if f.kind == CATEGORICAL and not f.value_map:
                raise SchemaError(f"categorical feature {f.key!r} has no value_map")
            if f.kind == NUMERIC and f.value_map is not None:
                raise SchemaError(f"numeric feature {f.key!r} must not have a value_map")
        self.name = name
        self.features: tuple[FeatureDef, ...] = tuple(features)
        self._by_key = {f.key: f for f in self.features}

    def __len__(self) -> int:
        return len(self.features)

    def __iter__(self):
        return iter(self.features)

    def __contains__(self, key: str) -> bool:
        return key in self._by_key

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FeatureSchema)
            and self.name == other.name
            and self.features == other.features
        )

    def keys(self) -> tuple[str, ...]:
        return tuple(f.key for f in self.features)

    def feature(self, key: str) -> FeatureDef:
        try:
            return self._by_key[key]
        except KeyError:
            raise SchemaError(f"unknown feature key {key!r}") from None


@dataclass(frozen=True)
class FeatureValue:
    """One feature's stored code and its decoded display text."""

    raw: str
    decoded: str


@dataclass(frozen=True)
class InputRepresentation:
    """A person's fixed feature record under some schema."""

    profile_id: str
    values: Mapping[str, FeatureValue]


@dataclass(frozen=True)
class SelfDescription:
    """A natural-language text about one person.

    ``profile_id`` is ``None`` for "free" letters that were produced from
    feature names alone rather than a concrete record.
    """

    doc_id: str
    generator_id: str
    variant_index: int
    text: str
    profile_id: str | None = None

    def __post_init__(self):
        if not self.text:
            raise ValueError("self-description text must be non-empty")
        if self.variant_index < 1:
            raise ValueError("variant_index is 1-based")

    @property
    def char_count(self) -> int:
        """Length of ``text`` in Unicode code points."""
        return len(self.text)


class Corpus:
    """Immutable bundle of schema, representations, and descriptions.

    Indices are built once at construction; afterwards the corpus is safe
    for concurrent read access.
    """

    def __init__(
        self,
        schema: FeatureSchema,
        representations: Iterable[InputRepresentation],
        descriptions: Iterable[SelfDescription],
    ):
        self.schema = schema
        self.representations: tuple[InputRepresentation, ...] = tuple(representations)
        self.descriptions: tuple[SelfDescription, ...] = tuple(descriptions)

        self.by_profile: dict[str, InputRepresentation] = {}
        for x in self.representations:
            if x.profile_id in self.by_profile:
                raise DuplicateId(f"duplicate profile_id {x.profile_id!r}")
            self.by_profile[x.profile_id] = x

        self.by_doc: dict[str, SelfDescription] = {}
        self.by_profile_generator: dict[tuple[str, str], list[SelfDescription]] = {}
        for d in self.descriptions:
            if d.doc_id in self.by_doc:
                raise DuplicateId(f"duplicate doc_id {d.doc_id!r}")
            self.by_doc[d.doc_id] = d
            if d.profile_id is not None:
                key = (d.profile_id, d.generator_id)
                self.by_profile_generator.setdefault(key, []).append(d)

    def description(self, doc_id: str) -> SelfDescription:
        try:
            return self.by_doc[doc_id]
        except KeyError:
            raise ParseError(f"unknown doc_id {doc_id!r}") from None

    def representation_for(self, doc_id: str) -> InputRepresentation | None:
        """The representation linked to a description, if any."""
        desc = self.description(doc_id)
        if desc.profile_id is None:
            return None
        return self.by_profile.get(desc.profile_id)

    def problems(self) -> list[str]:
        """Invariant violations, as human-readable strings (empty = valid)."""
        out = []
        for x in self.representations:
            out.extend(_representation_problems(x, self.schema))
        for d in self.descriptions:
            if d.profile_id is not None and d.profile_id not in self.by_profile:
                out.append(f"description {d.doc_id!r}: unresolvable profile_id {d.profile_id!r}")
        return out


def _representation_problems(x: InputRepresentation, schema: FeatureSchema) -> list[str]:
    out = []
    expected = set(schema.keys())
    actual = set(x.values.keys())
    for key in sorted(expected - actual):
        out.append(f"representation {x.profile_id!r}: missing value for {key!r}")
    for key in sorted(actual - expected):
        out.append(f"representation {x.profile_id!r}: unexpected key {key!r}")
    for f in schema.features:
        v = x.values.get(f.key)
        if v is None:
            continue
        if f.kind == CATEGORICAL:
            if v.raw not in f.value_map:  # type: ignore[operator]
                out.append(
                    f"representation {x.profile_id!r}: unknown code {v.raw!r} for {f.key!r}"
                )
            elif v.decoded != f.value_map[v.raw]:  # type: ignore[index]
                out.append(
                    f"representation {x.profile_id!r}: decoded text for {f.key!r} "
                    f"does not match the value map"
                )
    return out


# -- schema file -------------------------------------------------------------


def load_schema(path: str | Path) -> FeatureSchema:
    """Load and validate a schema file.

    Raises:
        ParseError: the file is not valid JSON or misses required fields.
        SchemaError: the content violates schema invariants.
    """
    text = Path(path).read_text(encoding="utf-8")
    return parse_schema(text)


def parse_schema(text: str) -> FeatureSchema:
    if not text.strip():
        raise ParseError("empty schema file")
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"schema is not valid JSON: {e}") from e
    if not isinstance(payload, dict):
        raise ParseError("schema file must contain a JSON object")
    name = payload.get("name")
    raw_features = payload.get("features")
    if not isinstance(name, str) or not isinstance(raw_features, list):
        raise ParseError("schema file needs string 'name' and list 'features'")
    features = []
    for i, item in enumerate(raw_features):
        if not isinstance(item, dict):
            raise ParseError(f"feature #{i + 1} is not an object")
        try:
            key = item["key"]
            display_name = item["display_name"]
            kind = item["kind"]
        except KeyError as e:
            raise ParseError(f"feature #{i + 1}: missing field {e}") from None
        value_map = item.get("value_map")
        if value_map is not None and not isinstance(value_map, dict):
            raise ParseError(f"feature #{i + 1}: value_map must be an object")
        features.append(
            FeatureDef(
                key=key,
                display_name=display_name,
                kind=kind,
                value_map=dict(value_map) if value_map is not None else None,
                unit=item.get("unit"),
            )
        )
    return FeatureSchema(name, features)


def schema_to_text(schema: FeatureSchema) -> str:
    """Canonical schema serialization (stable order, 2-space indent)."""
    features = []
    for f in schema.features:
        item: dict = {"key": f.key, "display_name": f.display_name, "kind": f.kind}
        if f.value_map is not None:
            item["value_map"] = dict(f.value_map)
        if f.unit is not None:
            item["unit"] = f.unit
        features.append(item)
    payload = {"name": schema.name, "features": features}
    return json.dumps(payload, ensure_ascii=False, indent=2) + "\n"


# -- representations ---------------------------------------------------------


def load_representations(
    path: str | Path, schema: FeatureSchema
) -> list[InputRepresentation]:
    """Load representations from raw rows or the record format.

    Raw rows are whitespace-separated code columns, one person per line,
    with one trailing outcome column that is ignored; profile ids are
    assigned positionally (``p0001``, ``p0002``, ...). The record format is
    JSON lines with explicit ids; it is detected by a leading ``{``.
    """
    text = Path(path).read_text(encoding="utf-8")
    stripped = text.strip()
    if not stripped:
        return []
    if stripped[0] == "{":
        return _parse_representation_records(text, schema)
    return _parse_raw_rows(text, schema)


def _parse_raw_rows(text: str, schema: FeatureSchema) -> list[InputRepresentation]:
    out = []
    row = 0
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        row += 1
        cols = line.split()
        if len(cols) != len(schema) + 1:
            raise ParseError(
                f"line {lineno}: expected {len(schema) + 1} columns "
                f"({len(schema)} features + outcome), got {len(cols)}"
            )
        values = {}
        for f, raw in zip(schema.features, cols):
            if f.kind == CATEGORICAL:
                if raw not in f.value_map:  # type: ignore[operator]
                    raise UnknownCode(
                        f"line {lineno}: unknown code {raw!r} for feature {f.key!r}",
                        detail={"row": row, "key": f.key, "raw": raw},
                    )
            else:
                try:
                    float(raw)
                except ValueError:
                    raise ParseError(
                        f"line {lineno}: non-numeric value {raw!r} for feature {f.key!r}"
                    ) from None
            values[f.key] = FeatureValue(raw=raw, decoded=f.decode(raw))
        out.append(InputRepresentation(profile_id=f"p{row:04d}", values=values))
    return out


def _parse_representation_records(
    text: str, schema: FeatureSchema
) -> list[InputRepresentation]:
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as e:
            raise ParseError(f"line {lineno}: invalid JSON: {e}") from e
        if not isinstance(rec, dict):
            raise ParseError(f"line {lineno}: record must be an object")
        profile_id = rec.get("profile_id")
        raw_values = rec.get("values")
        if not isinstance(profile_id, str) or not profile_id:
            raise ParseError(f"line {lineno}: missing or empty profile_id")
        if not isinstance(raw_values, dict):
            raise ParseError(f"line {lineno}: missing values object")
        expected = set(schema.keys())
        actual = set(raw_values)
        if actual != expected:
            missing = sorted(expected - actual)
            extra = sorted(actual - expected)
            raise ParseError(
                f"line {lineno}: value keys do not match the schema "
                f"(missing {missing}, unexpected {extra})"
            )
        values = {}
        for f in schema.features:
            entry = raw_values[f.key]
            if not isinstance(entry, dict) or "raw" not in entry:
                raise ParseError(f"line {lineno}: value for {f.key!r} needs a 'raw' field")
            raw = str(entry["raw"])
            if f.kind == CATEGORICAL and raw not in f.value_map:  # type: ignore[operator]
                raise UnknownCode(
                    f"line {lineno}: unknown code {raw!r} for feature {f.key!r}",
                    detail={"row": lineno, "key": f.key, "raw": raw},
                )
            decoded = entry.get("decoded")
            if decoded is None:
                decoded = f.decode(raw)
            elif f.kind == CATEGORICAL and decoded != f.value_map[raw]:  # type: ignore[index]
                raise ParseError(
                    f"line {lineno}: decoded text for {f.key!r} does not match the value map"
                )
            values[f.key] = FeatureValue(raw=raw, decoded=decoded)
        out.append(InputRepresentation(profile_id=profile_id, values=values))
    return out


def representation_to_record(x: InputRepresentation, schema: FeatureSchema) -> dict:
    return {
        "profile_id": x.profile_id,
        "values": {
            f.key: {"raw": x.values[f.key].raw, "decoded": x.values[f.key].decoded}
            for f in schema.features
        },
    }


def representations_to_text(
    xs: Iterable[InputRepresentation], schema: FeatureSchema
) -> str:
    lines = [
        json.dumps(representation_to_record(x, schema), ensure_ascii=False) for x in xs
    ]
    return "".join(line + "\n" for line in lines)


# -- descriptions ------------------------------------------------------------


def load_descriptions(path: str | Path) -> list[SelfDescription]:
    """Load self-descriptions from a JSON-lines file.

    Raises:
        ParseError: malformed line or record.
        DuplicateId: two records share a doc_id.
    """
    text = Path(path).read_text(encoding="utf-8")
    out = []
    seen: set[str] = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as e:
            raise ParseError(f"line {lineno}: invalid JSON: {e}") from e
        if not isinstance(rec, dict):
            raise ParseError(f"line {lineno}: record must be an object")
        try:
            doc_id = rec["doc_id"]
            generator_id = rec["generator_id"]
            variant_index = rec["variant_index"]
            doc_text = rec["text"]
        except KeyError as e:
            raise ParseError(f"line {lineno}: missing field {e}") from None
        profile_id = rec.get("profile_id")
        if not isinstance(doc_id, str) or not ID_PATTERN.match(doc_id):
            raise ParseError(
                f"line {lineno}: doc_id must match {ID_PATTERN.pattern}"
            )
        if doc_id in seen:
            raise DuplicateId(f"line {lineno}: duplicate doc_id {doc_id!r}")
        seen.add(doc_id)
        if not isinstance(generator_id, str) or not generator_id:
            raise ParseError(f"line {lineno}: missing or empty generator_id")
        if not isinstance(variant_index, int) or variant_index < 1:
            raise ParseError(f"line {lineno}: variant_index must be a 1-based integer")
        if not isinstance(doc_text, str) or not doc_text:
            raise ParseError(f"line {lineno}: text must be a non-empty string")
        if profile_id is not None and (not isinstance(profile_id, str) or not profile_id):
            raise ParseError(f"line {lineno}: profile_id must be null or a non-empty string")
        out.append(
            SelfDescription(
                doc_id=doc_id,
                profile_id=profile_id,
                generator_id=generator_id,
                variant_index=variant_index,
                text=doc_text,
            )
        )
    return out


def description_to_record(d: SelfDescription) -> dict:
    return {
        "doc_id": d.doc_id,
        "profile_id": d.profile_id,
        "generator_id": d.generator_id,
        "variant_index": d.variant_index,
        "text": d.text,
    }


def descriptions_to_text(ds: Iterable[SelfDescription]) -> str:
    lines = [json.dumps(description_to_record(d), ensure_ascii=False) for d in ds]
    return "".join(line + "\n" for line in lines)


# -- corpus directory --------------------------------------------------------


def load_corpus(corpus_dir: str | Path) -> Corpus:
    """Load a corpus directory written by :func:`save_corpus`."""
    root = Path(corpus_dir)
    schema = load_schema(root / SCHEMA_FILENAME)
    representations = load_representations(root / REPRESENTATIONS_FILENAME, schema)
    descriptions = load_descriptions(root / DESCRIPTIONS_FILENAME)
    return Corpus(schema, representations, descriptions)


def save_corpus(corpus: Corpus, out_dir: str | Path) -> Path:
    root = Path(out_dir)
    root.mkdir(parents=True, exist_ok=True)
    (root / SCHEMA_FILENAME).write_text(schema_to_text(corpus.schema), encoding="utf-8")
    (root / REPRESENTATIONS_FILENAME).write_text(
        representations_to_text(corpus.representations, corpus.schema), encoding="utf-8"
    )
    (root / DESCRIPTIONS_FILENAME).write_text(
        descriptions_to_text(corpus.descriptions), encoding="utf-8"
    )
    return root


# -- sampling ----------------------------------------------------------------


def sample_for_annotation(corpus: Corpus, n: int, seed: int) -> list[str]:
    """Pick ``n`` doc_ids for annotation, stratified across generators.

    Deterministic for a fixed seed. Documents are drawn round-robin over
    generators (in sorted generator order, each generator's pool shuffled),
    so per-generator counts differ by at most one until a generator's pool
    is exhausted.
    """
    total = len(corpus.descriptions)
    if n < 0 or n > total:
        raise InsufficientData(f"cannot sample {n} of {total} descriptions")
    groups: dict[str, list[str]] = {}
    for d in corpus.descriptions:
        groups.setdefault(d.generator_id, []).append(d.doc_id)
    rng = random.Random(seed)
    generators = sorted(groups)
    queues = {}
    for g in generators:
        pool = list(groups[g])
        rng.shuffle(pool)
        queues[g] = deque(pool)
    out: list[str] = []
    while len(out) < n:
        for g in generators:
            if len(out) == n:
                break
            q = queues[g]
            if q:
                out.append(q.popleft())
    return out
