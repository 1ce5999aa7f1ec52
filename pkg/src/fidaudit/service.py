"""Local annotation service.

A small JSON API over one corpus directory and one annotations directory:
list documents, fetch a document with its linked representation, fetch the
label registry, mint new-subject labels, and read/write annotations with
version-based optimistic concurrency. Annotation payloads are exactly the
annotation file format, so the service and the files stay interchangeable.

Error responses always carry ``{"error": {code, message, detail}}``:
version_conflict and name_collision map to 409, not_found to 404, and all
other domain errors to 400.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import Body, FastAPI
from fastapi.middleware.cors import CORSMiddleware
from fastapi.requests import Request
from fastapi.responses import JSONResponse

from .annotation import (
    AnnotationStore,
    annotation_from_payload,
    annotation_to_payload,
    check_annotation,
    coverage,
    normalize_subject_name,
)
from .corpus import Corpus, load_corpus
from .errors import FidauditError, NotFound, ValidationError
from .fidelity import COMPONENT_FIELDS, count_components

_STATUS_BY_CODE = {
    "version_conflict": 409,
    "name_collision": 409,
    "not_found": 404,
}


def create_app(corpus: Corpus, annotations_dir: str | Path) -> FastAPI:
    """Build the service over an already-loaded corpus."""
    store = AnnotationStore(annotations_dir, corpus.schema)
    app = FastAPI(title="fidaudit annotation service", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(FidauditError)
    async def _domain_error(_request: Request, exc: FidauditError) -> JSONResponse:
        return JSONResponse(
            status_code=_STATUS_BY_CODE.get(exc.code, 400),
            content={
                "error": {"code": exc.code, "message": exc.message, "detail": exc.detail}
            },
        )

    def _description(doc_id: str):
        try:
            return corpus.by_doc[doc_id]
        except KeyError:
            raise NotFound(f"unknown document {doc_id!r}") from None

    @app.get("/api/documents")
    def list_documents() -> dict:
        return {
            "documents": [
                {
                    "doc_id": d.doc_id,
                    "profile_id": d.profile_id,
                    "generator_id": d.generator_id,
                    "variant_index": d.variant_index,
                    "char_count": d.char_count,
                }
                for d in corpus.descriptions
            ]
        }

    @app.get("/api/documents/{doc_id}")
    def get_document(doc_id: str) -> dict:
        d = _description(doc_id)
        x = corpus.by_profile.get(d.profile_id) if d.profile_id else None
        representation = None
        if x is not None:
            representation = [
                {
                    "key": f.key,
                    "display_name": f.display_name,
                    "raw": x.values[f.key].raw,
                    "decoded": x.values[f.key].decoded,
                }
                for f in corpus.schema.features
            ]
        return {
            "doc_id": d.doc_id,
            "profile_id": d.profile_id,
            "generator_id": d.generator_id,
            "variant_index": d.variant_index,
            "text": d.text,
            "char_count": d.char_count,
            "representation": representation,
        }

    @app.get("/api/labels")
    def get_labels() -> dict:
        registry = store.load_registry()
        return {
            "schema_name": corpus.schema.name,
            "schema_labels": [
                {
                    "rendered": f"{corpus.schema.name}_{f.key}",
                    "key": f.key,
                    "display_name": f.display_name,
                }
                for f in corpus.schema.features
            ],
            "new_subjects": [
                {
                    "name": e.name,
                    "rendered": f"new_{e.name}",
                    "created_by": e.created_by,
                    "created_at": e.created_at,
                }
                for e in registry.new_subjects
            ],
            "other": ["aspect", "specialization"],
        }

    @app.post("/api/labels/new")
    def mint_label(payload: dict = Body(...)) -> dict:
        name = payload.get("name")
        annotator_id = payload.get("annotator_id")
        if not isinstance(name, str) or not name:
            raise ValidationError("payload needs a non-empty 'name'")
        if not isinstance(annotator_id, str) or not annotator_id:
            raise ValidationError("payload needs a non-empty 'annotator_id'")
        registry = store.mint(name, annotator_id)
        # mint() is idempotent, so the entry may predate this request.
        normalized = normalize_subject_name(name)
        entry = next(e for e in registry.new_subjects if e.name == normalized)
        return {
            "name": entry.name,
            "rendered": f"new_{entry.name}",
            "created_by": entry.created_by,
            "created_at": entry.created_at,
        }

    @app.get("/api/annotations/{doc_id}/{annotator_id}")
    def get_annotation(doc_id: str, annotator_id: str) -> dict:
        _description(doc_id)
        doc = store.load(doc_id, annotator_id)
        return annotation_to_payload(doc, corpus.schema)

    @app.put("/api/annotations/{doc_id}/{annotator_id}")
    def put_annotation(doc_id: str, annotator_id: str, payload: dict = Body(...)) -> dict:
        desc = _description(doc_id)
        doc = annotation_from_payload(payload, corpus.schema)
        if doc.doc_id != doc_id or doc.annotator_id != annotator_id:
            raise ValidationError("payload ids do not match the request path")
        registry = store.load_registry()
        check_annotation(doc, desc.char_count, corpus.schema, registry)
        saved = store.save(doc)
        return annotation_to_payload(saved, corpus.schema)

    @app.get("/api/annotations/{doc_id}/{annotator_id}/counts")
    def get_counts(doc_id: str, annotator_id: str) -> dict:
        desc = _description(doc_id)
        doc = store.load(doc_id, annotator_id)
        counts = count_components(doc, corpus.schema)
        out = {name: getattr(counts, name) for name in COMPONENT_FIELDS}
        out["coverage"] = coverage(doc, desc.char_count)
        return out

    return app


def create_app_from_dirs(corpus_dir: str | Path, annotations_dir: str | Path) -> FastAPI:
    corpus = load_corpus(corpus_dir)
    problems = corpus.problems()
    if problems:
        raise ValidationError(
            "corpus does not validate", detail={"problems": problems[:20]}
        )
    return create_app(corpus, annotations_dir)


def serve(
    corpus_dir: str | Path,
    annotations_dir: str | Path,
    host: str = "127.0.0.1",
    port: int = 8787,
) -> None:
    """Run the service until interrupted."""
    import uvicorn

    app = create_app_from_dirs(corpus_dir, annotations_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")
