"""fidaudit: audit the representation fidelity of algorithmic decision systems.

Compare a fixed feature-based input representation of a person against a
natural-language self-description: quantify additive and omissive
representation mismatches from span annotations, measure inter-annotator
agreement, and evaluate an embedding-distance baseline against the manual
counts.
"""

from .errors import FidauditError
from .corpus import (
    Corpus,
    FeatureDef,
    FeatureSchema,
    FeatureValue,
    InputRepresentation,
    SelfDescription,
    load_corpus,
    load_descriptions,
    load_representations,
    load_schema,
    sample_for_annotation,
    save_corpus,
)
from .annotation import (
    ASPECT_LABEL,
    MISMATCH_TAXONOMY,
    SPECIALIZATION_LABEL,
    AnnotationDoc,
    AnnotationStore,
    Label,
    LabelRegistry,
    MismatchKind,
    Span,
    add_span,
    classify_mismatch,
    coverage,
    mint_new_subject,
    new_subject_label,
    parse_label,
    schema_label,
)
from .fidelity import (
    ComponentCounts,
    FidelityReport,
    aggregate,
    compare_systems,
    count_components,
)
from .agreement import (
    MatchResult,
    match_relaxed,
    match_strict,
    micro_average,
)
from .baseline import (
    EmbeddingTable,
    NBow,
    distance_matrix,
    load_embeddings,
    nbow,
    preprocess_remove_shared,
    serialize_representation,
    tokenize,
    wmd,
)
from .stats import correlation_table, pearson
from .genclient import (
    GenerationJob,
    HttpChatClient,
    MockChatClient,
    build_prompt,
    make_jobs,
    run_jobs,
)

__version__ = "0.1.0"

__all__ = [
    "FidauditError",
    "Corpus",
    "FeatureDef",
    "FeatureSchema",
    "FeatureValue",
    "InputRepresentation",
    "SelfDescription",
    "load_corpus",
    "load_descriptions",
    "load_representations",
    "load_schema",
    "sample_for_annotation",
    "save_corpus",
    "ASPECT_LABEL",
    "MISMATCH_TAXONOMY",
    "SPECIALIZATION_LABEL",
    "AnnotationDoc",
    "AnnotationStore",
    "Label",
    "LabelRegistry",
    "MismatchKind",
    "Span",
    "add_span",
    "classify_mismatch",
    "coverage",
    "mint_new_subject",
    "new_subject_label",
    "parse_label",
    "schema_label",
    "ComponentCounts",
    "FidelityReport",
    "aggregate",
    "compare_systems",
    "count_components",
    "MatchResult",
    "match_relaxed",
    "match_strict",
    "micro_average",
    "EmbeddingTable",
    "NBow",
    "distance_matrix",
    "load_embeddings",
    "nbow",
    "preprocess_remove_shared",
    "serialize_representation",
    "tokenize",
    "wmd",
    "correlation_table",
    "pearson",
    "GenerationJob",
    "HttpChatClient",
    "MockChatClient",
    "build_prompt",
    "make_jobs",
    "run_jobs",
]
