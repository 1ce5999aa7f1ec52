"""Exception hierarchy shared across the toolkit.

Every error carries a stable machine-readable ``code`` so the CLI and the
annotation service can report failures uniformly.
"""

from __future__ import annotations

from typing import Any


class FidauditError(Exception):
    """Base class for all toolkit errors."""

    code = "error"

    def __init__(self, message: str, detail: Any = None):
        super().__init__(message)
        self.message = message
        self.detail = detail


# -- corpus ----------------------------------------------------------------

class ParseError(FidauditError):
    code = "parse_error"


class SchemaError(FidauditError):
    code = "schema_error"


class UnknownCode(FidauditError):
    code = "unknown_code"


class DuplicateId(FidauditError):
    code = "duplicate_id"


class InsufficientData(FidauditError):
    code = "insufficient_data"


# -- annotation ------------------------------------------------------------

class OutOfBounds(FidauditError):
    code = "out_of_bounds"


class UnknownLabel(FidauditError):
    code = "unknown_label"


class EmptyLabelSet(FidauditError):
    code = "empty_label_set"


class NameCollision(FidauditError):
    code = "name_collision"


class UnknownMismatch(FidauditError):
    code = "unknown_mismatch"


# -- fidelity --------------------------------------------------------------

class SchemaMismatch(FidauditError):
    code = "schema_mismatch"


class EmptyInput(FidauditError):
    code = "empty_input"


# -- agreement -------------------------------------------------------------

class DocMismatch(FidauditError):
    code = "doc_mismatch"


class MixedModes(FidauditError):
    code = "mixed_modes"


# -- baseline --------------------------------------------------------------

class DimensionMismatch(FidauditError):
    code = "dimension_mismatch"


class EmptyAfterOov(FidauditError):
    code = "empty_after_oov"


class SolverFailure(FidauditError):
    code = "solver_failure"


# -- stats -----------------------------------------------------------------

class LengthMismatch(FidauditError):
    code = "length_mismatch"


class ZeroVariance(FidauditError):
    code = "zero_variance"


class TooFewPoints(FidauditError):
    code = "too_few_points"


class InsufficientOverlap(FidauditError):
    code = "insufficient_overlap"


# -- generation ------------------------------------------------------------

class MissingRepresentation(FidauditError):
    code = "missing_representation"


class ProviderError(FidauditError):
    code = "provider_error"


class TransientProviderError(ProviderError):
    """Retryable provider failure (timeouts, rate limits, 5xx)."""

    code = "transient_provider_error"


class BudgetExceeded(FidauditError):
    code = "budget_exceeded"


# -- service ---------------------------------------------------------------

class VersionConflict(FidauditError):
    code = "version_conflict"


class NotFound(FidauditError):
    code = "not_found"


class ValidationError(FidauditError):
    code = "validation_error"
