"""Exception hierarchy. CLI exit codes: validation 1, runtime 2, staleness 3."""


class LexsynError(Exception):
    """Base class for all package errors."""

    exit_code = 2


class ValidationError(LexsynError):
    """Bad input, config, or schema; raised before any computation runs."""

    exit_code = 1


class SchemaError(ValidationError):
    """Record or corpus violates the documented on-disk schema."""


class CorpusParseError(ValidationError):
    """Malformed corpus file; message names the offending line."""


class AlignmentError(ValidationError):
    """Tree leaves disagree with the token sequence."""


class TreeParseError(ValidationError):
    """Malformed bracketed tree; message carries the character offset."""

    def __init__(self, message: str, offset: int | None = None):
        super().__init__(message)
        self.offset = offset


class PatternError(ValidationError):
    """Malformed tree-pattern expression or pattern file."""


class ConfigurationError(ValidationError):
    """Inconsistent analysis configuration (e.g. more folds than subjects)."""


class TaggingRequiredError(ValidationError):
    """An operation needs POS tags and the document has none."""


class TreesRequiredError(ValidationError):
    """An operation needs parse trees and the document has none."""


class ExternalToolError(LexsynError):
    """External parser command failed; captured output is attached."""

    def __init__(self, message: str, output: str = ""):
        super().__init__(message)
        self.output = output


class DegenerateFitError(LexsynError):
    """Regression design matrix is rank deficient; no ratio is emitted."""


class PipelineError(LexsynError):
    """A pipeline stage failed; message names the stage."""


class StalenessError(LexsynError):
    """Upstream artifact hash disagrees with the run manifest."""

    exit_code = 3
