"""Exception types shared across the toolkit.

Every error class carries a short machine-readable ``code`` that the
submission validator mirrors into its issue list, so the same defect is
named identically whether it is raised or merely reported.
"""

from __future__ import annotations


class ToolkitError(Exception):
    """Base class for all errors raised by this package."""

    code = "ERROR"


class DuplicateSegment(ToolkitError):
    """A segment id occurs more than once where ids must be unique."""

    code = "DUPLICATE_SEGMENT"

    def __init__(self, segment_id: str, line_no: int | None = None):
        super().__init__(f"duplicate segment id {segment_id!r}")
        self.segment_id = segment_id
        self.line_no = line_no


class UnknownLanguage(ToolkitError):
    """A language code is not part of the declared language set."""

    code = "UNKNOWN_LANGUAGE"

    def __init__(self, language: str, line_no: int | None = None):
        super().__init__(f"unknown language code {language!r}")
        self.language = language
        self.line_no = line_no


class UnknownSegment(ToolkitError):
    """A submission row names a segment that the key does not contain."""

    code = "UNKNOWN_SEGMENT"

    def __init__(self, segment_id: str, line_no: int | None = None):
        super().__init__(f"segment {segment_id!r} is not in the key")
        self.segment_id = segment_id
        self.line_no = line_no


class MissingSegment(ToolkitError):
    """A key segment has no row in the submission."""

    code = "MISSING_SEGMENT"

    def __init__(self, segment_id: str):
        super().__init__(f"segment {segment_id!r} is missing from the submission")
        self.segment_id = segment_id
        self.line_no = None


class NonFiniteScore(ToolkitError):
    """A score cell holds NaN or an infinity."""

    code = "NON_FINITE_SCORE"

    def __init__(self, segment_id: str, language: str, line_no: int | None = None):
        super().__init__(f"non-finite score for segment {segment_id!r}, language {language!r}")
        self.segment_id = segment_id
        self.language = language
        self.line_no = line_no


class HeaderMismatch(ToolkitError):
    """A file header does not match the expected column layout."""

    code = "HEADER_MISMATCH"

    def __init__(self, message: str):
        super().__init__(message)
        self.line_no = 1


class Malformed(ToolkitError):
    """A line cannot be parsed under the strict file grammar."""

    code = "MALFORMED"

    def __init__(self, line_no: int | None, reason: str):
        where = f"line {line_no}: " if line_no is not None else ""
        super().__init__(f"{where}{reason}")
        self.line_no = line_no
        self.reason = reason


class MissingDuration(ToolkitError):
    """A duration partition needs a duration the key does not have."""

    code = "MISSING_DURATION"

    def __init__(self, segment_id: str):
        super().__init__(f"segment {segment_id!r} has no known duration")
        self.segment_id = segment_id


class EmptyClass(ToolkitError):
    """A language has no trials, so its rates are undefined."""

    code = "EMPTY_CLASS"

    def __init__(self, language: str):
        super().__init__(f"language {language!r} has no trials")
        self.language = language


class LanguageMismatch(ToolkitError):
    """Scores and key disagree about the language set."""

    code = "LANGUAGE_MISMATCH"
