"""Exception types shared across the package."""

from __future__ import annotations

__all__ = [
    "LmccError",
    "MissingFile",
    "MalformedRecord",
    "DuplicateId",
    "EmptyInput",
    "ProviderUnavailable",
    "CoverageGap",
    "InvalidSpec",
    "TooFewSamples",
    "ConstantSequence",
    "LengthMismatch",
    "DegenerateControl",
    "InvalidN",
    "InvalidLength",
    "EndpointUnavailable",
    "NoCandidates",
    "HookTimeout",
    "HookCrash",
    "AnalysisError",
]


class LmccError(Exception):
    """Base class for all package-specific errors."""


class MissingFile(LmccError):
    """An input path does not exist or is not readable."""


class MalformedRecord(LmccError):
    """A serialized record failed validation; carries its 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class DuplicateId(LmccError):
    """Two records in one corpus share an id."""

    def __init__(self, sample_id: str):
        super().__init__(f"duplicate sample id {sample_id!r}")
        self.sample_id = sample_id


class EmptyInput(LmccError):
    """An operation that needs content received none."""


class ProviderUnavailable(LmccError):
    """An entropy provider could not be reached or has been closed."""


class CoverageGap(LmccError):
    """Token entropy spans violate the coverage contract for a sample."""


class InvalidSpec(LmccError):
    """A provider or generator specification is internally inconsistent."""


class TooFewSamples(LmccError):
    """Not enough samples to form the requested number of groups."""


class ConstantSequence(LmccError):
    """A correlation input has zero variance."""


class LengthMismatch(LmccError):
    """Paired sequences differ in length."""


class DegenerateControl(LmccError):
    """The control variable is (anti)perfectly correlated with an input."""


class InvalidN(LmccError):
    """A generator size parameter is out of range."""


class InvalidLength(LmccError):
    """A target token length cannot host the requested structure."""


class EndpointUnavailable(LmccError):
    """The rewrite endpoint could not be reached."""


class NoCandidates(LmccError):
    """No rewrite candidate could be extracted from any attempt."""


class HookTimeout(LmccError):
    """The equivalence hook exceeded its time budget."""


class HookCrash(LmccError):
    """The equivalence hook could not be executed at all."""


class AnalysisError(LmccError):
    """Analysis of one side of a rewrite pair failed; carries which side."""

    def __init__(self, side: str, cause: Exception):
        super().__init__(f"analysis of {side} code failed: {cause}")
        self.side = side
        self.cause = cause
