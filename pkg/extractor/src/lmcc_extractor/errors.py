"""Exception hierarchy. Everything raised on purpose derives from ExtractorError."""


class ExtractorError(Exception):
    """Base class for extraction failures."""


class InvalidJob(ExtractorError):
    """Job fields violate their constraints."""


class MalformedCorpus(ExtractorError):
    """Corpus file is missing, unparseable, or breaks the record contract."""


class ModelLoadError(ExtractorError):
    """Model identifier cannot be resolved to a usable backend."""


class TokenizationMismatch(ExtractorError):
    """Token spans fail to cover the preprocessed text."""
