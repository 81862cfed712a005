"""Offline token-entropy extraction for code corpora.

Runs a causal language model (or a deterministic stub) over each corpus
sample and writes the entropy cache format the analyzer's precomputed
provider reads: one JSON record per line, `{"id": str, "tokens":
[[byte_start, byte_end, entropy_nats], ...]}`. Code is preprocessed with
the same comment- and docstring-stripping rules the analyzer applies, so
spans address the exact text the analyzer sees.
"""

from .errors import (
    ExtractorError,
    InvalidJob,
    MalformedCorpus,
    ModelLoadError,
    TokenizationMismatch,
)
from .extract import ExtractionJob, ExtractionSummary, extract
from .model import StubModel, load_model, softmax_entropy
from .preprocessing import preprocess

__all__ = [
    "ExtractionJob",
    "ExtractionSummary",
    "ExtractorError",
    "InvalidJob",
    "MalformedCorpus",
    "ModelLoadError",
    "StubModel",
    "TokenizationMismatch",
    "extract",
    "load_model",
    "preprocess",
    "softmax_entropy",
]
