"""Corpus-to-cache extraction pass.

Reads a JSONL corpus of ``{"id", "code"}`` records, normalizes each sample
with the shared preprocessing rules, runs the model once per sample, and
writes one cache line per sample:

    {"id": "...", "tokens": [[byte_start, byte_end, entropy_nats], ...]}

Spans address the preprocessed text's UTF-8 bytes. Samples with nothing
left after preprocessing get an empty token list. Output is fully
deterministic for a given corpus and model identifier.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidJob, MalformedCorpus, TokenizationMismatch
from .model import Model, load_model
from .preprocessing import preprocess

__all__ = ["ExtractionJob", "ExtractionSummary", "extract"]

_GAP_OK = frozenset(b" \t\n\r\x0b\x0c")


@dataclass
class ExtractionJob:
    """One extraction run: which model, over which corpus, written where."""

    model: str
    corpus: str
    output: str
    device: str | None = None
    batch_size: int = 8

    def __post_init__(self):
        if self.batch_size < 1:
            raise InvalidJob(f"batch_size must be at least 1, got {self.batch_size}")


@dataclass
class ExtractionSummary:
    samples: int
    tokens: int
    empty: int


def _read_corpus(path: str) -> list[tuple[str, str]]:
    p = Path(path)
    if not p.exists():
        raise MalformedCorpus(f"corpus file not found: {path}")
    rows: list[tuple[str, str]] = []
    seen: set[str] = set()
    for lineno, line in enumerate(p.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedCorpus(f"{path}:{lineno}: invalid JSON: {exc}")
        if not isinstance(rec, dict):
            raise MalformedCorpus(f"{path}:{lineno}: record must be an object")
        sample_id = rec.get("id")
        code = rec.get("code")
        if not isinstance(sample_id, str) or not sample_id:
            raise MalformedCorpus(f"{path}:{lineno}: 'id' must be a non-empty string")
        if not isinstance(code, str):
            raise MalformedCorpus(f"{path}:{lineno}: 'code' must be a string")
        if sample_id in seen:
            raise MalformedCorpus(f"{path}:{lineno}: duplicate id {sample_id!r}")
        seen.add(sample_id)
        rows.append((sample_id, code))
    return rows


def _check_coverage(sample_id: str, data: bytes, spans: list[tuple[int, int]]) -> None:
    """Spans must be sorted, in range, and leave only whitespace uncovered."""
    prev = 0
    for start, end in spans:
        if not (0 <= start < end <= len(data)):
            raise TokenizationMismatch(f"{sample_id}: span ({start}, {end}) out of range")
        if start < prev:
            raise TokenizationMismatch(f"{sample_id}: spans overlap or regress at byte {start}")
        gap = data[prev:start]
        if any(b not in _GAP_OK for b in gap):
            raise TokenizationMismatch(f"{sample_id}: uncovered non-whitespace bytes before {start}")
        prev = end
    tail = data[prev:]
    if any(b not in _GAP_OK for b in tail):
        raise TokenizationMismatch(f"{sample_id}: uncovered non-whitespace bytes after {prev}")


def _records(job: ExtractionJob, model: Model):
    rows = _read_corpus(job.corpus)
    for lo in range(0, len(rows), job.batch_size):
        batch = rows[lo : lo + job.batch_size]
        texts = [preprocess(code) for _, code in batch]
        batch_entropies = model.entropies(texts)
        for (sample_id, _), text, ent in zip(batch, texts, batch_entropies):
            spans = model.token_spans(text)
            if len(spans) != len(ent):
                raise TokenizationMismatch(
                    f"{sample_id}: {len(spans)} spans but {len(ent)} entropies"
                )
            _check_coverage(sample_id, text.encode("utf-8"), spans)
            tokens = [
                [start, end, float(h)] for (start, end), h in zip(spans, ent)
            ]
            for _, _, h in tokens:
                if not np.isfinite(h) or h < 0:
                    raise TokenizationMismatch(f"{sample_id}: entropy {h} out of range")
            yield {"id": sample_id, "tokens": tokens}


def extract(job: ExtractionJob) -> ExtractionSummary:
    """Run the job and return counts. Raises ExtractorError subclasses."""
    model = load_model(job.model, job.device)
    samples = tokens = empty = 0
    sink = sys.stdout if job.output == "-" else open(job.output, "w", encoding="utf-8")
    try:
        for record in _records(job, model):
            sink.write(json.dumps(record, separators=(",", ":")) + "\n")
            samples += 1
            tokens += len(record["tokens"])
            empty += not record["tokens"]
    finally:
        if sink is not sys.stdout:
            sink.close()
    return ExtractionSummary(samples=samples, tokens=tokens, empty=empty)
