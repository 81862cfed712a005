"""Corpus records and source preprocessing.

A corpus is newline-delimited JSON, one sample per line:

    {"id": "s1", "code": "x = 1\n", "score": 0.5, "aux": {"lang": "py"}}

`id` and `code` are required; `score` is an optional comprehension score
in [0, 1]; `aux` is an optional string-to-string mapping. Preprocessing
normalizes a sample's code into the exact text that entropy providers
and every metric operate on, so its rules are frozen:

  * CRLF/CR line endings become LF; tabs become a configurable number of
    spaces (default 4), everywhere, string literals included.
  * Comments are stripped. Docstrings are stripped: any run of
    consecutive bare string-literal statements opening a module, or
    opening the body of a block-form def/class, is removed.
  * Lines left whitespace-only by stripping are deleted; pre-existing
    blank runs collapse to a single blank line; leading and trailing
    blank lines are dropped; trailing whitespace is trimmed per line.
  * Non-empty output always ends with exactly one newline.

The transform is idempotent: preprocessing its own output is a no-op.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

from .errors import DuplicateId, EmptyInput, MalformedRecord, MissingFile
from .lexing import STRING, LexResult, scan

__all__ = [
    "CorpusSample",
    "PreprocessedCode",
    "load_corpus",
    "preprocess",
]


@dataclass(frozen=True)
class CorpusSample:
    id: str
    code: str
    score: float | None = None
    aux: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class PreprocessedCode:
    """Normalized source text plus the line facts metrics need."""

    text: str
    line_index: tuple[tuple[int, int], ...]  # (byte offset, indent) per non-blank line
    comment_ratio: float                     # comment-only lines / non-blank raw lines


def load_corpus(path: str | os.PathLike[str]) -> list[CorpusSample]:
    """Read a newline-delimited JSON corpus.

    Blank lines are skipped. Raises MissingFile, MalformedRecord (with
    the offending 1-based line number), or DuplicateId.
    """
    if not os.path.isfile(path):
        raise MissingFile(f"corpus file not found: {path}")
    samples: list[CorpusSample] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fp:
        for line_no, line in enumerate(fp, 1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecord(line_no, f"invalid JSON: {exc}") from exc
            samples.append(_validate_record(raw, line_no, seen))
    return samples


def _validate_record(raw: object, line_no: int, seen: set[str]) -> CorpusSample:
    if not isinstance(raw, dict):
        raise MalformedRecord(line_no, "record is not a JSON object")
    sample_id = raw.get("id")
    if not isinstance(sample_id, str) or not sample_id:
        raise MalformedRecord(line_no, "missing or empty 'id'")
    if sample_id in seen:
        raise DuplicateId(sample_id)
    code = raw.get("code")
    if not isinstance(code, str):
        raise MalformedRecord(line_no, "missing or non-string 'code'")
    score = raw.get("score")
    if score is not None:
        if isinstance(score, bool) or not isinstance(score, (int, float)) or not math.isfinite(score):
            raise MalformedRecord(line_no, "'score' must be a finite number")
        if not 0.0 <= score <= 1.0:
            raise MalformedRecord(line_no, f"'score' out of range [0, 1]: {score}")
        score = float(score)
    aux_raw = raw.get("aux", {})
    if not isinstance(aux_raw, dict) or any(
        not isinstance(k, str) or not isinstance(v, str) for k, v in aux_raw.items()
    ):
        raise MalformedRecord(line_no, "'aux' must map strings to strings")
    seen.add(sample_id)
    return CorpusSample(id=sample_id, code=code, score=score, aux=dict(aux_raw))


def preprocess(code: str, tab_width: int = 4) -> PreprocessedCode:
    """Normalize code per the module rules. Raises EmptyInput on blank code."""
    if not code.strip():
        raise EmptyInput("code is empty after whitespace trim")
    raw = code.replace("\r\n", "\n").replace("\r", "\n").replace("\t", " " * tab_width)
    lex = scan(raw)

    comment_ratio = _comment_ratio(lex)
    removed = _removed_intervals(lex)
    text = _rebuild(lex, removed)

    line_index: list[tuple[int, int]] = []
    offset = 0
    for line in text.split("\n"):
        if line.strip():
            line_index.append((offset, len(line) - len(line.lstrip(" "))))
        offset += len(line.encode("utf-8")) + 1
    return PreprocessedCode(text=text, line_index=tuple(line_index), comment_ratio=comment_ratio)


def _comment_ratio(lex: LexResult) -> float:
    # A line is comment-only when a comment starts on it and no code
    # token occupies it (multi-line strings occupy every line they span).
    occupied: set[int] = set()
    for tok in lex.tokens:
        occupied.update(range(tok.line, tok.line + tok.text.count("\n") + 1))
    comment_lines = {tok.line for tok in lex.comments} - occupied
    non_blank = sum(1 for line in lex.lines if not line.blank)
    if non_blank == 0:
        return 0.0
    return len(comment_lines) / non_blank


def _removed_intervals(lex: LexResult) -> list[tuple[int, int]]:
    """Byte intervals of comments and docstring statements."""
    intervals = [(tok.start, tok.end) for tok in lex.comments]

    def is_bare_string(logical_idx: int) -> bool:
        ll = lex.logical_lines[logical_idx]
        return len(ll.tokens) == 1 and lex.tokens[ll.tokens[0]].kind == STRING

    doc_logicals: set[int] = set()
    idx = 0
    while idx < len(lex.logical_lines) and is_bare_string(idx):
        doc_logicals.add(idx)
        idx += 1
    for idx, ll in enumerate(lex.logical_lines):
        if not (ll.opens_block and ll.starts_definition(lex.tokens)):
            continue
        nxt = idx + 1
        while (
            nxt < len(lex.logical_lines)
            and lex.logical_lines[nxt].indent > ll.indent
            and is_bare_string(nxt)
        ):
            doc_logicals.add(nxt)
            nxt += 1

    for logical_idx in doc_logicals:
        tok = lex.tokens[lex.logical_lines[logical_idx].tokens[0]]
        intervals.append((tok.start, tok.end))
    intervals.sort()
    return intervals


def _rebuild(lex: LexResult, removed: list[tuple[int, int]]) -> str:
    data = lex.data
    out_lines: list[str] = []
    pending_blank = False
    for line in lex.lines:
        line_end = lex.lines[line.index + 1].start - 1 if line.index + 1 < len(lex.lines) else len(data)
        kept = bytearray()
        pos = line.start
        for start, end in removed:
            if end <= line.start or start >= line_end:
                continue
            kept += data[pos : max(pos, start)]
            pos = max(pos, min(end, line_end))
        kept += data[pos:line_end]
        content = kept.decode("utf-8").rstrip()
        if content:
            if pending_blank and out_lines:
                out_lines.append("")
            pending_blank = False
            out_lines.append(content)
        elif line.blank:
            pending_blank = True
        # Lines emptied by removal are dropped entirely.
    if not out_lines:
        return ""
    return "\n".join(out_lines) + "\n"
