"""Hybrid segmentation: entropy spikes unioned with syntactic boundaries.

A new unit opens at token i when the token's entropy strictly exceeds
tau, or when i is a syntactic boundary: the first token of the program,
the first token of a logical line whose indent differs from the previous
logical line, of a line directly following a block-opening line (one
ending with ':' outside brackets), or of a def/class line. Both kinds of
boundary only ever open units, so raising tau never splits an existing
unit. Whitespace-only spans never begin units; a boundary landing on one
shifts to the next substantive span.

Units partition the token sequence in order, and every line a unit spans
shares one indent level (multi-line bracketed expressions count at the
indent of their first line).
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from typing import Sequence

from .corpus import PreprocessedCode
from .entropy import TokenEntropy, validate_coverage
from .errors import EmptyInput
from .lexing import LexResult, scan

__all__ = [
    "BOUNDARY_ENTROPY",
    "BOUNDARY_SYNTACTIC",
    "BOUNDARY_BOTH",
    "SemanticUnit",
    "syntactic_boundaries",
    "segment",
]

BOUNDARY_ENTROPY = "entropy"
BOUNDARY_SYNTACTIC = "syntactic"
BOUNDARY_BOTH = "both"


@dataclass(frozen=True)
class SemanticUnit:
    token_range: tuple[int, int]  # inclusive indices into the span list
    byte_range: tuple[int, int]
    indent: int
    boundary_reason: str


def _boundary_logical_lines(lex: LexResult) -> set[int]:
    out: set[int] = set()
    prev_indent: int | None = None
    prev_opens = False
    for ll in lex.logical_lines:
        if ll.index == 0:
            out.add(ll.index)
        elif prev_indent is not None and ll.indent != prev_indent:
            out.add(ll.index)
        if prev_opens:
            out.add(ll.index)
        if ll.starts_definition(lex.tokens):
            out.add(ll.index)
        prev_indent = ll.indent
        prev_opens = ll.opens_block
    return out


def _substantive(data: bytes, spans: Sequence[TokenEntropy]) -> list[bool]:
    return [bool(data[s.byte_start : s.byte_end].strip()) for s in spans]


def _span_index_for_byte(spans: Sequence[TokenEntropy], offset: int) -> int:
    """Index of the span containing offset, or the first span after it."""
    ends = [s.byte_end for s in spans]
    return bisect_right(ends, offset)


def syntactic_boundaries(
    pre: PreprocessedCode, spans: Sequence[TokenEntropy] | None = None
) -> set[int]:
    """Token indices (into spans, or into the package tokenization when
    spans is None) where a unit must open for syntactic reasons."""
    lex = scan(pre.text)
    if not lex.tokens:
        return set()
    if spans is None:
        spans = [TokenEntropy(t.start, t.end, 0.0) for t in lex.tokens]
    substantive = _substantive(lex.data, spans)

    out: set[int] = set()
    for ll_index in _boundary_logical_lines(lex):
        first_tok = lex.tokens[lex.logical_lines[ll_index].tokens[0]]
        idx = _span_index_for_byte(spans, first_tok.start)
        while idx < len(spans) and not substantive[idx]:
            idx += 1
        if idx < len(spans):
            out.add(idx)
    return out


def segment(
    pre: PreprocessedCode, entropies: Sequence[TokenEntropy], tau: float
) -> list[SemanticUnit]:
    """Split a sample into semantic units; see the module docstring."""
    if not pre.text.strip():
        raise EmptyInput("cannot segment blank text")
    validate_coverage(entropies, pre.text)
    lex = scan(pre.text)

    syntactic = syntactic_boundaries(pre, entropies)
    substantive = _substantive(lex.data, entropies)
    entropy_marks: set[int] = set()
    for idx, span in enumerate(entropies):
        if span.entropy > tau:
            while idx < len(entropies) and not substantive[idx]:
                idx += 1
            if idx < len(entropies):
                entropy_marks.add(idx)

    opens = sorted({0} | syntactic | entropy_marks)
    units: list[SemanticUnit] = []
    for pos, first in enumerate(opens):
        last = opens[pos + 1] - 1 if pos + 1 < len(opens) else len(entropies) - 1
        in_ent = first in entropy_marks
        in_syn = first in syntactic or first == 0
        reason = BOUNDARY_BOTH if in_ent and in_syn else (
            BOUNDARY_ENTROPY if in_ent else BOUNDARY_SYNTACTIC
        )
        units.append(
            SemanticUnit(
                token_range=(first, last),
                byte_range=(entropies[first].byte_start, entropies[last].byte_end),
                indent=_indent_at(lex, entropies[first]),
                boundary_reason=reason,
            )
        )
    return units


def _indent_at(lex: LexResult, span: TokenEntropy) -> int:
    """Indent of the logical line holding the span's first substantive byte."""
    chunk = lex.data[span.byte_start : span.byte_end]
    lead = len(chunk) - len(chunk.lstrip())
    anchor = span.byte_start + lead
    phys = lex.line_of_byte(anchor)
    logical = lex.logical_of_line[phys] if phys < len(lex.logical_of_line) else None
    if logical is not None:
        return lex.logical_lines[logical].indent
    return lex.lines[phys].indent
