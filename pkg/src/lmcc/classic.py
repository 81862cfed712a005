"""Classical complexity baselines, computed lexically on preprocessed code.

All four metrics share the package tokenization; none of them parse an
AST, so they degrade gracefully on fragments. The counting rules are
frozen:

Cyclomatic (CC): 1 + occurrences of decision tokens, namely the keywords
if, elif, for, while, except, assert and the boolean connectives and/or.
Conditional expressions and comprehension clauses count through their
if/for keywords like any other.

Halstead: operands are identifiers and literals (strings, numbers, and
the literal keywords True/False/None). Operators are the remaining
keywords, symbolic operators, and the call '(', index '[', and
attribute '.' delimiters; a '(' or '[' counts only when it directly
follows a name, closing bracket, or string. Commas, colons, semicolons,
grouping parentheses, and display brackets are not counted at all.
Volume V = (N1 + N2) * log2(eta1 + eta2); difficulty
D = (eta1 / 2) * (N2 / eta2), defined as 0 (with a degenerate flag)
when there are no operands.

Maintainability index:
    MI = 171 - 5.2 ln(V) - 0.23 CC - 16.2 ln(LOC)
         + 50 sin(sqrt(2.4 * comment_ratio))
with V clamped to at least 1 and LOC the non-blank line count. The
comment ratio comes from preprocessing, since comments are gone here.

Cognitive: +1 for each statement-position control keyword (if, elif,
else, for, while, except), a nesting bonus equal to the number of
enclosing control bodies for if/for/while/except only, and +1 for each
new run of a boolean connective (a and b and c is one run; a and b or c
is two).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .corpus import PreprocessedCode
from .lexing import KEYWORD, LITERAL_KEYWORDS, NAME, NUMBER, OP, STRING, LexResult, scan

__all__ = [
    "HalsteadCounts",
    "HalsteadReport",
    "ClassicReport",
    "cyclomatic",
    "halstead",
    "maintainability_index",
    "mi_formula",
    "cognitive",
    "code_length",
    "classic_report",
]

_DECISION_KEYWORDS = frozenset({"if", "elif", "for", "while", "except", "assert", "and", "or"})
_COGNITIVE_INCREMENT = frozenset({"if", "elif", "else", "for", "while", "except"})
_COGNITIVE_NESTING = frozenset({"if", "for", "while", "except"})
_CONNECTIVES = ("and", "or")


@dataclass(frozen=True)
class HalsteadCounts:
    distinct_operators: int
    distinct_operands: int
    total_operators: int
    total_operands: int


@dataclass(frozen=True)
class HalsteadReport:
    counts: HalsteadCounts
    volume: float
    difficulty: float
    degenerate: bool  # no operands: difficulty pinned to 0


@dataclass(frozen=True)
class ClassicReport:
    cc: int
    halstead: HalsteadReport
    mi: float
    cognitive: int
    loc: int
    token_count: int


def cyclomatic(pre: PreprocessedCode) -> int:
    lex = scan(pre.text)
    hits = sum(1 for t in lex.tokens if t.kind == KEYWORD and t.text in _DECISION_KEYWORDS)
    return 1 + hits


def _is_operand(tok) -> bool:
    if tok.kind in (NAME, NUMBER, STRING):
        return True
    return tok.kind == KEYWORD and tok.text in LITERAL_KEYWORDS


def halstead(pre: PreprocessedCode) -> HalsteadReport:
    lex = scan(pre.text)
    operators: list[str] = []
    operands: list[str] = []
    prev = None
    for tok in lex.tokens:
        if _is_operand(tok):
            operands.append(tok.text)
        elif tok.kind == KEYWORD:
            operators.append(tok.text)
        elif tok.kind == OP:
            if tok.text in ("(", "["):
                # Call/index position: directly after a name, closer, or string.
                if prev is not None and (
                    prev.kind in (NAME, STRING)
                    or (prev.kind == OP and prev.text in (")", "]"))
                ):
                    operators.append(tok.text)
            elif tok.text == ".":
                operators.append(tok.text)
            elif tok.text in (")", "]", "{", "}", ",", ":", ";"):
                pass  # grouping and display punctuation is not counted
            else:
                operators.append(tok.text)
        prev = tok

    counts = HalsteadCounts(
        distinct_operators=len(set(operators)),
        distinct_operands=len(set(operands)),
        total_operators=len(operators),
        total_operands=len(operands),
    )
    vocabulary = counts.distinct_operators + counts.distinct_operands
    length = counts.total_operators + counts.total_operands
    volume = length * math.log2(vocabulary) if vocabulary > 0 else 0.0
    degenerate = counts.distinct_operands == 0
    if degenerate:
        difficulty = 0.0
    else:
        difficulty = (counts.distinct_operators / 2.0) * (
            counts.total_operands / counts.distinct_operands
        )
    return HalsteadReport(counts=counts, volume=volume, difficulty=difficulty, degenerate=degenerate)


def mi_formula(volume: float, cc: int, loc: int, comment_ratio: float) -> float:
    """The maintainability index formula itself, with the volume clamp."""
    v = max(volume, 1.0)
    return (
        171.0
        - 5.2 * math.log(v)
        - 0.23 * cc
        - 16.2 * math.log(max(loc, 1))
        + 50.0 * math.sin(math.sqrt(2.4 * comment_ratio))
    )


def maintainability_index(pre: PreprocessedCode) -> float:
    loc, _ = code_length(pre)
    return mi_formula(halstead(pre).volume, cyclomatic(pre), loc, pre.comment_ratio)


def cognitive(pre: PreprocessedCode) -> int:
    lex = scan(pre.text)
    score = 0
    nesting: list[int] = []  # indents of enclosing control bodies
    for ll in lex.logical_lines:
        while nesting and nesting[-1] >= ll.indent:
            nesting.pop()
        first = lex.tokens[ll.tokens[0]]
        kw = first.text if first.kind == KEYWORD else None
        if kw in _COGNITIVE_INCREMENT:
            score += 1
            if kw in _COGNITIVE_NESTING:
                score += len(nesting)
        run: str | None = None
        for idx in ll.tokens:
            tok = lex.tokens[idx]
            if tok.kind == KEYWORD and tok.text in _CONNECTIVES:
                if tok.text != run:
                    score += 1
                run = tok.text
        if kw in _COGNITIVE_INCREMENT and ll.opens_block:
            nesting.append(ll.indent)
    return score


def code_length(pre: PreprocessedCode) -> tuple[int, int]:
    """(non-blank line count, token count) of the preprocessed text."""
    lex = scan(pre.text)
    loc = sum(1 for line in lex.lines if not line.blank)
    return loc, len(lex.tokens)


def classic_report(pre: PreprocessedCode) -> ClassicReport:
    hal = halstead(pre)
    cc = cyclomatic(pre)
    loc, tokens = code_length(pre)
    return ClassicReport(
        cc=cc,
        halstead=hal,
        mi=mi_formula(hal.volume, cc, loc, pre.comment_ratio),
        cognitive=cognitive(pre),
        loc=loc,
        token_count=tokens,
    )
