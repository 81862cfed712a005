"""Grammar-free lexical scanner for indentation-structured source.

Comment stripping, segmentation, and the classical metrics all consume
this one tokenization, so the scanner favors predictable degradation
over strictness: unterminated strings run to end of input, unknown
characters become one-character operator tokens, and no input is ever
rejected. Offsets are UTF-8 byte offsets into the scanned text, matching
the span convention used by entropy providers.

Indentation is measured in leading spaces; callers are expected to
expand tabs before scanning.
"""

from __future__ import annotations

import keyword
from bisect import bisect_right
from dataclasses import dataclass

__all__ = [
    "NAME",
    "NUMBER",
    "STRING",
    "OP",
    "COMMENT",
    "KEYWORD",
    "KEYWORDS",
    "LITERAL_KEYWORDS",
    "Token",
    "Line",
    "LogicalLine",
    "LexResult",
    "scan",
]

NAME = "name"
KEYWORD = "keyword"
NUMBER = "number"
STRING = "string"
OP = "op"
COMMENT = "comment"

KEYWORDS = frozenset(keyword.kwlist)
# Keywords that denote literal values; they count as operands, not operators.
LITERAL_KEYWORDS = frozenset({"True", "False", "None"})

_STRING_PREFIXES = frozenset({"r", "b", "u", "f", "rb", "br", "fr", "rf"})
_OPEN_BRACKETS = "([{"
_CLOSE_BRACKETS = ")]}"

# Longest match first.
_OPERATORS = (
    "**=", "//=", ">>=", "<<=", "...",
    "!=", ">=", "<=", "==", "->", ":=",
    "+=", "-=", "*=", "/=", "%=", "@=", "&=", "|=", "^=",
    "**", "//", "<<", ">>",
    "+", "-", "*", "/", "%", "@", "&", "|", "^", "~",
    "<", ">", "=",
    "(", ")", "[", "]", "{", "}",
    ",", ":", ".", ";",
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    start: int  # byte offset, inclusive
    end: int    # byte offset, exclusive
    line: int   # physical line of the token's first character, 0-based
    depth: int  # bracket nesting depth at emission


@dataclass(frozen=True)
class Line:
    index: int
    start: int   # byte offset of the line's first character
    indent: int  # leading spaces
    blank: bool  # no non-whitespace content


@dataclass(frozen=True)
class LogicalLine:
    """A statement-ish run of tokens between depth-0 newlines."""

    index: int
    first_line: int
    last_line: int
    indent: int              # indent of the first physical line
    tokens: tuple[int, ...]  # indices into LexResult.tokens
    opens_block: bool        # ends with ':' outside brackets

    def starts_definition(self, all_tokens: list[Token]) -> bool:
        """True when the line begins a function or class definition."""
        if not self.tokens:
            return False
        first = all_tokens[self.tokens[0]]
        if first.kind == KEYWORD and first.text in ("def", "class"):
            return True
        if first.kind == KEYWORD and first.text == "async" and len(self.tokens) > 1:
            second = all_tokens[self.tokens[1]]
            return second.kind == KEYWORD and second.text == "def"
        return False


@dataclass
class LexResult:
    text: str
    data: bytes
    tokens: list[Token]
    comments: list[Token]
    lines: list[Line]
    logical_lines: list[LogicalLine]
    logical_of_line: list[int | None]  # physical line -> logical line index

    def line_of_byte(self, offset: int) -> int:
        starts = [ln.start for ln in self.lines]
        return max(0, bisect_right(starts, offset) - 1)

    def byte_slice(self, start: int, end: int) -> str:
        return self.data[start:end].decode("utf-8")


def _is_name_start(ch: str) -> bool:
    return ch.isalpha() or ch == "_" or ord(ch) > 127


def _is_name_char(ch: str) -> bool:
    return ch.isalnum() or ch == "_" or ord(ch) > 127


def scan(text: str) -> LexResult:
    """Tokenize text and derive physical and logical line structure."""
    n = len(text)

    # Char -> byte offset table; the trailing entry maps end-of-text.
    c2b = [0] * (n + 1)
    acc = 0
    for i, ch in enumerate(text):
        c2b[i] = acc
        acc += len(ch.encode("utf-8"))
    c2b[n] = acc

    # Physical lines.
    line_start_chars = [0]
    for i, ch in enumerate(text):
        if ch == "\n":
            line_start_chars.append(i + 1)
    lines: list[Line] = []
    for idx, start_c in enumerate(line_start_chars):
        end_c = line_start_chars[idx + 1] - 1 if idx + 1 < len(line_start_chars) else n
        raw = text[start_c:end_c]
        indent = len(raw) - len(raw.lstrip(" "))
        lines.append(Line(index=idx, start=c2b[start_c], indent=indent, blank=not raw.strip()))

    def line_of_char(i: int) -> int:
        return bisect_right(line_start_chars, i) - 1

    tokens: list[Token] = []
    comments: list[Token] = []

    logical_lines: list[LogicalLine] = []
    cur_tokens: list[int] = []

    def close_logical() -> None:
        if not cur_tokens:
            return
        first_tok = tokens[cur_tokens[0]]
        last_tok = tokens[cur_tokens[-1]]
        opens = last_tok.kind == OP and last_tok.text == ":" and last_tok.depth == 0
        logical_lines.append(
            LogicalLine(
                index=len(logical_lines),
                first_line=first_tok.line,
                last_line=last_tok.line + last_tok.text.count("\n"),
                indent=lines[first_tok.line].indent,
                tokens=tuple(cur_tokens),
                opens_block=opens,
            )
        )
        cur_tokens.clear()

    def emit(kind: str, start_c: int, end_c: int, depth: int) -> None:
        tok = Token(
            kind=kind,
            text=text[start_c:end_c],
            start=c2b[start_c],
            end=c2b[end_c],
            line=line_of_char(start_c),
            depth=depth,
        )
        if kind == COMMENT:
            comments.append(tok)
        else:
            cur_tokens.append(len(tokens))
            tokens.append(tok)

    def scan_string(i: int) -> int:
        """Consume a string literal starting at the quote character; returns end."""
        quote = text[i]
        if text.startswith(quote * 3, i):
            closer = quote * 3
            j = i + 3
            while j < n:
                if text[j] == "\\":
                    j += 2
                    continue
                if text.startswith(closer, j):
                    return j + 3
                j += 1
            return n  # unterminated: run to end of input
        j = i + 1
        while j < n:
            ch = text[j]
            if ch == "\\":
                j += 2
                continue
            if ch == quote:
                return j + 1
            if ch == "\n":
                return j  # unterminated single-quoted string stops at newline
            j += 1
        return n

    depth = 0
    i = 0
    while i < n:
        ch = text[i]

        if ch in " \t\r\x0b\x0c":
            i += 1
            continue

        if ch == "\\" and i + 1 < n and text[i + 1] == "\n":
            i += 2
            continue

        if ch == "\n":
            if depth == 0:
                close_logical()
            i += 1
            continue

        if ch == "#":
            j = i
            while j < n and text[j] != "\n":
                j += 1
            emit(COMMENT, i, j, depth)
            i = j
            continue

        if ch in "\"'":
            j = scan_string(i)
            emit(STRING, i, j, depth)
            i = j
            continue

        if _is_name_start(ch):
            j = i
            while j < n and _is_name_char(text[j]):
                j += 1
            word = text[i:j]
            # A string prefix glued to a quote is part of the string literal.
            if word.lower() in _STRING_PREFIXES and j < n and text[j] in "\"'":
                j = scan_string(j)
                emit(STRING, i, j, depth)
            else:
                emit(KEYWORD if word in KEYWORDS else NAME, i, j, depth)
            i = j
            continue

        if ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            while j < n and (text[j].isalnum() or text[j] in "._"):
                # Consume exponent signs: 1e-5, 2E+3.
                if text[j] in "eE" and j + 1 < n and text[j + 1] in "+-" and j > i:
                    j += 2
                    continue
                j += 1
            emit(NUMBER, i, j, depth)
            i = j
            continue

        for op in _OPERATORS:
            if text.startswith(op, i):
                if op in _OPEN_BRACKETS:
                    emit(OP, i, i + len(op), depth)
                    depth += 1
                elif op in _CLOSE_BRACKETS:
                    depth = max(0, depth - 1)
                    emit(OP, i, i + len(op), depth)
                else:
                    emit(OP, i, i + len(op), depth)
                i += len(op)
                break
        else:
            emit(OP, i, i + 1, depth)  # unknown character: degrade, don't reject
            i += 1

    close_logical()

    logical_of_line: list[int | None] = [None] * len(lines)
    for ll in logical_lines:
        for phys in range(ll.first_line, ll.last_line + 1):
            if phys < len(logical_of_line):
                logical_of_line[phys] = ll.index

    return LexResult(
        text=text,
        data=text.encode("utf-8"),
        tokens=tokens,
        comments=comments,
        lines=lines,
        logical_lines=logical_lines,
        logical_of_line=logical_of_line,
    )
