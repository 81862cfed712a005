"""Source normalization, rule-compatible with the analyzer's preprocessor.

The analyzer scores a normalized form of each sample, so cache spans must
address that form. The rules are frozen on both sides of the boundary and
verified by golden tests; this implementation is independent of the
analyzer's.

  1. CRLF and CR line endings become LF. Tabs become `tab_width` spaces
     (default 4) everywhere, string literals included.
  2. Comments (`#` to end of line, outside strings) are removed.
  3. Docstrings are removed: every run of consecutive statements that
     consist of exactly one string literal, either opening the module or
     immediately opening the body of a block-form `def`/`async def`/
     `class` statement (more indented than its header line). Implicitly
     concatenated strings, assigned strings, and bare strings elsewhere
     stay.
  4. Lines left whitespace-only by removal are deleted. Runs of
     originally-blank lines collapse to one blank line; leading and
     trailing blank lines are dropped; every line is right-trimmed.
  5. Non-empty output ends with exactly one LF. Input with nothing left
     after the rules (or nothing to begin with) becomes the empty string.

Tolerant scanning, matching the analyzer: unterminated triple-quoted
strings run to end of input, unterminated single-quoted strings stop at
the newline, a backslash escapes the next character inside any string
(prefixes included: r/b/u/f and two-letter combinations glued to the
opening quote), and unknown characters are passed through.
"""

from __future__ import annotations

from dataclasses import dataclass, field

__all__ = ["preprocess"]

_STRING_PREFIXES = frozenset({"r", "b", "u", "f", "rb", "br", "fr", "rf"})
_SPACE_CHARS = " \t\r\x0b\x0c"


@dataclass
class _Statement:
    """Facts about one logical line, enough to spot docstrings."""

    indent: int
    first: str | None = None       # raw text of the first token
    second: str | None = None      # raw text of the second token
    token_count: int = 0
    lone_string: tuple[int, int] | None = None  # span when the whole statement is one string
    ends_with_colon: bool = False

    def note(self, text_piece: str, colon_at_top: bool, string_span: tuple[int, int] | None) -> None:
        self.token_count += 1
        if self.token_count == 1:
            self.first = text_piece
            self.lone_string = string_span
        else:
            self.lone_string = None
            if self.token_count == 2:
                self.second = text_piece
        self.ends_with_colon = colon_at_top

    @property
    def starts_definition(self) -> bool:
        if self.first in ("def", "class"):
            return True
        return self.first == "async" and self.second == "def"


@dataclass
class _ScanFacts:
    comments: list[tuple[int, int]] = field(default_factory=list)
    statements: list[_Statement] = field(default_factory=list)


def _scan_string(text: str, i: int) -> int:
    """End offset of the string whose opening quote sits at i."""
    n = len(text)
    quote = text[i]
    if text.startswith(quote * 3, i):
        j = i + 3
        while j < n:
            if text[j] == "\\":
                j += 2
            elif text.startswith(quote * 3, j):
                return j + 3
            else:
                j += 1
        return n
    j = i + 1
    while j < n:
        if text[j] == "\\":
            j += 2
        elif text[j] == quote:
            return j + 1
        elif text[j] == "\n":
            return j
        else:
            j += 1
    return n


def _line_indent(text: str, at: int) -> int:
    start = text.rfind("\n", 0, at) + 1
    j = start
    while j < len(text) and text[j] == " ":
        j += 1
    return j - start


def _scan(text: str) -> _ScanFacts:
    facts = _ScanFacts()
    n = len(text)
    depth = 0
    current: _Statement | None = None

    def note(piece: str, span: tuple[int, int] | None = None) -> None:
        nonlocal current
        if current is None:
            current = _Statement(indent=_line_indent(text, i))
        current.note(piece, piece == ":" and depth == 0, span)

    i = 0
    while i < n:
        ch = text[i]
        if ch in _SPACE_CHARS:
            i += 1
        elif ch == "\\" and i + 1 < n and text[i + 1] == "\n":
            i += 2
        elif ch == "\n":
            if depth == 0 and current is not None:
                facts.statements.append(current)
                current = None
            i += 1
        elif ch == "#":
            j = text.find("\n", i)
            j = n if j < 0 else j
            facts.comments.append((i, j))
            i = j
        elif ch in "\"'":
            j = _scan_string(text, i)
            note(text[i:j], (i, j))
            i = j
        elif ch.isalpha() or ch == "_" or ord(ch) > 127:
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_" or ord(text[j]) > 127):
                j += 1
            if text[i:j].lower() in _STRING_PREFIXES and j < n and text[j] in "\"'":
                j = _scan_string(text, j)
                note(text[i:j], (i, j))
            else:
                note(text[i:j])
            i = j
        else:
            if ch in "([{":
                note(ch)
                depth += 1
            elif ch in ")]}":
                depth = max(0, depth - 1)
                note(ch)
            else:
                note(ch)
            i += 1
    if current is not None:
        facts.statements.append(current)
    return facts


def _docstring_spans(statements: list[_Statement]) -> list[tuple[int, int]]:
    picked: list[tuple[int, int]] = []
    idx = 0
    while idx < len(statements) and statements[idx].lone_string:
        picked.append(statements[idx].lone_string)
        idx += 1
    for idx, stmt in enumerate(statements):
        if not (stmt.ends_with_colon and stmt.starts_definition):
            continue
        nxt = idx + 1
        while (
            nxt < len(statements)
            and statements[nxt].indent > stmt.indent
            and statements[nxt].lone_string
        ):
            span = statements[nxt].lone_string
            if span not in picked:
                picked.append(span)
            nxt += 1
    return picked


def _splice(text: str, removed: list[tuple[int, int]]) -> str:
    out: list[str] = []
    pending_blank = False
    line_start = 0
    for raw in text.split("\n"):
        line_end = line_start + len(raw)
        pos = line_start
        kept: list[str] = []
        for start, end in removed:
            if end <= line_start or start >= line_end:
                continue
            kept.append(text[pos : max(pos, start)])
            pos = max(pos, min(end, line_end))
        kept.append(text[pos:line_end])
        content = "".join(kept).rstrip()
        if content:
            if pending_blank and out:
                out.append("")
            pending_blank = False
            out.append(content)
        elif not raw.strip():
            pending_blank = True
        # lines emptied by removal vanish without leaving a blank
        line_start = line_end + 1
    if not out:
        return ""
    return "\n".join(out) + "\n"


def preprocess(code: str, tab_width: int = 4) -> str:
    """Normalized text the analyzer sees; empty string when nothing remains."""
    if not code.strip():
        return ""
    text = code.replace("\r\n", "\n").replace("\r", "\n").replace("\t", " " * tab_width)
    facts = _scan(text)
    removed = sorted(facts.comments + _docstring_spans(facts.statements))
    return _splice(text, removed)
