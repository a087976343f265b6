"""Parser and formatter for the small plate-sequence language (.qwp files).

Grammar (EBNF):

    protocol := item* ;
    item     := plate | repeat | stepmark ;
    plate    := ("C" | "TX" | "TY") "(" angle ")" ;
    repeat   := "REPEAT" integer "{" item* "}" ;
    stepmark := "STEP" ;
    angle    := number | number "*" "PI" | "PI" | "PI" "/" integer ;

Whitespace is insignificant and '#' starts a comment running to end of
line.  REPEAT blocks expand inline; STEP records a step boundary.  PI is
the closest double to pi.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .core import PlateKind, PlateOp, Protocol

__all__ = [
    "ParseDiagnostic",
    "ProtocolParseError",
    "format_protocol",
    "parse_protocol",
]

_PLATE_KINDS = {"C": PlateKind.COIN, "TX": PlateKind.SHIFT_X, "TY": PlateKind.SHIFT_Y}
_PLATE_NAMES = {kind: name for name, kind in _PLATE_KINDS.items()}


@dataclass(frozen=True)
class ParseDiagnostic:
    """Rejection reason with a 1-based position inside the source text."""

    line: int
    column: int
    message: str

    def __str__(self) -> str:
        return f"line {self.line}, column {self.column}: {self.message}"


class ProtocolParseError(ValueError):
    """Raised for sources the grammar rejects; carries a ParseDiagnostic."""

    def __init__(self, diagnostic: ParseDiagnostic):
        super().__init__(str(diagnostic))
        self.diagnostic = diagnostic

    @property
    def line(self) -> int:
        return self.diagnostic.line

    @property
    def column(self) -> int:
        return self.diagnostic.column


@dataclass(frozen=True)
class _Token:
    kind: str  # NAME, NUMBER, one of ()*{}/ or EOF
    text: str
    line: int
    column: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[^\S\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<newline>\n)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<number>-?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<punct>[(){}*/])
    """,
    re.VERBOSE,
)


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line = 1
    line_start = 0
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            raise ProtocolParseError(
                ParseDiagnostic(line, pos - line_start + 1, f"unknown token {text[pos]!r}")
            )
        column = pos - line_start + 1
        pos = match.end()
        if match.lastgroup == "newline":
            line += 1
            line_start = pos
        elif match.lastgroup == "name":
            tokens.append(_Token("NAME", match.group(), line, column))
        elif match.lastgroup == "number":
            tokens.append(_Token("NUMBER", match.group(), line, column))
        elif match.lastgroup == "punct":
            tokens.append(_Token(match.group(), match.group(), line, column))
    tokens.append(_Token("EOF", "", line, len(text) - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        token = self.tokens[self.pos]
        if token.kind != "EOF":
            self.pos += 1
        return token

    def fail(self, token: _Token, message: str) -> "ProtocolParseError":
        return ProtocolParseError(ParseDiagnostic(token.line, token.column, message))

    def expect(self, kind: str, what: str) -> _Token:
        token = self.peek()
        if token.kind != kind:
            got = repr(token.text) if token.kind != "EOF" else "end of input"
            raise self.fail(token, f"expected {what}, got {got}")
        return self.advance()

    def parse(self) -> Protocol:
        plates, marks = self.items(opener=None)
        return Protocol(tuple(plates), tuple(marks))

    def items(self, opener: _Token | None) -> tuple[list[PlateOp], list[int]]:
        """Parse item* until EOF (top level) or the '}' closing ``opener``."""
        plates: list[PlateOp] = []
        marks: list[int] = []
        while True:
            token = self.peek()
            if token.kind == "EOF":
                if opener is not None:
                    raise self.fail(opener, "unbalanced braces: this '{' is never closed")
                return plates, marks
            if token.kind == "}":
                if opener is None:
                    raise self.fail(token, "unbalanced braces: no matching '{'")
                return plates, marks
            if token.kind == "NAME" and token.text in _PLATE_KINDS:
                plates.append(self.plate())
            elif token.kind == "NAME" and token.text == "REPEAT":
                self.repeat(plates, marks)
            elif token.kind == "NAME" and token.text == "STEP":
                self.advance()
                mark = len(plates)
                if mark == 0 or (marks and marks[-1] == mark):
                    raise self.fail(token, "empty step: STEP must follow at least one plate")
                marks.append(mark)
            else:
                raise self.fail(token, f"expected a plate, REPEAT, or STEP, got {token.text!r}")

    def plate(self) -> PlateOp:
        name = self.advance()
        self.expect("(", "'('")
        angle = self.angle()
        self.expect(")", "')'")
        return PlateOp(_PLATE_KINDS[name.text], angle)

    def repeat(self, plates: list[PlateOp], marks: list[int]) -> None:
        self.advance()
        count_token = self.expect("NUMBER", "a repeat count")
        count = float(count_token.text)
        if not count.is_integer():
            raise self.fail(count_token, f"REPEAT count must be an integer, got {count_token.text}")
        count = int(count)
        if count < 1:
            raise self.fail(count_token, f"REPEAT count must be >= 1, got {count}")
        opener = self.expect("{", "'{'")
        body_plates, body_marks = self.items(opener=opener)
        self.expect("}", "'}'")
        # expand inline: k structural copies of the body, marks re-based per copy
        for copy in range(count):
            base = len(plates)
            plates.extend(body_plates)
            marks.extend(base + mark for mark in body_marks)

    def angle(self) -> float:
        token = self.peek()
        if token.kind == "NAME" and token.text == "PI":
            self.advance()
            if self.peek().kind == "/":
                self.advance()
                divisor_token = self.expect("NUMBER", "an integer divisor")
                divisor = float(divisor_token.text)
                if not divisor.is_integer():
                    raise self.fail(
                        divisor_token, f"divisor must be an integer, got {divisor_token.text}"
                    )
                if divisor == 0:
                    raise self.fail(divisor_token, "zero divisor in angle")
                return math.pi / int(divisor)
            return math.pi
        if token.kind == "NUMBER":
            self.advance()
            value = float(token.text)
            if not math.isfinite(value):
                raise self.fail(token, f"non-finite number {token.text}")
            if self.peek().kind == "*":
                self.advance()
                pi_token = self.expect("NAME", "'PI'")
                if pi_token.text != "PI":
                    raise self.fail(pi_token, f"expected PI after '*', got {pi_token.text!r}")
                return value * math.pi
            return value
        got = repr(token.text) if token.kind != "EOF" else "end of input"
        raise self.fail(token, f"expected an angle, got {got}")


def parse_protocol(source: str) -> Protocol:
    """Parse .qwp source text into an expanded Protocol.

    Raises ProtocolParseError (carrying a 1-based line/column diagnostic)
    for unknown tokens, unbalanced braces, non-finite numbers, REPEAT
    counts below 1, and empty steps.
    """
    return _Parser(_tokenize(source)).parse()


def format_protocol(protocol: Protocol) -> str:
    """Canonical text for an expanded protocol; re-parses to an equal Protocol.

    One line per step, each terminated by STEP; angles are printed with
    repr so they round-trip bit-exactly.  REPEAT blocks are not
    reconstructed.  The empty protocol formats to the empty string.
    """
    if not protocol.plates:
        return ""
    lines = []
    for t in range(protocol.n_steps):
        tokens = [
            f"{_PLATE_NAMES[plate.kind]}({plate.angle!r})" for plate in protocol.step_plates(t)
        ]
        tokens.append("STEP")
        lines.append(" ".join(tokens))
    return "\n".join(lines) + "\n"
