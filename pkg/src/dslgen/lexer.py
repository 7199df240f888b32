"""Tokenizer for the entity-modeling DSL.

Produces a flat token stream with spans precise to the character, which the
parser and all downstream error reporting rely on.  `//` line comments and
`/* */` block comments are skipped; LLM outputs tend to include them even
when told not to.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .diagnostics import Diagnostic, SourceSpan, error


class TokenType(Enum):
    # Keywords
    MAIN = "main"
    CONCEPT = "concept"
    ENUM = "enum"
    EXTENDS = "extends"
    ONE = "one"
    SOME = "some"
    LONE = "lone"
    ISID = "isId"
    SUBSET = "subset"
    OF = "of"
    TRUE = "true"
    FALSE = "false"
    TYPE_STRING = "string"
    TYPE_INT = "int"
    TYPE_FLOAT = "float"
    TYPE_BOOL = "bool"
    TYPE_DATE = "date"

    # Punctuation
    LBRACE = "{"
    RBRACE = "}"
    COLON = ":"
    SEMI = ";"
    COMMA = ","
    EQ = "="
    DOT = "."
    ARROW = "-->"
    BIARROW = "<>-->"

    # Value-bearing tokens
    IDENT = "IDENT"
    STRING = "STRING"
    INT = "INT"
    FLOAT = "FLOAT"

    EOF = "EOF"


KEYWORDS: dict[str, TokenType] = {
    t.value: t
    for t in (
        TokenType.MAIN, TokenType.CONCEPT, TokenType.ENUM, TokenType.EXTENDS,
        TokenType.ONE, TokenType.SOME, TokenType.LONE, TokenType.ISID,
        TokenType.SUBSET, TokenType.OF, TokenType.TRUE, TokenType.FALSE,
        TokenType.TYPE_STRING, TokenType.TYPE_INT, TokenType.TYPE_FLOAT,
        TokenType.TYPE_BOOL, TokenType.TYPE_DATE,
    )
}

PUNCTUATION = [
    # Longest first so "<>-->" wins over "-->" prefixes.
    ("<>-->", TokenType.BIARROW),
    ("-->", TokenType.ARROW),
    ("{", TokenType.LBRACE),
    ("}", TokenType.RBRACE),
    (":", TokenType.COLON),
    (";", TokenType.SEMI),
    (",", TokenType.COMMA),
    ("=", TokenType.EQ),
    (".", TokenType.DOT),
]


@dataclass(frozen=True)
class Token:
    type: TokenType
    value: str
    span: SourceSpan

    def __repr__(self) -> str:  # compact, for test failure output
        return f"Token({self.type.name}, {self.value!r}, {self.span.line}:{self.span.column})"


@dataclass
class LexResult:
    tokens: list[Token]
    diagnostics: list[Diagnostic]

    @property
    def ok(self) -> bool:
        return not self.diagnostics


def _is_ident_start(ch: str) -> bool:
    return ch.isascii() and (ch.isalpha() or ch == "_")


def _is_ident_part(ch: str) -> bool:
    return ch.isascii() and (ch.isalnum() or ch == "_")


def tokenize(source: str) -> LexResult:
    """Scan ``source`` into tokens.

    Always returns the tokens it could recognize plus diagnostics for what it
    could not (E001 unknown character, E002 unterminated string, E003
    unterminated block comment).  The token list always ends with EOF.
    """
    tokens: list[Token] = []
    diagnostics: list[Diagnostic] = []
    i = 0
    line = 1
    col = 1
    byte_off = 0
    n = len(source)

    def span(length: int) -> SourceSpan:
        return SourceSpan(line=line, column=col, length=length, byte_offset=byte_off)

    def advance(text: str) -> None:
        nonlocal i, line, col, byte_off
        for ch in text:
            byte_off += len(ch.encode("utf-8"))
            if ch == "\n":
                line += 1
                col = 1
            else:
                col += 1
        i += len(text)

    while i < n:
        ch = source[i]

        if ch in " \t\r\n":
            advance(ch)
            continue

        if source.startswith("//", i):
            end = source.find("\n", i)
            advance(source[i:] if end < 0 else source[i:end])
            continue

        if source.startswith("/*", i):
            end = source.find("*/", i + 2)
            if end < 0:
                diagnostics.append(error(
                    "E003", span(max(1, n - i)),
                    "unterminated block comment",
                    hint="close the comment with */"))
                advance(source[i:])
                continue
            advance(source[i:end + 2])
            continue

        if ch == '"':
            j = i + 1
            while j < n and source[j] not in '"\n':
                j += 1
            if j >= n or source[j] != '"':
                diagnostics.append(error(
                    "E002", span(j - i),
                    "unterminated string literal",
                    hint='close the string with "'))
                advance(source[i:j])
                continue
            text = source[i:j + 1]
            tokens.append(Token(TokenType.STRING, text, span(len(text))))
            advance(text)
            continue

        matched_punct = False
        for lexeme, ttype in PUNCTUATION:
            if source.startswith(lexeme, i):
                tokens.append(Token(ttype, lexeme, span(len(lexeme))))
                advance(lexeme)
                matched_punct = True
                break
        if matched_punct:
            continue

        if ch.isdigit() or (ch in "+-" and i + 1 < n and source[i + 1].isdigit()):
            j = i + 1
            while j < n and source[j].isdigit():
                j += 1
            is_float = False
            if j + 1 < n and source[j] == "." and source[j + 1].isdigit():
                is_float = True
                j += 1
                while j < n and source[j].isdigit():
                    j += 1
            text = source[i:j]
            ttype = TokenType.FLOAT if is_float else TokenType.INT
            tokens.append(Token(ttype, text, span(len(text))))
            advance(text)
            continue

        if _is_ident_start(ch):
            j = i + 1
            while j < n and _is_ident_part(source[j]):
                j += 1
            text = source[i:j]
            ttype = KEYWORDS.get(text, TokenType.IDENT)
            tokens.append(Token(ttype, text, span(len(text))))
            advance(text)
            continue

        diagnostics.append(error(
            "E001", span(1),
            f"unknown character {ch!r}",
            hint="this character is not part of the DSL alphabet"))
        advance(ch)

    tokens.append(Token(TokenType.EOF, "", SourceSpan(line, col, 1, byte_off)))
    return LexResult(tokens=tokens, diagnostics=diagnostics)
