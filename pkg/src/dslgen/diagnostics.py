"""Diagnostic records shared by the lexer, parser, and semantic validator.

Every finding carries a source span precise to the offending token so that
feedback rendered for retries (and for humans) can point at the exact spot.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class Severity(Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class SourceSpan:
    """Location of a lexeme inside a source text.

    ``line`` and ``column`` are 1-based, ``byte_offset`` is the 0-based UTF-8
    byte position of the first character, ``length`` is in characters (>= 1).
    """

    line: int
    column: int
    length: int = 1
    byte_offset: int = 0

    def __post_init__(self) -> None:
        if self.line < 1 or self.column < 1 or self.length < 1:
            raise ValueError(f"invalid span {self!r}")


@dataclass(frozen=True)
class Diagnostic:
    """One coded finding: E### for syntax, V### for semantic checks."""

    code: str
    severity: Severity
    span: SourceSpan
    message: str
    expected: tuple[str, ...] = ()
    hint: str | None = None

    def to_dict(self) -> dict:
        return {
            "code": self.code,
            "severity": self.severity.value,
            "line": self.span.line,
            "column": self.span.column,
            "length": self.span.length,
            "message": self.message,
            "expected": list(self.expected),
            "hint": self.hint,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Diagnostic":
        return cls(
            code=data["code"],
            severity=Severity(data["severity"]),
            span=SourceSpan(
                line=data["line"],
                column=data["column"],
                length=data.get("length", 1),
                byte_offset=data.get("byte_offset", 0),
            ),
            message=data["message"],
            expected=tuple(data.get("expected") or ()),
            hint=data.get("hint"),
        )


def error(code: str, span: SourceSpan, message: str,
          expected: tuple[str, ...] = (), hint: str | None = None) -> Diagnostic:
    return Diagnostic(code, Severity.ERROR, span, message, expected, hint)


def warning(code: str, span: SourceSpan, message: str,
            hint: str | None = None) -> Diagnostic:
    return Diagnostic(code, Severity.WARNING, span, message, hint=hint)
