"""Toolchain for generating, validating, and evaluating entity-modeling DSL
documents produced by LLMs from natural-language specifications."""

from .ast import DslModel, structurally_equal
from .diagnostics import Diagnostic, Severity, SourceSpan
from .parser import ParseResult, parse
from .printer import print_model
from .summary import concept_summary
from .validate import ValidationReport, validate

__all__ = [
    "Diagnostic",
    "DslModel",
    "ParseResult",
    "Severity",
    "SourceSpan",
    "ValidationReport",
    "concept_summary",
    "parse",
    "print_model",
    "structurally_equal",
    "validate",
]

__version__ = "0.1.0"
