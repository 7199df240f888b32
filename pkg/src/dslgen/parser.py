"""Bottom-up parser for the entity-modeling DSL.

The grammar below realizes exactly the constructs the prompt rules promise
(main concept, concept, enum, one/some/lone, -->, <>-->, isId, subset of,
defaults) with `;` statement terminators.  Parsing is table-driven SLR(1);
on rejection the offending token and the state's expected-token set are
turned into a coded diagnostic:

  E101  unexpected token (with expected set)
  E102  unexpected end of input
  E103  missing `;` (the expected set contains `;`)
"""

from __future__ import annotations

from dataclasses import dataclass

from . import slr
from .ast import (
    ArrowKind,
    Attribute,
    CardinalityKind,
    ConceptDef,
    DslModel,
    EnumDef,
    Literal,
    LiteralKind,
    Reference,
    SubsetClause,
)
from .diagnostics import Diagnostic, error
from .lexer import Token, TokenType, tokenize

T = TokenType

_CARD = {
    T.ONE: CardinalityKind.ONE,
    T.SOME: CardinalityKind.SOME,
    T.LONE: CardinalityKind.LONE,
}

_LITERAL_KIND = {
    T.STRING: LiteralKind.STRING,
    T.INT: LiteralKind.INT,
    T.FLOAT: LiteralKind.FLOAT,
    T.TRUE: LiteralKind.BOOL,
    T.FALSE: LiteralKind.BOOL,
    T.IDENT: LiteralKind.ENUM_REF,
}


def _concept(v):
    main_tok, concept_tok, name_tok, extends, _l, features, _r = v
    span = main_tok.span if main_tok is not None else concept_tok.span
    return ConceptDef(
        name=name_tok.value,
        is_main=main_tok is not None,
        extends_name=extends,
        features=tuple(features),
        span=span,
    )


def _attribute(v):
    card_tok, name_tok, _colon, type_name, is_id, default, _semi = v
    card = _CARD[card_tok.type] if card_tok is not None else CardinalityKind.ONE
    span = card_tok.span if card_tok is not None else name_tok.span
    return Attribute(
        name=name_tok.value,
        cardinality=card,
        type_name=type_name,
        is_id=is_id,
        default_value=default,
        span=span,
    )


def _reference(v):
    card_tok, name_tok, arrow_tok, target_tok, subset, _semi = v
    card = _CARD[card_tok.type] if card_tok is not None else CardinalityKind.MANY
    span = card_tok.span if card_tok is not None else name_tok.span
    arrow = ArrowKind.ONE_WAY if arrow_tok.type is T.ARROW else ArrowKind.BIDIRECTIONAL
    return Reference(
        name=name_tok.value,
        cardinality=card,
        arrow=arrow,
        target_name=target_tok.value,
        subset_of=subset,
        span=span,
    )


def _enum(v):
    enum_tok, name_tok, _l, literal_toks, _r = v
    return EnumDef(
        name=name_tok.value,
        literals=tuple(t.value for t in literal_toks),
        span=enum_tok.span,
    )


def _grammar() -> slr.SlrTable:
    P = slr.Production
    productions = [
        P("start", ("model",), lambda v: v[0]),
        P("model", ("elements",), lambda v: tuple(v[0])),
        P("elements", (), lambda v: []),
        P("elements", ("elements", "element"), lambda v: v[0] + [v[1]]),
        P("element", ("concept_def",), lambda v: v[0]),
        P("element", ("enum_def",), lambda v: v[0]),
        P("concept_def",
          ("main_opt", T.CONCEPT, T.IDENT, "ext_opt", T.LBRACE, "features",
           T.RBRACE),
          _concept),
        P("main_opt", (), lambda v: None),
        P("main_opt", (T.MAIN,), lambda v: v[0]),
        P("ext_opt", (), lambda v: None),
        P("ext_opt", (T.EXTENDS, T.IDENT), lambda v: v[1].value),
        P("features", (), lambda v: []),
        P("features", ("features", "feature"), lambda v: v[0] + [v[1]]),
        P("feature", ("attribute",), lambda v: v[0]),
        P("feature", ("reference",), lambda v: v[0]),
        P("attribute",
          ("card_opt", T.IDENT, T.COLON, "type_name", "isid_opt",
           "default_opt", T.SEMI),
          _attribute),
        P("reference",
          ("card_opt", T.IDENT, "arrow", T.IDENT, "subset_opt", T.SEMI),
          _reference),
        P("card_opt", (), lambda v: None),
        P("card_opt", (T.ONE,), lambda v: v[0]),
        P("card_opt", (T.SOME,), lambda v: v[0]),
        P("card_opt", (T.LONE,), lambda v: v[0]),
        P("type_name", (T.TYPE_STRING,), lambda v: v[0].value),
        P("type_name", (T.TYPE_INT,), lambda v: v[0].value),
        P("type_name", (T.TYPE_FLOAT,), lambda v: v[0].value),
        P("type_name", (T.TYPE_BOOL,), lambda v: v[0].value),
        P("type_name", (T.TYPE_DATE,), lambda v: v[0].value),
        P("type_name", (T.IDENT,), lambda v: v[0].value),
        P("isid_opt", (), lambda v: False),
        P("isid_opt", (T.ISID,), lambda v: True),
        P("default_opt", (), lambda v: None),
        P("default_opt", (T.EQ, "literal"), lambda v: v[1]),
        P("literal", (T.STRING,), _lit), P("literal", (T.INT,), _lit),
        P("literal", (T.FLOAT,), _lit), P("literal", (T.TRUE,), _lit),
        P("literal", (T.FALSE,), _lit), P("literal", (T.IDENT,), _lit),
        P("arrow", (T.ARROW,), lambda v: v[0]),
        P("arrow", (T.BIARROW,), lambda v: v[0]),
        P("subset_opt", (), lambda v: None),
        P("subset_opt", (T.SUBSET, T.OF, T.IDENT, T.DOT, T.IDENT),
          lambda v: SubsetClause(owner_name=v[2].value, feature_name=v[4].value)),
        P("enum_def",
          (T.ENUM, T.IDENT, T.LBRACE, "enum_literals", T.RBRACE),
          _enum),
        P("enum_literals", (T.IDENT,), lambda v: [v[0]]),
        P("enum_literals", ("enum_literals", T.COMMA, T.IDENT),
          lambda v: v[0] + [v[2]]),
    ]
    terminals = set(T) - {T.EOF}
    return slr.SlrTable(productions, "start", terminals)


def _lit(v):
    tok = v[0]
    return Literal(kind=_LITERAL_KIND[tok.type], value=tok.value)


_TABLE = _grammar()


def token_display_name(terminal) -> str:
    """Human-readable name for a grammar terminal, used in expected sets."""
    if terminal is slr.END or terminal is T.EOF:
        return "end of input"
    if terminal in (T.IDENT, T.STRING, T.INT, T.FLOAT):
        return terminal.name
    return terminal.value


@dataclass
class ParseResult:
    model: DslModel | None
    diagnostics: list[Diagnostic]

    @property
    def ok(self) -> bool:
        return self.model is not None


def _terminal_of(token: Token):
    return slr.END if token.type is T.EOF else token.type


def _syntax_diagnostic(failure: slr.ParseFailure) -> Diagnostic:
    token: Token = failure.token
    expected = tuple(sorted(token_display_name(t) for t in failure.expected))
    at_eof = token.type is T.EOF
    if at_eof:
        return error("E102", token.span,
                     "unexpected end of input",
                     expected=expected,
                     hint="the model ends before the construct is complete")
    if ";" in expected:
        return error("E103", token.span,
                     f"missing ';' before {token.value!r}",
                     expected=expected,
                     hint="every attribute and reference ends with ';'")
    return error("E101", token.span,
                 f"unexpected token {token.value!r}",
                 expected=expected)


def parse(source: str, source_name: str = "<input>") -> ParseResult:
    """Parse ``source`` into a DslModel, or report diagnostics.

    Never raises on bad input: lexer findings are returned as-is, and the
    first parser rejection is reported with the bottom-up expected-token set
    of the rejecting state.
    """
    lexed = tokenize(source)
    if lexed.diagnostics:
        return ParseResult(model=None, diagnostics=list(lexed.diagnostics))
    try:
        elements = slr.run_parser(_TABLE, lexed.tokens, _terminal_of)
    except slr.ParseFailure as failure:
        return ParseResult(model=None, diagnostics=[_syntax_diagnostic(failure)])
    return ParseResult(model=DslModel(elements=elements, source_name=source_name),
                       diagnostics=[])
