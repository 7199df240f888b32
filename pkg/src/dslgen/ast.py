"""AST for parsed DSL documents.

Nodes are frozen dataclasses: once the parser builds a model it is immutable
and safe to share between threads.  Structural equality deliberately ignores
spans (see ``structurally_equal``) so round-trip tests compare shape, not
formatting.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Union

from .diagnostics import SourceSpan

PRIMITIVE_TYPES = ("string", "int", "float", "bool", "date")


class CardinalityKind(Enum):
    ONE = "one"        # exactly 1
    LONE = "lone"      # 0..1
    SOME = "some"      # 1..*
    MANY = "many"      # 0..*, the spelling of an absent keyword


#: Upper bound of each multiplicity, for subset-narrowing checks.
UPPER_BOUND = {
    CardinalityKind.ONE: 1,
    CardinalityKind.LONE: 1,
    CardinalityKind.SOME: float("inf"),
    CardinalityKind.MANY: float("inf"),
}


class LiteralKind(Enum):
    STRING = "string"
    INT = "int"
    FLOAT = "float"
    BOOL = "bool"
    ENUM_REF = "enum_ref"


class ArrowKind(Enum):
    ONE_WAY = "-->"
    BIDIRECTIONAL = "<>-->"


@dataclass(frozen=True)
class Literal:
    kind: LiteralKind
    value: str  # lexeme as written, quotes included for strings


@dataclass(frozen=True)
class Attribute:
    name: str
    cardinality: CardinalityKind
    type_name: str
    is_id: bool = False
    default_value: Literal | None = None
    span: SourceSpan = SourceSpan(1, 1)


@dataclass(frozen=True)
class SubsetClause:
    owner_name: str
    feature_name: str


@dataclass(frozen=True)
class Reference:
    name: str
    cardinality: CardinalityKind
    arrow: ArrowKind
    target_name: str
    subset_of: SubsetClause | None = None
    span: SourceSpan = SourceSpan(1, 1)


Feature = Union[Attribute, Reference]


@dataclass(frozen=True)
class ConceptDef:
    name: str
    is_main: bool = False
    extends_name: str | None = None
    features: tuple[Feature, ...] = ()
    span: SourceSpan = SourceSpan(1, 1)


@dataclass(frozen=True)
class EnumDef:
    name: str
    literals: tuple[str, ...] = ()
    span: SourceSpan = SourceSpan(1, 1)


Element = Union[ConceptDef, EnumDef]


@dataclass(frozen=True)
class DslModel:
    elements: tuple[Element, ...] = ()
    source_name: str = "<input>"

    @property
    def concepts(self) -> tuple[ConceptDef, ...]:
        return tuple(e for e in self.elements if isinstance(e, ConceptDef))

    @property
    def enums(self) -> tuple[EnumDef, ...]:
        return tuple(e for e in self.elements if isinstance(e, EnumDef))


def _strip(node):
    """Reduce a node to a span-free tuple for structural comparison."""
    if isinstance(node, DslModel):
        return ("model", tuple(_strip(e) for e in node.elements))
    if isinstance(node, ConceptDef):
        return ("concept", node.name, node.is_main, node.extends_name,
                tuple(_strip(f) for f in node.features))
    if isinstance(node, EnumDef):
        return ("enum", node.name, node.literals)
    if isinstance(node, Attribute):
        return ("attr", node.name, node.cardinality, node.type_name,
                node.is_id, node.default_value)
    if isinstance(node, Reference):
        return ("ref", node.name, node.cardinality, node.arrow,
                node.target_name, node.subset_of)
    raise TypeError(f"not an AST node: {node!r}")


def structurally_equal(a: DslModel, b: DslModel) -> bool:
    """Span-agnostic model equality; the round-trip property uses this."""
    return _strip(a) == _strip(b)
