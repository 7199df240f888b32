"""Canonical pretty-printer for parsed models.

Emits one deterministic form: 4-space indent, one feature per line, single
spaces around ':', '=', and arrows, LF line endings.  Cardinality keywords
are printed only when they differ from the defaulted value (ONE for
attributes, MANY for references), so printing is a function of structure
alone and print(parse(print(m))) == print(m).
"""

from __future__ import annotations

from .ast import (
    Attribute,
    CardinalityKind,
    ConceptDef,
    DslModel,
    EnumDef,
    Reference,
)

INDENT = "    "


def _card_prefix(kind: CardinalityKind, default: CardinalityKind) -> str:
    return "" if kind is default else f"{kind.value} "


def _attribute_line(attr: Attribute) -> str:
    parts = [
        f"{_card_prefix(attr.cardinality, CardinalityKind.ONE)}{attr.name}",
        ":",
        attr.type_name,
    ]
    if attr.is_id:
        parts.append("isId")
    if attr.default_value is not None:
        parts.append("=")
        parts.append(attr.default_value.value)
    return INDENT + " ".join(parts) + ";"


def _reference_line(ref: Reference) -> str:
    parts = [
        f"{_card_prefix(ref.cardinality, CardinalityKind.MANY)}{ref.name}",
        ref.arrow.value,
        ref.target_name,
    ]
    if ref.subset_of is not None:
        parts.append(f"subset of {ref.subset_of.owner_name}.{ref.subset_of.feature_name}")
    return INDENT + " ".join(parts) + ";"


def _concept_text(concept: ConceptDef) -> str:
    head = "main concept" if concept.is_main else "concept"
    header = f"{head} {concept.name}"
    if concept.extends_name:
        header += f" extends {concept.extends_name}"
    lines = [header + " {"]
    for feature in concept.features:
        if isinstance(feature, Attribute):
            lines.append(_attribute_line(feature))
        else:
            lines.append(_reference_line(feature))
    lines.append("}")
    return "\n".join(lines)


def _enum_text(enum: EnumDef) -> str:
    return f"enum {enum.name} {{ {', '.join(enum.literals)} }}"


def print_model(model: DslModel) -> str:
    """Render ``model`` in canonical form; total on well-formed ASTs."""
    blocks = []
    for element in model.elements:
        if isinstance(element, ConceptDef):
            blocks.append(_concept_text(element))
        else:
            blocks.append(_enum_text(element))
    return "\n\n".join(blocks) + "\n" if blocks else ""
