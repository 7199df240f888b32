"""Semantic validation over parsed models.

Runs after parsing and collects every finding (no early stop): name
resolution, inheritance well-formedness, subset-relation rules, identifier
and default-value constraints.  Check codes:

  V101 unresolved attribute type        V102 unresolved reference target
  V201 unknown extends target           V202 extends target is an enum
  V203 self-inheritance                 V204 inheritance cycle
  V301 subset parent relation missing   V302 declaring concept not in owner line
  V303 subset target not covariant      V304 subset widens cardinality
  V401 duplicate top-level name         V402 duplicate feature/literal name
  V501 no main concept                  V502 more than one main concept
  V601 default kind mismatch            V602 enum default not a member
  V701 isId on non-primitive attribute  V702 isId with cardinality != one
  V703 more than one isId in a chain
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .ast import (
    PRIMITIVE_TYPES,
    UPPER_BOUND,
    Attribute,
    CardinalityKind,
    ConceptDef,
    DslModel,
    EnumDef,
    LiteralKind,
    Reference,
)
from .diagnostics import Diagnostic, Severity, SourceSpan, error

_MODEL_SPAN = SourceSpan(1, 1)

#: Literal kinds each primitive type accepts as a default value.
_DEFAULT_KINDS = {
    "string": {LiteralKind.STRING},
    "int": {LiteralKind.INT},
    "float": {LiteralKind.FLOAT, LiteralKind.INT},
    "bool": {LiteralKind.BOOL},
    "date": {LiteralKind.STRING},
}


@dataclass
class SymbolTable:
    """Declared names of one model, plus optional external symbols."""

    concepts: dict[str, ConceptDef] = field(default_factory=dict)
    enums: dict[str, EnumDef] = field(default_factory=dict)
    resolved_parents: dict[str, str | None] = field(default_factory=dict)
    external: dict[str, str] = field(default_factory=dict)  # name -> "concept"|"enum"

    def kind_of(self, name: str) -> str | None:
        if name in self.concepts:
            return "concept"
        if name in self.enums:
            return "enum"
        return self.external.get(name)


@dataclass
class ValidationReport:
    diagnostics: list[Diagnostic]
    valid: bool

    def to_dict(self) -> dict:
        return {
            "valid": self.valid,
            "diagnostics": [d.to_dict() for d in self.diagnostics],
        }

    @property
    def errors(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.severity is Severity.ERROR]


def build_symbols(model: DslModel,
                  external: dict[str, str] | None = None,
                  ) -> tuple[SymbolTable, list[Diagnostic]]:
    """Collect declared names; duplicates get V401 at the later declaration."""
    table = SymbolTable(external=dict(external or {}))
    diagnostics: list[Diagnostic] = []
    for element in model.elements:
        if element.name in table.concepts or element.name in table.enums:
            diagnostics.append(error(
                "V401", element.span,
                f"duplicate top-level name '{element.name}'",
                hint="concepts and enums share one global namespace"))
            continue
        if isinstance(element, ConceptDef):
            table.concepts[element.name] = element
            table.resolved_parents[element.name] = element.extends_name
        else:
            table.enums[element.name] = element
    return table, diagnostics


def ancestry(table: SymbolTable, concept: str) -> list[str]:
    """Extends-chain from immediate parent upward; stops on a repeated name
    so it terminates even when the model contains an inheritance cycle."""
    if concept not in table.concepts:
        raise KeyError(f"unknown concept {concept!r}")
    seen = {concept}
    chain: list[str] = []
    current = table.resolved_parents.get(concept)
    while current is not None and current in table.concepts:
        if current in seen:
            break
        seen.add(current)
        chain.append(current)
        current = table.resolved_parents.get(current)
    else:
        if current is not None:
            chain.append(current)  # dangling parent name, reported as V201
    return chain


def _in_cycle(table: SymbolTable, concept: str) -> bool:
    """True when ``concept`` itself sits on an extends cycle."""
    current = table.resolved_parents.get(concept)
    for _ in range(len(table.concepts) + 1):
        if current is None or current not in table.concepts:
            return False
        if current == concept:
            return True
        current = table.resolved_parents.get(current)
    return False


def _inherited_features(table: SymbolTable, concept: ConceptDef):
    """Features of strict ancestors, nearest first."""
    for name in ancestry(table, concept.name):
        parent = table.concepts.get(name)
        if parent is None:
            continue
        yield from parent.features


def _find_parent_relation(table: SymbolTable, owner: str,
                          feature_name: str) -> Reference | None:
    """Look up a reference named ``feature_name`` on ``owner`` or its ancestors."""
    if owner not in table.concepts:
        return None
    for name in [owner, *ancestry(table, owner)]:
        concept = table.concepts.get(name)
        if concept is None:
            continue
        for feature in concept.features:
            if isinstance(feature, Reference) and feature.name == feature_name:
                return feature
    return None


def _is_self_or_descendant(table: SymbolTable, concept: str, of: str) -> bool:
    return concept == of or (concept in table.concepts and of in ancestry(table, concept))


def validate(model: DslModel,
             external: dict[str, str] | None = None) -> ValidationReport:
    """Run every semantic check and report all findings in source order."""
    table, diagnostics = build_symbols(model, external)

    mains = [c for c in model.concepts if c.is_main]
    if not mains:
        diagnostics.append(error(
            "V501", model.elements[0].span if model.elements else _MODEL_SPAN,
            "model declares no main concept",
            hint="mark the central entity with 'main concept'"))
    for extra in mains[1:]:
        diagnostics.append(error(
            "V502", extra.span,
            f"more than one main concept ('{mains[0].name}' is already main)",
            hint="exactly one concept may be marked main"))

    for concept in table.concepts.values():
        diagnostics.extend(_check_concept(table, concept))

    for enum in table.enums.values():
        seen: set[str] = set()
        for literal in enum.literals:
            if literal in seen:
                diagnostics.append(error(
                    "V402", enum.span,
                    f"duplicate literal '{literal}' in enum '{enum.name}'"))
            seen.add(literal)

    diagnostics.sort(key=lambda d: (d.span.byte_offset, d.span.line,
                                    d.span.column, d.code))
    valid = not any(d.severity is Severity.ERROR for d in diagnostics)
    return ValidationReport(diagnostics=diagnostics, valid=valid)


def _check_concept(table: SymbolTable, concept: ConceptDef) -> list[Diagnostic]:
    out: list[Diagnostic] = []

    parent = concept.extends_name
    cyclic = _in_cycle(table, concept.name)
    if parent is not None:
        if parent == concept.name:
            out.append(error("V203", concept.span,
                             f"concept '{concept.name}' extends itself"))
        elif parent in table.enums:
            out.append(error("V202", concept.span,
                             f"'{concept.name}' extends enum '{parent}'",
                             hint="only concepts can be extended"))
        elif parent not in table.concepts and table.external.get(parent) != "concept":
            out.append(error("V201", concept.span,
                             f"unknown extends target '{parent}'"))
        elif cyclic:
            out.append(error("V204", concept.span,
                             f"inheritance cycle through '{concept.name}'"))

    inherited_names = set()
    inherited_isid = 0
    if not cyclic:
        for feature in _inherited_features(table, concept):
            inherited_names.add(feature.name)
            if isinstance(feature, Attribute) and feature.is_id:
                inherited_isid += 1

    own_names: set[str] = set()
    isid_count = inherited_isid
    for feature in concept.features:
        if feature.name in own_names or feature.name in inherited_names:
            where = "in" if feature.name in own_names else "inherited into"
            out.append(error(
                "V402", feature.span,
                f"duplicate feature name '{feature.name}' {where} "
                f"concept '{concept.name}'"))
        own_names.add(feature.name)

        if isinstance(feature, Attribute):
            out.extend(_check_attribute(table, feature))
            if feature.is_id:
                isid_count += 1
                if isid_count > 1:
                    out.append(error(
                        "V703", feature.span,
                        f"more than one isId attribute in the inheritance "
                        f"chain of '{concept.name}'"))
        else:
            out.extend(_check_reference(table, concept, feature))
    return out


def _check_attribute(table: SymbolTable, attr: Attribute) -> list[Diagnostic]:
    out: list[Diagnostic] = []
    is_primitive = attr.type_name in PRIMITIVE_TYPES
    is_enum = attr.type_name in table.enums or table.external.get(attr.type_name) == "enum"
    if not is_primitive and not is_enum:
        out.append(error(
            "V101", attr.span,
            f"unresolved attribute type '{attr.type_name}'",
            hint="attribute types are primitives or declared enums"))

    if attr.is_id:
        if not is_primitive:
            out.append(error(
                "V701", attr.span,
                f"isId attribute '{attr.name}' must have a primitive type"))
        if attr.cardinality is not CardinalityKind.ONE:
            out.append(error(
                "V702", attr.span,
                f"isId attribute '{attr.name}' must have cardinality one"))

    default = attr.default_value
    if default is not None:
        if is_primitive:
            if default.kind not in _DEFAULT_KINDS[attr.type_name]:
                out.append(error(
                    "V601", attr.span,
                    f"default value {default.value} does not match "
                    f"type '{attr.type_name}'"))
        elif attr.type_name in table.enums:
            enum = table.enums[attr.type_name]
            if default.kind is not LiteralKind.ENUM_REF:
                out.append(error(
                    "V601", attr.span,
                    f"default for enum-typed '{attr.name}' must be a literal "
                    f"of '{enum.name}'"))
            elif default.value not in enum.literals:
                out.append(error(
                    "V602", attr.span,
                    f"'{default.value}' is not a literal of enum '{enum.name}'"))
    return out


def _check_reference(table: SymbolTable, concept: ConceptDef,
                     ref: Reference) -> list[Diagnostic]:
    out: list[Diagnostic] = []
    target_known = (ref.target_name in table.concepts
                    or table.external.get(ref.target_name) == "concept")
    if not target_known:
        out.append(error(
            "V102", ref.span,
            f"unresolved reference target '{ref.target_name}'",
            hint="reference targets must be declared concepts"))

    if ref.subset_of is None:
        return out
    owner = ref.subset_of.owner_name
    parent = _find_parent_relation(table, owner, ref.subset_of.feature_name)
    if parent is None:
        out.append(error(
            "V301", ref.span,
            f"subset parent relation '{owner}.{ref.subset_of.feature_name}' "
            f"not found"))
        return out
    if not _is_self_or_descendant(table, concept.name, owner):
        out.append(error(
            "V302", ref.span,
            f"'{concept.name}' is neither '{owner}' nor one of its descendants"))
    if (target_known and ref.target_name in table.concepts
            and parent.target_name in table.concepts
            and not _is_self_or_descendant(table, ref.target_name,
                                           parent.target_name)):
        out.append(error(
            "V303", ref.span,
            f"subset target '{ref.target_name}' is not '{parent.target_name}' "
            f"or one of its descendants"))
    if UPPER_BOUND[ref.cardinality] > UPPER_BOUND[parent.cardinality]:
        out.append(error(
            "V304", ref.span,
            f"subset cardinality '{ref.cardinality.value}' exceeds the parent "
            f"relation's upper bound '{parent.cardinality.value}'"))
    return out
