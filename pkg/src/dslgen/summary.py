"""Concept summaries for UI display alongside generated models."""

from __future__ import annotations

from dataclasses import dataclass, field

from .ast import Attribute, DslModel, Reference


@dataclass
class ConceptSummary:
    """Per-concept feature listing."""

    name: str
    is_main: bool
    extends_name: str | None
    attributes: list[str] = field(default_factory=list)
    references: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "is_main": self.is_main,
            "extends_name": self.extends_name,
            "attributes": self.attributes,
            "references": self.references,
        }


@dataclass
class ModelSummary:
    main_concept_name: str | None
    concept_count: int
    enum_count: int
    attribute_count: int
    reference_count: int
    concepts: list[ConceptSummary] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "main_concept_name": self.main_concept_name,
            "concept_count": self.concept_count,
            "enum_count": self.enum_count,
            "attribute_count": self.attribute_count,
            "reference_count": self.reference_count,
            "concepts": [c.to_dict() for c in self.concepts],
        }


def concept_summary(model: DslModel) -> ModelSummary:
    """Count concepts, enums, and features, and list each concept's members."""
    main_name: str | None = None
    attribute_count = 0
    reference_count = 0
    concepts: list[ConceptSummary] = []
    for concept in model.concepts:
        if concept.is_main and main_name is None:
            main_name = concept.name
        entry = ConceptSummary(
            name=concept.name,
            is_main=concept.is_main,
            extends_name=concept.extends_name,
        )
        for feature in concept.features:
            if isinstance(feature, Attribute):
                attribute_count += 1
                entry.attributes.append(f"{feature.name} : {feature.type_name}")
            elif isinstance(feature, Reference):
                reference_count += 1
                entry.references.append(
                    f"{feature.name} {feature.arrow.value} {feature.target_name}")
        concepts.append(entry)
    return ModelSummary(
        main_concept_name=main_name,
        concept_count=len(model.concepts),
        enum_count=len(model.enums),
        attribute_count=attribute_count,
        reference_count=reference_count,
        concepts=concepts,
    )
