import random
import string

import pytest

from dslgen import gateway
from dslgen.ast import (
    ArrowKind,
    Attribute,
    CardinalityKind,
    ConceptDef,
    DslModel,
    EnumDef,
    Literal,
    LiteralKind,
    Reference,
)

KEYWORDS = {
    "main", "concept", "enum", "extends", "one", "some", "lone", "isId",
    "subset", "of", "true", "false", "string", "int", "float", "bool", "date",
}

PRIMITIVES = ("string", "int", "float", "bool", "date")

ATTRIBUTE_CARDS = (CardinalityKind.ONE, CardinalityKind.SOME,
                   CardinalityKind.LONE)
REFERENCE_CARDS = tuple(CardinalityKind)


def _ident(rng: random.Random) -> str:
    while True:
        first = rng.choice(string.ascii_letters + "_")
        rest = "".join(rng.choices(string.ascii_letters + string.digits + "_",
                                   k=rng.randint(0, 8)))
        name = first + rest
        if name not in KEYWORDS:
            return name


def _literal(rng: random.Random) -> Literal:
    kind = rng.choice(list(LiteralKind))
    if kind is LiteralKind.STRING:
        body = "".join(rng.choices(string.ascii_letters + " ", k=rng.randint(0, 6)))
        return Literal(kind, f'"{body}"')
    if kind is LiteralKind.INT:
        return Literal(kind, str(rng.randint(-99, 999)))
    if kind is LiteralKind.FLOAT:
        return Literal(kind, f"{rng.randint(0, 99)}.{rng.randint(0, 99)}")
    if kind is LiteralKind.BOOL:
        return Literal(kind, rng.choice(["true", "false"]))
    return Literal(kind, _ident(rng))


def _attribute(rng: random.Random) -> Attribute:
    return Attribute(
        name=_ident(rng),
        cardinality=rng.choice(ATTRIBUTE_CARDS),
        type_name=rng.choice(PRIMITIVES + (_ident(rng),)),
        is_id=rng.random() < 0.2,
        default_value=_literal(rng) if rng.random() < 0.3 else None,
    )


def _reference(rng: random.Random) -> Reference:
    subset = None
    if rng.random() < 0.25:
        from dslgen.ast import SubsetClause
        subset = SubsetClause(owner_name=_ident(rng), feature_name=_ident(rng))
    return Reference(
        name=_ident(rng),
        cardinality=rng.choice(REFERENCE_CARDS),
        arrow=rng.choice(list(ArrowKind)),
        target_name=_ident(rng),
        subset_of=subset,
    )


def random_model(rng: random.Random) -> DslModel:
    """Structurally well-formed random AST; not necessarily semantically
    valid (names may dangle), which is all printing and parsing require."""
    elements = []
    for _ in range(rng.randint(0, 5)):
        if rng.random() < 0.25:
            elements.append(EnumDef(
                name=_ident(rng),
                literals=tuple(_ident(rng) for _ in range(rng.randint(1, 4))),
            ))
        else:
            features = tuple(
                _attribute(rng) if rng.random() < 0.6 else _reference(rng)
                for _ in range(rng.randint(0, 5))
            )
            elements.append(ConceptDef(
                name=_ident(rng),
                is_main=rng.random() < 0.3,
                extends_name=_ident(rng) if rng.random() < 0.3 else None,
                features=features,
            ))
    return DslModel(elements=tuple(elements))


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20260826)


@pytest.fixture(autouse=True)
def _fresh_replay():
    gateway.reset_replay()
    yield
    gateway.reset_replay()


@pytest.fixture
def replay_backend(tmp_path):
    """Write a replay fixture dict and return a BackendConfig for it."""
    import json

    from dslgen.gateway import BackendConfig, BackendKind

    def make(scripts: dict) -> BackendConfig:
        path = tmp_path / "replay.json"
        path.write_text(json.dumps(scripts), encoding="utf-8")
        return BackendConfig(kind=BackendKind.REPLAY, fixture_path=str(path))

    return make
