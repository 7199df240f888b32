import pytest

from dslgen.ast import ArrowKind, CardinalityKind, ConceptDef, EnumDef, LiteralKind
from dslgen.parser import parse

SHOP = ("main concept Shop { one name : string isId; "
        "flavors <>--> Flavor; } concept Flavor { one label : string; }")

# One fixture per construct promised by the generation rules.
CONSTRUCT_FIXTURES = {
    "main_concept": "main concept A {}",
    "concept": "concept A {}",
    "extends": "concept A {} concept B extends A {}",
    "enum": "enum Color { RED, GREEN, BLUE }",
    "card_one": "concept A { one x : int; }",
    "card_some": "concept A { some x : int; }",
    "card_lone": "concept A { lone x : int; }",
    "one_way_ref": "concept A { b --> B; }",
    "bidirectional_ref": "concept A { b <>--> B; }",
    "is_id": "concept A { one x : string isId; }",
    "subset_of": ("concept A { pets <>--> B; cats <>--> B "
                  "subset of A.pets; }"),
    "default_primitive": 'concept A { one x : string = "hi"; }',
    "default_enum": "concept A { one c : Color = RED; }",
    "default_numeric": "concept A { one n : int = 42; one f : float = 1.5; }",
    "default_bool": "concept A { one b : bool = true; }",
}


@pytest.mark.parametrize("name", sorted(CONSTRUCT_FIXTURES))
def test_construct_parses(name):
    result = parse(CONSTRUCT_FIXTURES[name])
    assert result.ok, result.diagnostics


def test_shop_flavor_structure():
    result = parse(SHOP)
    assert result.ok
    shop, flavor = result.model.elements
    assert shop.name == "Shop" and shop.is_main
    assert not flavor.is_main
    name_attr, flavors_ref = shop.features
    assert name_attr.is_id and name_attr.type_name == "string"
    assert name_attr.cardinality is CardinalityKind.ONE
    assert flavors_ref.arrow is ArrowKind.BIDIRECTIONAL
    assert flavors_ref.target_name == "Flavor"
    assert len(flavor.features) == 1


def test_empty_source_is_empty_model():
    result = parse("")
    assert result.ok
    assert result.model.elements == ()


def test_missing_semicolon_reports_e103():
    result = parse("concept A { one n : string }")
    assert not result.ok
    (diag,) = result.diagnostics
    assert diag.code == "E103"
    assert ";" in diag.expected
    # The offending token is the closing brace.
    assert (diag.span.line, diag.span.column) == (1, 28)


def test_unexpected_token_reports_expected_set():
    result = parse("concept A extends {}")
    (diag,) = result.diagnostics
    assert diag.code == "E101"
    assert "IDENT" in diag.expected
    assert diag.span.column == len("concept A extends ") + 1


def test_unexpected_eof_reports_e102():
    result = parse("concept A {")
    (diag,) = result.diagnostics
    assert diag.code == "E102"
    assert diag.expected


def test_diagnostic_span_extracts_offending_lexeme():
    source = "concept A { one n ! int; }"
    result = parse(source)
    (diag,) = result.diagnostics
    line = source.split("\n")[diag.span.line - 1]
    lexeme = line[diag.span.column - 1:diag.span.column - 1 + diag.span.length]
    assert lexeme == "!"


def test_cardinality_defaults():
    result = parse("concept A { x : int; r --> B; }")
    assert result.ok
    attr, ref = result.model.elements[0].features
    assert attr.cardinality is CardinalityKind.ONE
    assert ref.cardinality is CardinalityKind.MANY


def test_enum_literals_in_order():
    result = parse("enum Size { S, M, L, XL }")
    (enum,) = result.model.elements
    assert isinstance(enum, EnumDef)
    assert enum.literals == ("S", "M", "L", "XL")


def test_subset_clause_parsed():
    result = parse("concept A { cats <>--> B subset of A.pets; }")
    (ref,) = result.model.elements[0].features
    assert ref.subset_of.owner_name == "A"
    assert ref.subset_of.feature_name == "pets"


def test_default_literal_kinds():
    result = parse(
        'concept A { a : string = "x"; b : int = 1; c : float = 2.5; '
        "d : bool = false; e : Color = RED; }")
    kinds = [f.default_value.kind for f in result.model.elements[0].features]
    assert kinds == [LiteralKind.STRING, LiteralKind.INT, LiteralKind.FLOAT,
                     LiteralKind.BOOL, LiteralKind.ENUM_REF]


def test_keywords_not_usable_as_identifiers():
    assert not parse("concept enum {}").ok
    assert not parse("concept A { one concept : int; }").ok


def test_parse_is_deterministic():
    first = parse(SHOP)
    second = parse(SHOP)
    assert first.model == second.model
    bad = "concept A { one n : string }"
    assert parse(bad).diagnostics == parse(bad).diagnostics


def test_first_error_only():
    result = parse("concept A { one n : string } concept B { x y z }")
    assert len(result.diagnostics) == 1


def test_multiline_error_position():
    source = "concept A {\n    one n : string\n}\n"
    result = parse(source)
    (diag,) = result.diagnostics
    assert diag.code == "E103"
    assert (diag.span.line, diag.span.column) == (3, 1)
