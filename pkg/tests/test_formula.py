import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from statquery.data import load_csv
from statquery.errors import (
    DegenerateFactorError,
    FormulaSemanticError,
    FormulaSyntaxError,
    NonContinuousResponseError,
    UnknownVariableError,
)
from statquery.formula import (
    GAMMA,
    GAUSSIAN,
    ModelSpec,
    Term,
    add_term,
    parse_formula,
    print_formula,
    remove_term,
    validate_against,
)


def terms_of(spec):
    return [t.variables for t in spec.terms]


class TestParse:
    def test_simple(self):
        spec = parse_formula("price ~ duration")
        assert spec.response == "price"
        assert terms_of(spec) == [("duration",)]
        assert spec.family == GAUSSIAN

    def test_star_expansion(self):
        spec = parse_formula("price ~ duration * class")
        assert terms_of(spec) == [
            ("class",),
            ("duration",),
            ("class", "duration"),
        ]

    def test_duplicate_term_deduplicated(self):
        spec = parse_formula("y ~ x + x")
        assert terms_of(spec) == [("x",)]

    def test_colon_pulls_in_mains(self):
        spec = parse_formula("y ~ a:b")
        assert terms_of(spec) == [("a",), ("b",), ("a", "b")]

    def test_whitespace_insensitive(self):
        assert parse_formula("y~x+z") == parse_formula(" y ~ x + z ")

    def test_intercept_only(self):
        spec = parse_formula("y ~ 1")
        assert spec.terms == ()

    def test_three_way_star(self):
        spec = parse_formula("y ~ a*b*c")
        assert len(spec.terms) == 7  # 3 mains + 3 pairs + 1 triple

    def test_missing_tilde(self):
        with pytest.raises(FormulaSyntaxError):
            parse_formula("price duration")

    def test_empty_rhs(self):
        with pytest.raises(FormulaSyntaxError):
            parse_formula("price ~ ")

    def test_empty_text(self):
        with pytest.raises(FormulaSyntaxError):
            parse_formula("   ")

    def test_response_on_rhs(self):
        with pytest.raises(FormulaSemanticError):
            parse_formula("y ~ x + y")

    def test_double_tilde(self):
        with pytest.raises(FormulaSyntaxError):
            parse_formula("y ~ x ~ z")

    def test_dangling_plus(self):
        with pytest.raises(FormulaSyntaxError):
            parse_formula("y ~ x +")


class TestPrint:
    def test_simple(self):
        spec = ModelSpec(response="price", terms=(Term(("duration",)),))
        assert print_formula(spec) == "price ~ duration"

    def test_canonical_order(self):
        spec = parse_formula("price ~ duration*class")
        assert print_formula(spec) == "price ~ class + duration + class:duration"

    def test_intercept_only(self):
        spec = ModelSpec(response="y", terms=())
        assert print_formula(spec) == "y ~ 1"

    @given(
        response=st.sampled_from(["y", "price"]),
        predictors=st.sets(st.sampled_from(["a", "b", "c", "d"]), min_size=0, max_size=4),
        pairs=st.sets(
            st.tuples(st.sampled_from(["a", "b", "c"]), st.sampled_from(["b", "c", "d"])),
            max_size=3,
        ),
        family=st.sampled_from(["gaussian", "gamma", "lognormal"]),
    )
    @settings(max_examples=200)
    def test_round_trip(self, response, predictors, pairs, family):
        terms = [Term((p,)) for p in predictors]
        for a, b in pairs:
            if a != b:
                terms.append(Term((a, b)))
        spec = ModelSpec(response=response, terms=tuple(terms), family=family)
        back = parse_formula(print_formula(spec), family=family)
        assert back == spec


class TestHierarchyInvariant:
    @given(
        pairs=st.sets(
            st.tuples(st.sampled_from(["a", "b", "c"]), st.sampled_from(["b", "c", "d"])),
            min_size=1,
            max_size=4,
        )
    )
    @settings(max_examples=100)
    def test_interactions_imply_mains(self, pairs):
        terms = tuple(Term((a, b)) for a, b in pairs if a != b)
        if not terms:
            return
        spec = ModelSpec(response="y", terms=terms)
        present = set(spec.terms)
        for term in spec.terms:
            if term.order > 1:
                for name in term.variables:
                    assert Term((name,)) in present


class TestAddRemove:
    def test_add_class(self):
        spec = parse_formula("price ~ duration")
        out = add_term(spec, "class")
        assert print_formula(out) == "price ~ class + duration"

    def test_add_existing_is_noop(self):
        spec = parse_formula("price ~ duration")
        assert add_term(spec, "duration") == spec

    def test_add_to_intercept_only(self):
        spec = parse_formula("y ~ 1")
        assert print_formula(add_term(spec, "x")) == "y ~ x"

    def test_add_response_rejected(self):
        spec = parse_formula("price ~ duration")
        with pytest.raises(FormulaSemanticError):
            add_term(spec, "price")

    def test_add_preserves_family(self):
        spec = parse_formula("price ~ duration", family=GAMMA)
        assert add_term(spec, "class").family == GAMMA

    def test_remove_drops_interactions(self):
        spec = parse_formula("y ~ a*b")
        out = remove_term(spec, "a")
        assert terms_of(out) == [("b",)]


FIXTURE = load_csv(
    "price,duration,class\n"
    "100.5,2.25,economy\n"
    "420.0,6.5,business\n"
    "99.25,1.75,economy\n"
    "500.0,9.0,business\n"
)


class TestValidate:
    def test_ok(self):
        spec = parse_formula("price ~ duration")
        assert validate_against(spec, FIXTURE) is spec

    def test_unknown_variable(self):
        with pytest.raises(UnknownVariableError):
            validate_against(parse_formula("price ~ bogus"), FIXTURE)

    def test_unknown_response(self):
        with pytest.raises(UnknownVariableError):
            validate_against(parse_formula("bogus ~ duration"), FIXTURE)

    def test_categorical_response_rejected(self):
        with pytest.raises(NonContinuousResponseError):
            validate_against(parse_formula("class ~ duration"), FIXTURE)

    def test_single_level_factor_rejected(self):
        ds = load_csv(
            "price,class\n100.5,economy\n200.5,economy\n300.25,economy\n"
        )
        with pytest.raises(DegenerateFactorError):
            validate_against(parse_formula("price ~ class"), ds)

    def test_single_level_in_complete_cases_rejected(self):
        # class has two levels overall but only one among complete cases
        ds = load_csv(
            "price,duration,class\n"
            "100.5,NA,business\n"
            "200.5,2.5,economy\n"
            "300.25,3.5,economy\n"
        )
        with pytest.raises(DegenerateFactorError):
            validate_against(parse_formula("price ~ duration + class"), ds)
