"""Model-specification AST and the R-style formula text format.

Grammar:  response ~ term (+ term)*
          term = name | name:name[:name...] | name*name[*name...] | 1
'*' expands to all main effects and interactions of its factors; any
interaction written directly still pulls in its lower-order main effects
(hierarchy rule). '1' denotes the intercept, which is always included.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field, replace

from .data import CATEGORICAL, CONTINUOUS, Dataset, complete_cases
from .errors import (
    DegenerateFactorError,
    FormulaSemanticError,
    FormulaSyntaxError,
    NonContinuousResponseError,
)

GAUSSIAN = "gaussian"
GAMMA = "gamma"
LOGNORMAL = "lognormal"
FAMILIES = (GAUSSIAN, GAMMA, LOGNORMAL)


@dataclass(frozen=True, order=True)
class Term:
    """One model term: a main effect (one variable) or an interaction."""

    variables: tuple[str, ...]

    def __post_init__(self):
        if not self.variables:
            raise FormulaSemanticError("a term needs at least one variable")
        # canonical form: variables deduplicated and sorted
        canon = tuple(sorted(set(self.variables)))
        object.__setattr__(self, "variables", canon)

    @property
    def order(self) -> int:
        return len(self.variables)

    def label(self) -> str:
        return ":".join(self.variables)


def _sort_terms(terms) -> tuple[Term, ...]:
    # mains before interactions, each group lexicographic
    return tuple(sorted(set(terms), key=lambda t: (t.order, t.variables)))


def _with_hierarchy(terms) -> tuple[Term, ...]:
    closed = set(terms)
    for term in terms:
        if term.order > 1:
            for name in term.variables:
                closed.add(Term((name,)))
    return _sort_terms(closed)


@dataclass(frozen=True)
class ModelSpec:
    """A response, a deduplicated canonical term list, and a family tag."""

    response: str
    terms: tuple[Term, ...]
    family: str = GAUSSIAN
    intercept: bool = True

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise FormulaSemanticError(f"unknown family {self.family!r}")
        if not self.intercept:
            raise FormulaSemanticError("no-intercept models are unsupported")
        for term in self.terms:
            if self.response in term.variables:
                raise FormulaSemanticError(
                    f"response {self.response!r} cannot appear as a predictor"
                )
        object.__setattr__(self, "terms", _with_hierarchy(self.terms))

    @property
    def variables(self) -> list[str]:
        """Response plus all predictor variables, in appearance order."""
        seen = {self.response: None}
        for term in self.terms:
            for name in term.variables:
                seen.setdefault(name)
        return list(seen)

    def has_term(self, term: Term) -> bool:
        return term in self.terms

    def with_family(self, family: str) -> "ModelSpec":
        return replace(self, family=family)

    def to_json(self) -> dict:
        return {
            "response": self.response,
            "terms": [list(t.variables) for t in self.terms],
            "family": self.family,
        }

    @staticmethod
    def from_json(obj: dict) -> "ModelSpec":
        return ModelSpec(
            response=obj["response"],
            terms=tuple(Term(tuple(v)) for v in obj["terms"]),
            family=obj.get("family", GAUSSIAN),
        )


_NAME_RE = re.compile(r"^[^\s~+:*]+$")


def _check_name(token: str) -> str:
    if token == "1" or not _NAME_RE.match(token):
        raise FormulaSyntaxError(f"invalid variable name {token!r}")
    return token


def _parse_rhs_term(chunk: str) -> list[Term]:
    chunk = chunk.strip()
    if not chunk:
        raise FormulaSyntaxError("empty term on right-hand side")
    if chunk == "1":
        return []  # explicit intercept marker adds nothing
    if "*" in chunk and ":" in chunk:
        raise FormulaSyntaxError(f"mixing '*' and ':' in one term: {chunk!r}")
    if "*" in chunk:
        factors = [_check_name(p.strip()) for p in chunk.split("*")]
        terms = []
        for r in range(1, len(factors) + 1):
            for combo in itertools.combinations(dict.fromkeys(factors), r):
                terms.append(Term(tuple(combo)))
        return terms
    if ":" in chunk:
        factors = [_check_name(p.strip()) for p in chunk.split(":")]
        return [Term(tuple(factors))]
    return [Term((_check_name(chunk),))]


def parse_formula(text: str, family: str = GAUSSIAN) -> ModelSpec:
    """Parse formula text into a ModelSpec (family defaults to gaussian)."""
    if not text or not text.strip():
        raise FormulaSyntaxError("empty formula")
    if "~" not in text:
        raise FormulaSyntaxError(f"formula needs '~': {text!r}")
    lhs, _, rhs = text.partition("~")
    if "~" in rhs:
        raise FormulaSyntaxError("more than one '~' in formula")
    response = lhs.strip()
    if not response:
        raise FormulaSyntaxError("missing response before '~'")
    _check_name(response)
    if not rhs.strip():
        raise FormulaSyntaxError("empty right-hand side")

    terms: list[Term] = []
    for chunk in rhs.split("+"):
        terms.extend(_parse_rhs_term(chunk))
    for term in terms:
        if response in term.variables:
            raise FormulaSemanticError(
                f"response {response!r} repeated on the right-hand side"
            )
    return ModelSpec(response=response, terms=tuple(terms), family=family)


def print_formula(spec: ModelSpec) -> str:
    """Canonical text; parse_formula(print_formula(s)) == s up to family."""
    if not spec.terms:
        return f"{spec.response} ~ 1"
    rhs = " + ".join(t.label() for t in spec.terms)
    return f"{spec.response} ~ {rhs}"


def add_term(spec: ModelSpec, variable: str) -> ModelSpec:
    """Return spec with a main effect for variable (idempotent)."""
    if variable == spec.response:
        raise FormulaSemanticError(
            f"{variable!r} is the response and cannot be added as a predictor"
        )
    term = Term((variable,))
    if spec.has_term(term):
        return spec
    return replace(spec, terms=spec.terms + (term,))


def remove_term(spec: ModelSpec, variable: str) -> ModelSpec:
    """Return spec without variable anywhere (drops interactions using it)."""
    kept = tuple(t for t in spec.terms if variable not in t.variables)
    return replace(spec, terms=kept)


def validate_against(spec: ModelSpec, dataset: Dataset) -> ModelSpec:
    """Check that spec can be fit on dataset; returns spec unchanged.

    Raises UnknownVariableError, NonContinuousResponseError, or
    DegenerateFactorError (categorical predictor with fewer than two
    observed levels among complete cases).
    """
    for name in spec.variables:
        dataset.column(name)  # raises UnknownVariableError
    response_col = dataset.column(spec.response)
    if response_col.kind != CONTINUOUS:
        raise NonContinuousResponseError(
            f"response {spec.response!r} must be continuous, got {response_col.kind}"
        )
    rows = complete_cases(dataset, spec.variables)
    for name in spec.variables[1:]:
        col = dataset.column(name)
        if col.kind == CATEGORICAL:
            observed = {col.values[i] for i in rows}
            if len(observed) < 2:
                raise DegenerateFactorError(
                    f"categorical predictor {name!r} has fewer than two "
                    f"levels among complete cases"
                )
    return spec
