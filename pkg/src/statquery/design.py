"""Numeric design matrices for model specifications.

Encoding rules: first column is the all-ones intercept; a categorical
with k observed levels contributes k-1 treatment-coded indicators against
the lexicographically first level; interaction columns are elementwise
products of their parents' columns. Levels are the ones observed among
the rows actually used for the fit, so absent levels never produce
all-zero columns.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .data import CATEGORICAL, CONTINUOUS, Dataset, complete_cases
from .errors import InsufficientDataError, KindError
from .formula import ModelSpec, Term

INTERCEPT_NAME = "(Intercept)"


@dataclass(frozen=True)
class DesignMatrix:
    matrix: np.ndarray
    column_names: tuple[str, ...]
    term_spans: dict  # Term -> (start, stop) column range
    reference_levels: dict  # categorical name -> dropped level
    cat_levels: dict  # categorical name -> observed levels (sorted)
    continuous_vars: tuple[str, ...]

    @property
    def p(self) -> int:
        return self.matrix.shape[1]

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def variables(self) -> list[str]:
        return list(self.continuous_vars) + list(self.cat_levels)


def _term_column_parts(term: Term, cat_levels: dict):
    """Yield (label_parts, per-variable factors) for each column of a term.

    Each column of an interaction is identified by the non-reference level
    chosen for every categorical member; continuous members contribute to
    the label only.
    """
    level_choices = []
    for var in term.variables:
        if var in cat_levels:
            level_choices.append([(var, lv) for lv in cat_levels[var][1:]])
        else:
            level_choices.append([(var, None)])
    for combo in itertools.product(*level_choices):
        labels = [
            var if lv is None else f"{var}={lv}" for var, lv in combo
        ]
        yield ":".join(labels), combo


def build_design(spec: ModelSpec, dataset: Dataset):
    """Build the design matrix and response vector for spec on dataset.

    Rows are restricted to complete cases of the response and every
    predictor. Returns (DesignMatrix, y, row_index).
    """
    rows = complete_cases(dataset, spec.variables)
    n = len(rows)

    cat_levels = {}
    continuous = []
    for name in spec.variables[1:]:
        col = dataset.column(name)
        if col.kind == CATEGORICAL:
            observed = sorted({col.values[i] for i in rows})
            cat_levels[name] = tuple(observed)
        else:
            continuous.append(name)

    # raw per-variable columns over the used rows
    raw = {}
    for name in spec.variables[1:]:
        col = dataset.column(name)
        raw[name] = [col.values[i] for i in rows]

    columns = [np.ones(n)]
    names = [INTERCEPT_NAME]
    term_spans = {}
    for term in spec.terms:
        start = len(columns)
        for label, combo in _term_column_parts(term, cat_levels):
            col = np.ones(n)
            for var, lv in combo:
                if lv is None:
                    col = col * np.asarray(raw[var], dtype=float)
                else:
                    col = col * np.fromiter(
                        (1.0 if v == lv else 0.0 for v in raw[var]),
                        dtype=float,
                        count=n,
                    )
            columns.append(col)
            names.append(label)
        term_spans[term] = (start, len(columns))

    matrix = np.column_stack(columns) if columns else np.ones((n, 1))
    p = matrix.shape[1]
    if p >= n:
        raise InsufficientDataError(
            f"{n} usable rows cannot identify {p} coefficients"
        )

    response_col = dataset.column(spec.response)
    y = np.asarray([response_col.values[i] for i in rows], dtype=float)

    design = DesignMatrix(
        matrix=matrix,
        column_names=tuple(names),
        term_spans=term_spans,
        reference_levels={name: lv[0] for name, lv in cat_levels.items()},
        cat_levels=cat_levels,
        continuous_vars=tuple(continuous),
    )
    return design, y, tuple(rows)


def encode_settings(design: DesignMatrix, spec: ModelSpec, settings: dict) -> np.ndarray:
    """Encode one covariate setting as a design row.

    settings maps each predictor to a number (continuous), a level label
    (categorical), or a {level: weight} dict for averaged categoricals.
    Weighted settings produce the exact equally-weighted grid average
    because grid cells multiply independently across variables.
    """
    weights = {}
    for var in design.cat_levels:
        value = settings[var]
        if isinstance(value, dict):
            weights[var] = value
        else:
            if value not in design.cat_levels[var]:
                raise KindError(
                    f"{value!r} is not an observed level of {var!r}"
                )
            weights[var] = {value: 1.0}

    row = np.zeros(design.p)
    row[0] = 1.0
    for term in spec.terms:
        start, _stop = design.term_spans[term]
        for offset, (_label, combo) in enumerate(
            _term_column_parts(term, design.cat_levels)
        ):
            value = 1.0
            for var, lv in combo:
                if lv is None:
                    value *= float(settings[var])
                else:
                    value *= weights[var].get(lv, 0.0)
            row[start + offset] = value
    return row


def marginal_settings(design: DesignMatrix, dataset: Dataset, rows) -> dict:
    """Default covariate settings for marginal predictions.

    Continuous predictors sit at their mean over the fitted rows; each
    categorical is averaged with equal weight per observed level.
    """
    settings = {}
    for var in design.continuous_vars:
        col = dataset.column(var)
        settings[var] = float(
            np.mean([col.values[i] for i in rows])
        )
    for var, levels in design.cat_levels.items():
        settings[var] = {lv: 1.0 / len(levels) for lv in levels}
    return settings


def describe_settings(design: DesignMatrix, settings: dict) -> str:
    """Human-readable note of the covariate settings behind a contrast."""
    parts = []
    for var in design.continuous_vars:
        parts.append(f"{var} at mean {settings[var]:.6g}")
    for var in design.cat_levels:
        value = settings[var]
        if isinstance(value, dict) and len(value) > 1:
            parts.append(f"{var} averaged over levels")
        elif isinstance(value, dict):
            only = next(iter(value))
            parts.append(f"{var} = {only}")
        else:
            parts.append(f"{var} = {value}")
    return "; ".join(parts) if parts else "no covariates"
