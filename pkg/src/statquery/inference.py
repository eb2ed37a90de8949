"""Hypothesis tests over fitted models.

Pairwise contrasts compare model-based marginal means of a categorical
predictor (continuous covariates at their means, other categoricals
averaged with equal weight per level) with Bonferroni adjustment.
Slope-by-group comparisons refit with the needed interaction when the
active model lacks it, and test all interaction columns jointly.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .data import CATEGORICAL, CONTINUOUS, Dataset
from .design import encode_settings, marginal_settings
from .engine import FittedModel, fit_model
from .errors import DegenerateFactorError, KindError, NotInModelError
from .formula import GAUSSIAN, ModelSpec, Term, add_term
from .special import f_cdf, t_two_sided_p

BONFERRONI = "bonferroni"
NO_ADJUSTMENT = "none"


def _effectively_zero(value: float, model: FittedModel) -> bool:
    scale = max(1.0, float(np.max(np.abs(model.beta))))
    return abs(value) <= 1e-10 * scale


@dataclass(frozen=True)
class CoefficientTest:
    name: str
    estimate: float
    se: float
    t_stat: float | None
    p_value: float
    degenerate: bool = False

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "estimate": self.estimate,
            "se": self.se,
            "t": self.t_stat,
            "p": self.p_value,
            "degenerate": self.degenerate,
        }


def coefficient_tests(model: FittedModel) -> list[CoefficientTest]:
    """Per-coefficient t tests against zero with df = df_residual."""
    out = []
    diag = np.diag(model.cov_beta)
    for j, name in enumerate(model.design.column_names):
        beta_j = float(model.beta[j])
        se = math.sqrt(max(float(diag[j]), 0.0))
        if se == 0.0:
            # exact fit: the point estimate is the whole story
            p = 1.0 if _effectively_zero(beta_j, model) else 0.0
            out.append(
                CoefficientTest(
                    name=name,
                    estimate=beta_j,
                    se=0.0,
                    t_stat=None,
                    p_value=p,
                    degenerate=True,
                )
            )
            continue
        t = beta_j / se
        p = t_two_sided_p(t, model.df_residual) if t != 0.0 else 1.0
        out.append(
            CoefficientTest(name=name, estimate=beta_j, se=se, t_stat=t, p_value=p)
        )
    return out


@dataclass(frozen=True)
class ContrastRow:
    label: str
    estimate: float
    se: float
    t_stat: float | None
    df: float
    p_raw: float
    p_adj: float
    degenerate: bool = False

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "estimate": self.estimate,
            "se": self.se,
            "t": self.t_stat,
            "df": self.df,
            "p_raw": self.p_raw,
            "p_adj": self.p_adj,
        }


@dataclass(frozen=True)
class ContrastTable:
    group: str
    rows: tuple[ContrastRow, ...]
    adjustment: str
    context_note: str
    marginal_means: dict  # level -> model-based marginal mean

    def to_json(self) -> dict:
        return {
            "group": self.group,
            "adjustment": self.adjustment,
            "context_note": self.context_note,
            "marginal_means": self.marginal_means,
            "rows": [r.to_json() for r in self.rows],
        }


def _contrast_from_vector(model: FittedModel, c: np.ndarray, label: str, m: int) -> ContrastRow:
    est = float(c @ model.beta)
    var = float(c @ model.cov_beta @ c)
    se = math.sqrt(max(var, 0.0))
    if se == 0.0:
        p_raw = 1.0 if _effectively_zero(est, model) else 0.0
        return ContrastRow(
            label=label,
            estimate=est,
            se=0.0,
            t_stat=None,
            df=model.df_residual,
            p_raw=p_raw,
            p_adj=min(1.0, m * p_raw),
            degenerate=True,
        )
    t = est / se
    p_raw = t_two_sided_p(t, model.df_residual) if t != 0.0 else 1.0
    return ContrastRow(
        label=label,
        estimate=est,
        se=se,
        t_stat=t,
        df=model.df_residual,
        p_raw=p_raw,
        p_adj=min(1.0, m * p_raw),
    )


def pairwise_contrasts(model: FittedModel, group: str, dataset: Dataset) -> ContrastTable:
    """All level-pair differences of the marginal means for group.

    Estimates are on the linear-predictor scale; each pair is labeled
    "later - earlier" in lexicographic level order.
    """
    if not model.spec.has_term(Term((group,))):
        raise NotInModelError(f"{group!r} is not a main effect of the model")
    if group not in model.design.cat_levels:
        raise KindError(f"{group!r} must be categorical for pairwise contrasts")

    levels = model.design.cat_levels[group]
    base = marginal_settings(model.design, dataset, model.row_index)
    vectors = {}
    for level in levels:
        settings = dict(base)
        settings[group] = level
        vectors[level] = encode_settings(model.design, model.spec, settings)

    means = {lv: float(vectors[lv] @ model.beta) for lv in levels}
    m = len(levels) * (len(levels) - 1) // 2
    rows = []
    for earlier, later in itertools.combinations(levels, 2):
        c = vectors[later] - vectors[earlier]
        rows.append(
            _contrast_from_vector(model, c, f"{later} - {earlier}", m)
        )

    parts = []
    for var in model.design.continuous_vars:
        parts.append(f"{var} at mean {base[var]:.6g}")
    for var in model.design.cat_levels:
        if var != group:
            parts.append(f"{var} averaged over levels")
    note = "; ".join(parts) if parts else "no other covariates"

    return ContrastTable(
        group=group,
        rows=tuple(rows),
        adjustment=BONFERRONI if m > 1 else NO_ADJUSTMENT,
        context_note=note,
        marginal_means=means,
    )


@dataclass(frozen=True)
class SlopeRow:
    level: str
    slope: float
    se: float
    t_stat: float | None
    df: float
    p_value: float

    def to_json(self) -> dict:
        return {
            "level": self.level,
            "slope": self.slope,
            "se": self.se,
            "t": self.t_stat,
            "df": self.df,
            "p": self.p_value,
        }


@dataclass(frozen=True)
class InteractionTest:
    kind: str  # "t" for a single interaction column, else "F"
    statistic: float
    df1: int
    df2: float
    p_value: float

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "statistic": self.statistic,
            "df1": self.df1,
            "df2": self.df2,
            "p": self.p_value,
        }


@dataclass(frozen=True)
class SlopeComparison:
    response: str
    slope_var: str
    group: str
    rows: tuple[SlopeRow, ...]
    interaction: InteractionTest
    model: FittedModel  # the fit the comparison was computed on
    refitted: bool  # True when the interaction had to be added

    def to_json(self) -> dict:
        return {
            "response": self.response,
            "slope_var": self.slope_var,
            "group": self.group,
            "refitted": self.refitted,
            "rows": [r.to_json() for r in self.rows],
            "interaction": self.interaction.to_json(),
        }


def _interaction_f_test(full: FittedModel, reduced: FittedModel, q: int) -> tuple[float, float]:
    """F statistic and p for dropping q columns, valid across families.

    Uses the variance-scaled fit criterion (residual sum of squares for
    Gaussian fits, deviance otherwise) with the full model's dispersion.
    """
    if full.spec.family == GAUSSIAN:
        rss_full = float(full.residuals_raw @ full.residuals_raw)
        rss_red = float(reduced.residuals_raw @ reduced.residuals_raw)
        scale = rss_full / full.df_residual
    else:
        # deviance-based analysis for IRLS fits
        rss_full = _deviance_of(full)
        rss_red = _deviance_of(reduced)
        scale = full.sigma_or_dispersion
    if scale <= 0.0:
        # exact fit: no evidence against the reduced model unless it is
        # measurably worse
        if rss_red - rss_full <= 1e-12 * max(1.0, rss_red):
            return 0.0, 1.0
        return math.inf, 0.0
    f_stat = (rss_red - rss_full) / q / scale
    f_stat = max(f_stat, 0.0)
    p = 1.0 - f_cdf(f_stat, q, full.df_residual)
    return f_stat, p


def _deviance_of(model: FittedModel) -> float:
    from .formula import GAMMA, LOGNORMAL

    y = model.y
    if model.spec.family == GAMMA:
        mu = model.fitted
        return float(np.sum(2.0 * (-np.log(y / mu) + (y - mu) / mu)))
    if model.spec.family == LOGNORMAL:
        # log-scale residual sum of squares
        eta = np.log(model.fitted) - 0.5 * model.sigma_or_dispersion**2
        r = np.log(y) - eta
        return float(r @ r)
    r = model.residuals_raw
    return float(r @ r)


def slope_by_group(
    model_or_spec,
    dataset: Dataset,
    response: str,
    slope_var: str,
    group: str,
) -> SlopeComparison:
    """Compare the slope of slope_var between levels of group.

    Accepts the active FittedModel (or a bare ModelSpec); if the needed
    slope_var:group interaction is absent, the model is refit with it
    added. Slopes are per-level derivatives of the linear predictor.
    """
    if dataset.column(slope_var).kind != CONTINUOUS:
        raise KindError(f"slope variable {slope_var!r} must be continuous")
    if dataset.column(group).kind != CATEGORICAL:
        raise KindError(f"group {group!r} must be categorical")

    if isinstance(model_or_spec, FittedModel):
        spec = model_or_spec.spec
        active = model_or_spec
    else:
        spec = model_or_spec
        active = None
    if spec.response != response:
        spec = ModelSpec(response=response, terms=(), family=spec.family)
        active = None

    interaction = Term((slope_var, group))
    refitted = False
    if not spec.has_term(interaction):
        spec = ModelSpec(
            response=spec.response,
            terms=spec.terms + (interaction,),
            family=spec.family,
        )
        active = None
        refitted = True
    model = active if active is not None else fit_model(spec, dataset)

    levels = model.design.cat_levels[group]
    if len(levels) < 2:
        raise DegenerateFactorError(f"group {group!r} has fewer than two levels")

    base = marginal_settings(model.design, dataset, model.row_index)
    x0 = base[slope_var]
    rows = []
    for level in levels:
        lo = dict(base, **{slope_var: x0, group: level})
        hi = dict(base, **{slope_var: x0 + 1.0, group: level})
        # the linear predictor is linear in slope_var, so a unit step is
        # exactly the derivative
        c = encode_settings(model.design, model.spec, hi) - encode_settings(
            model.design, model.spec, lo
        )
        est = float(c @ model.beta)
        var = float(c @ model.cov_beta @ c)
        se = math.sqrt(max(var, 0.0))
        if se == 0.0:
            zero = _effectively_zero(est, model)
            rows.append(
                SlopeRow(level=level, slope=est, se=0.0, t_stat=None,
                         df=model.df_residual, p_value=1.0 if zero else 0.0)
            )
        else:
            t = est / se
            rows.append(
                SlopeRow(
                    level=level,
                    slope=est,
                    se=se,
                    t_stat=t,
                    df=model.df_residual,
                    p_value=t_two_sided_p(t, model.df_residual),
                )
            )

    reduced_spec = ModelSpec(
        response=spec.response,
        terms=tuple(t for t in spec.terms if t != interaction),
        family=spec.family,
    )
    reduced = fit_model(reduced_spec, dataset)
    start, stop = model.design.term_spans[interaction]
    q = stop - start
    f_stat, p_f = _interaction_f_test(model, reduced, q)
    if q == 1:
        # single column: report the signed t, identical p to the F test
        j = start
        beta_j = float(model.beta[j])
        se_j = math.sqrt(max(float(model.cov_beta[j, j]), 0.0))
        if se_j > 0.0:
            t_j = beta_j / se_j
            interaction_test = InteractionTest(
                kind="t",
                statistic=t_j,
                df1=1,
                df2=model.df_residual,
                p_value=t_two_sided_p(t_j, model.df_residual),
            )
        else:
            zero = _effectively_zero(beta_j, model)
            interaction_test = InteractionTest(
                kind="t",
                statistic=0.0 if zero else math.inf,
                df1=1,
                df2=model.df_residual,
                p_value=1.0 if zero else 0.0,
            )
    else:
        interaction_test = InteractionTest(
            kind="F", statistic=f_stat, df1=q,
            df2=model.df_residual, p_value=p_f,
        )

    return SlopeComparison(
        response=response,
        slope_var=slope_var,
        group=group,
        rows=tuple(rows),
        interaction=interaction_test,
        model=model,
        refitted=refitted,
    )


def model_summary(model: FittedModel) -> dict:
    """JSON summary: coefficient table plus fit statistics."""
    from .formula import print_formula

    return {
        "formula": print_formula(model.spec),
        "family": model.spec.family,
        "coefficients": [t.to_json() for t in coefficient_tests(model)],
        "n_used": model.n_used,
        "df_residual": model.df_residual,
        "sigma_or_dispersion": model.sigma_or_dispersion,
        "loglik": model.loglik,
        "aic": model.aic,
        "degenerate": model.degenerate,
    }
