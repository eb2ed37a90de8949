"""Natural-language statistical modeling workbench.

Queries are routed onto a closed task registry and translated into
model specifications and hypothesis tests; all fitting, diagnostics,
and inference run in the deterministic engine; payloads feed linked
interactive charts.
"""

from .data import Dataset, complete_cases, infer_kind, load_csv, to_csv
from .engine import (
    FamilySpec,
    FittedModel,
    compare_models,
    fit_irls,
    fit_model,
    fit_ols,
    residual_diagnostics,
)
from .formula import (
    ModelSpec,
    Term,
    add_term,
    parse_formula,
    print_formula,
    validate_against,
)
from .hops import draw_coefficients, predict_curves
from .inference import (
    coefficient_tests,
    model_summary,
    pairwise_contrasts,
    slope_by_group,
)
from .intent import TranslationResult, resolve_variable, route, rule_grammar_parse
from .session import (
    GUIDANCE_AFTER_FIT,
    GUIDANCE_SKEW_OFFER,
    REJECTION_MESSAGE,
    Session,
    SessionStore,
    attach_dataset,
    chart_data,
    handle_query,
    model_views,
    new_session,
)
from .special import betainc, f_cdf, t_cdf

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "FamilySpec",
    "FittedModel",
    "GUIDANCE_AFTER_FIT",
    "GUIDANCE_SKEW_OFFER",
    "ModelSpec",
    "REJECTION_MESSAGE",
    "Session",
    "SessionStore",
    "Term",
    "TranslationResult",
    "add_term",
    "attach_dataset",
    "betainc",
    "chart_data",
    "coefficient_tests",
    "compare_models",
    "complete_cases",
    "draw_coefficients",
    "f_cdf",
    "fit_irls",
    "fit_model",
    "fit_ols",
    "handle_query",
    "infer_kind",
    "load_csv",
    "model_summary",
    "model_views",
    "new_session",
    "pairwise_contrasts",
    "parse_formula",
    "predict_curves",
    "print_formula",
    "residual_diagnostics",
    "resolve_variable",
    "route",
    "rule_grammar_parse",
    "slope_by_group",
    "t_cdf",
    "to_csv",
    "validate_against",
]
