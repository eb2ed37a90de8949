"""Deterministic model fitting.

Ordinary least squares is solved through a QR decomposition (never the
normal equations); non-Gaussian families run iteratively reweighted
least squares on top of the same weighted QR solve. Log-likelihoods are
always expressed on the original response scale so AIC values are
comparable across families.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .data import Dataset
from .design import DesignMatrix, build_design
from .errors import (
    ConvergenceError,
    FamilyDomainError,
    IncomparableModelsError,
    InsufficientDataError,
    RankDeficientError,
)
from .formula import GAMMA, GAUSSIAN, LOGNORMAL, ModelSpec

MAX_IRLS_ITERATIONS = 50
IRLS_REL_TOL = 1e-8
#: |skewness| above this raises the skew flag in diagnostics
SKEW_FLAG_THRESHOLD = 0.5

LN_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class FamilySpec:
    """Response distribution plus its link, keyed by the family tag."""

    tag: str

    def __post_init__(self):
        if self.tag not in (GAUSSIAN, GAMMA, LOGNORMAL):
            raise FamilyDomainError(f"unknown family {self.tag!r}")

    @property
    def link(self) -> str:
        if self.tag == GAUSSIAN:
            return "identity"
        if self.tag == GAMMA:
            return "log"
        return "identity-on-log-response"

    def check_response(self, y: np.ndarray) -> None:
        if self.tag in (GAMMA, LOGNORMAL) and np.any(y <= 0.0):
            raise FamilyDomainError(
                f"{self.tag} family requires strictly positive response values"
            )


@dataclass(frozen=True)
class FittedModel:
    spec: ModelSpec
    design: DesignMatrix
    beta: np.ndarray
    cov_beta: np.ndarray
    fitted: np.ndarray  # response-scale predictions
    residuals_raw: np.ndarray
    residuals_std: np.ndarray
    sigma_or_dispersion: float
    df_residual: int
    loglik: float
    aic: float
    n_used: int
    row_index: tuple
    y: np.ndarray
    n_iterations: int = 0
    degenerate: bool = False

    @property
    def family(self) -> str:
        return self.spec.family

    def linear_predictor(self, rows: np.ndarray) -> np.ndarray:
        return rows @ self.beta

    def predict_response(self, rows: np.ndarray) -> np.ndarray:
        """Map linear-predictor values for encoded rows to the response scale."""
        eta = rows @ self.beta
        if self.spec.family == GAMMA:
            return np.exp(eta)
        if self.spec.family == LOGNORMAL:
            return np.exp(eta + 0.5 * self.sigma_or_dispersion**2)
        return eta


def _qr_solve(X: np.ndarray, z: np.ndarray, column_names):
    """Least-squares solve through QR; returns (beta, rinv)."""
    q, r = np.linalg.qr(X)
    diag = np.abs(np.diag(r))
    tol = X.shape[0] * np.finfo(float).eps * (diag.max() if diag.size else 0.0)
    bad = np.nonzero(diag <= tol)[0]
    if bad.size:
        j = int(bad[0])
        name = column_names[j] if j < len(column_names) else f"column {j}"
        raise RankDeficientError(
            f"design matrix is rank deficient at column {name!r}", column=name
        )
    beta = np.linalg.solve(r, q.T @ z)
    rinv = np.linalg.solve(r, np.eye(r.shape[0]))
    return beta, rinv


def _gaussian_loglik(rss: float, n: int) -> float:
    """Gaussian log-likelihood at the MLE variance rss/n."""
    if rss <= 0.0:
        return math.inf
    sigma2 = rss / n
    return -0.5 * n * (LN_2PI + math.log(sigma2) + 1.0)


def fit_ols(X: DesignMatrix, y: np.ndarray, spec: ModelSpec, row_index) -> FittedModel:
    """Gaussian fit by QR least squares."""
    n, p = X.matrix.shape
    if n <= p:
        raise InsufficientDataError(f"need more than {p} rows, have {n}")
    beta, rinv = _qr_solve(X.matrix, y, X.column_names)
    fitted = X.matrix @ beta
    resid = y - fitted
    rss = float(resid @ resid)
    df_resid = n - p
    degenerate = rss <= n * np.finfo(float).eps ** 2 * max(1.0, float(y @ y))
    if degenerate:
        # exact fit: zero scale so downstream tests see se = 0, not noise
        sigma = 0.0
        cov_beta = np.zeros((p, p))
        resid_std = np.zeros_like(resid)
        loglik = math.inf
    else:
        sigma2 = rss / df_resid
        cov_beta = sigma2 * (rinv @ rinv.T)
        sigma = math.sqrt(sigma2)
        resid_std = resid / sigma
        loglik = _gaussian_loglik(rss, n)
    aic = -math.inf if math.isinf(loglik) else -2.0 * loglik + 2.0 * (p + 1)
    return FittedModel(
        spec=spec,
        design=X,
        beta=beta,
        cov_beta=cov_beta,
        fitted=fitted,
        residuals_raw=resid,
        residuals_std=resid_std,
        sigma_or_dispersion=sigma,
        df_residual=df_resid,
        loglik=loglik,
        aic=aic,
        n_used=n,
        row_index=tuple(row_index),
        y=np.asarray(y, dtype=float),
        degenerate=bool(degenerate),
    )


def _gamma_deviance(y: np.ndarray, mu: np.ndarray) -> np.ndarray:
    return 2.0 * (-np.log(y / mu) + (y - mu) / mu)


def _fit_gamma_log(X: DesignMatrix, y: np.ndarray, spec: ModelSpec, row_index) -> FittedModel:
    n, p = X.matrix.shape
    if n <= p:
        raise InsufficientDataError(f"need more than {p} rows, have {n}")
    mu = np.clip(y, np.max(y) * 1e-10, None)
    eta = np.log(mu)
    deviance = float(np.sum(_gamma_deviance(y, mu)))
    trace = []
    beta = rinv = None
    for iteration in range(1, MAX_IRLS_ITERATIONS + 1):
        # log link with gamma variance mu^2: unit working weights
        z = eta + (y - mu) / mu
        beta, rinv = _qr_solve(X.matrix, z, X.column_names)
        eta = X.matrix @ beta
        mu = np.exp(eta)
        new_deviance = float(np.sum(_gamma_deviance(y, mu)))
        trace.append(new_deviance)
        rel = abs(new_deviance - deviance) / (abs(deviance) + 1e-10)
        deviance = new_deviance
        if rel < IRLS_REL_TOL:
            break
    else:
        raise ConvergenceError(
            f"IRLS did not converge in {MAX_IRLS_ITERATIONS} iterations",
            trace=trace,
        )

    df_resid = n - p
    pearson = float(np.sum(((y - mu) / mu) ** 2))
    dispersion = pearson / df_resid
    cov_beta = dispersion * (rinv @ rinv.T)
    dev_terms = _gamma_deviance(y, mu)
    degenerate = deviance <= 0.0 or dispersion <= 0.0
    if degenerate:
        resid_std = np.zeros_like(y)
        loglik = math.inf
    else:
        resid_std = np.sign(y - mu) * np.sqrt(np.maximum(dev_terms, 0.0) / dispersion)
        shape = n / deviance  # deviance-based estimate, one scale parameter
        loglik = float(
            np.sum(
                shape * math.log(shape)
                - shape * np.log(mu)
                + (shape - 1.0) * np.log(y)
                - shape * y / mu
                - math.lgamma(shape)
            )
        )
    aic = -math.inf if math.isinf(loglik) else -2.0 * loglik + 2.0 * (p + 1)
    return FittedModel(
        spec=spec,
        design=X,
        beta=beta,
        cov_beta=cov_beta,
        fitted=mu,
        residuals_raw=y - mu,
        residuals_std=resid_std,
        sigma_or_dispersion=dispersion,
        df_residual=df_resid,
        loglik=loglik,
        aic=aic,
        n_used=n,
        row_index=tuple(row_index),
        y=np.asarray(y, dtype=float),
        n_iterations=iteration,
        degenerate=degenerate,
    )


def _fit_lognormal(X: DesignMatrix, y: np.ndarray, spec: ModelSpec, row_index) -> FittedModel:
    log_y = np.log(y)
    inner = fit_ols(X, log_y, spec, row_index)
    sigma = inner.sigma_or_dispersion
    fitted = np.exp(inner.fitted + 0.5 * sigma**2)
    # original-scale density carries the 1/y Jacobian of the log transform
    loglik = inner.loglik - float(np.sum(log_y))
    if math.isinf(inner.loglik):
        loglik = math.inf
    aic = -math.inf if math.isinf(loglik) else -2.0 * loglik + 2.0 * (X.p + 1)
    return replace(
        inner,
        fitted=fitted,
        residuals_raw=y - fitted,
        residuals_std=inner.residuals_std,
        loglik=loglik,
        aic=aic,
        y=np.asarray(y, dtype=float),
    )


def fit_irls(X: DesignMatrix, y: np.ndarray, family: FamilySpec, spec: ModelSpec, row_index) -> FittedModel:
    """Fit spec's family; the Gaussian path delegates to fit_ols exactly."""
    y = np.asarray(y, dtype=float)
    family.check_response(y)
    if family.tag == GAUSSIAN:
        return fit_ols(X, y, spec, row_index)
    if family.tag == GAMMA:
        return _fit_gamma_log(X, y, spec, row_index)
    return _fit_lognormal(X, y, spec, row_index)


def fit_model(spec: ModelSpec, dataset: Dataset) -> FittedModel:
    """Build the design for spec on dataset and fit its family."""
    design, y, rows = build_design(spec, dataset)
    return fit_irls(design, y, FamilySpec(spec.family), spec, rows)


@dataclass(frozen=True)
class DiagnosticSummary:
    fitted: tuple
    residuals: tuple
    row_index: tuple
    skewness: float | None
    skew_flag: bool
    note: str = ""

    def to_json(self) -> dict:
        return {
            "skewness": self.skewness,
            "skew_flag": self.skew_flag,
            "note": self.note,
        }


def residual_diagnostics(model: FittedModel) -> DiagnosticSummary:
    """Residuals paired with fitted values, plus a sample-skewness flag."""
    if model.n_used < 3:
        raise InsufficientDataError("skewness needs at least 3 residuals")
    r = np.asarray(model.residuals_std, dtype=float)
    centered = r - r.mean()
    m2 = float(np.mean(centered**2))
    if m2 <= 0.0:
        return DiagnosticSummary(
            fitted=tuple(model.fitted),
            residuals=tuple(r),
            row_index=model.row_index,
            skewness=None,
            skew_flag=False,
            note="residuals are constant; skewness undefined",
        )
    m3 = float(np.mean(centered**3))
    g1 = m3 / m2**1.5
    return DiagnosticSummary(
        fitted=tuple(model.fitted),
        residuals=tuple(r),
        row_index=model.row_index,
        skewness=g1,
        skew_flag=abs(g1) > SKEW_FLAG_THRESHOLD,
    )


@dataclass(frozen=True)
class ModelComparison:
    aic_a: float
    aic_b: float
    delta_aic: float  # aic(b) - aic(a)
    preferred: str  # "a" or "b"

    def to_json(self) -> dict:
        return {
            "aic_a": self.aic_a,
            "aic_b": self.aic_b,
            "delta_aic": self.delta_aic,
            "preferred": self.preferred,
        }


def compare_models(a: FittedModel, b: FittedModel) -> ModelComparison:
    """AIC comparison of two fits of the same response on the same rows."""
    if a.spec.response != b.spec.response:
        raise IncomparableModelsError(
            f"different responses: {a.spec.response!r} vs {b.spec.response!r}"
        )
    if a.row_index != b.row_index:
        raise IncomparableModelsError("models were fit on different row sets")
    delta = b.aic - a.aic
    return ModelComparison(
        aic_a=a.aic,
        aic_b=b.aic,
        delta_aic=delta,
        preferred="b" if b.aic < a.aic else "a",
    )
