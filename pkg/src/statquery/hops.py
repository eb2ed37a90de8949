"""Hypothetical-outcome-plot draws.

Coefficient vectors are sampled from the fitted model's normal sampling
distribution N(beta, cov_beta) through a Cholesky factor and a seeded
PCG64 generator, so a (model, seed, B, grid) tuple always reproduces the
same draws bit for bit. Each draw can then be rendered as one predicted
curve over a covariate grid; the animation cycles through the curves.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .design import encode_settings, marginal_settings
from .engine import FittedModel
from .errors import CovarianceError, NotInModelError

RNG_ALGORITHM = "numpy-pcg64"
DEFAULT_DRAWS = 100
GRID_POINTS = 50


def _cholesky_factor(cov: np.ndarray) -> np.ndarray:
    if not np.any(cov):
        return np.zeros_like(cov)
    sym = 0.5 * (cov + cov.T)
    try:
        return np.linalg.cholesky(sym)
    except np.linalg.LinAlgError:
        pass
    bump = 1e-12 * float(np.trace(sym))
    try:
        return np.linalg.cholesky(sym + bump * np.eye(sym.shape[0]))
    except np.linalg.LinAlgError:
        raise CovarianceError(
            "coefficient covariance is not positive semidefinite"
        ) from None


@dataclass(frozen=True)
class HopsDrawSet:
    draws: np.ndarray  # B x p coefficient vectors
    seed: int
    algorithm: str
    model: FittedModel

    @property
    def n_draws(self) -> int:
        return int(self.draws.shape[0])

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "algorithm": self.algorithm,
            "n_draws": self.n_draws,
            "coefficients": self.draws.tolist(),
        }


def draw_coefficients(model: FittedModel, n_draws: int = DEFAULT_DRAWS, seed: int = 0) -> HopsDrawSet:
    """Sample n_draws coefficient vectors from N(beta, cov_beta)."""
    if n_draws < 1:
        raise ValueError("need at least one draw")
    factor = _cholesky_factor(np.asarray(model.cov_beta, dtype=float))
    rng = np.random.Generator(np.random.PCG64(seed))
    z = rng.standard_normal((n_draws, len(model.beta)))
    draws = model.beta + z @ factor.T
    return HopsDrawSet(draws=draws, seed=seed, algorithm=RNG_ALGORITHM, model=model)


@dataclass(frozen=True)
class PredictedCurves:
    focus_var: str
    grid: np.ndarray  # x values, length GRID_POINTS
    curves: np.ndarray  # B x GRID_POINTS response-scale predictions
    point_estimate: np.ndarray  # curve at the fitted coefficients
    seed: int
    algorithm: str

    def to_json(self) -> dict:
        return {
            "focus_var": self.focus_var,
            "seed": self.seed,
            "algorithm": self.algorithm,
            "grid": self.grid.tolist(),
            "curves": self.curves.tolist(),
            "point_estimate": self.point_estimate.tolist(),
        }


def predict_curves(
    drawset: HopsDrawSet,
    dataset: Dataset,
    focus_var: str,
    fixed: dict | None = None,
) -> PredictedCurves:
    """Evaluate every draw over a grid of focus_var values.

    Other covariates sit at the same marginal settings used for
    contrasts unless overridden via fixed; predictions are mapped to the
    response scale per the model family.
    """
    model = drawset.model
    design = model.design
    if focus_var not in design.continuous_vars:
        raise NotInModelError(
            f"{focus_var!r} is not a continuous predictor of the model"
        )
    col = dataset.column(focus_var)
    values = [col.values[i] for i in model.row_index]
    grid = np.linspace(min(values), max(values), GRID_POINTS)

    settings = marginal_settings(design, dataset, model.row_index)
    if fixed:
        settings.update(fixed)
    rows = np.empty((GRID_POINTS, design.p))
    for i, x in enumerate(grid):
        settings[focus_var] = float(x)
        rows[i] = encode_settings(design, model.spec, settings)

    def to_response(eta: np.ndarray) -> np.ndarray:
        from .formula import GAMMA, LOGNORMAL

        if model.spec.family == GAMMA:
            return np.exp(eta)
        if model.spec.family == LOGNORMAL:
            return np.exp(eta + 0.5 * model.sigma_or_dispersion**2)
        return eta

    curves = to_response(drawset.draws @ rows.T)
    point = to_response(rows @ model.beta)
    return PredictedCurves(
        focus_var=focus_var,
        grid=grid,
        curves=curves,
        point_estimate=point,
        seed=drawset.seed,
        algorithm=drawset.algorithm,
    )
