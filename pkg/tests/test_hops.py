import numpy as np
import pytest
from conftest import make_dataset

from statquery.engine import fit_model
from statquery.errors import CovarianceError, NotInModelError
from statquery.formula import GAMMA, parse_formula
from statquery.hops import HopsDrawSet, draw_coefficients, predict_curves


def simple_model():
    ds = make_dataset(y=[1.0, 2.0, 4.0], x=[0.0, 1.0, 2.0])
    return fit_model(parse_formula("y ~ x"), ds), ds


class TestDrawCoefficients:
    def test_same_seed_identical(self):
        model, _ = simple_model()
        a = draw_coefficients(model, 100, seed=42)
        b = draw_coefficients(model, 100, seed=42)
        assert np.array_equal(a.draws, b.draws)

    def test_different_seed_differs(self):
        model, _ = simple_model()
        a = draw_coefficients(model, 100, seed=42)
        b = draw_coefficients(model, 100, seed=43)
        assert not np.array_equal(a.draws, b.draws)

    def test_zero_covariance_returns_beta(self):
        ds = make_dataset(y=[2.0, 4.0, 6.0], x=[1.0, 2.0, 3.0])
        model = fit_model(parse_formula("y ~ x"), ds)  # exact fit, cov = 0
        draws = draw_coefficients(model, 25, seed=1)
        np.testing.assert_array_equal(
            draws.draws, np.tile(model.beta, (25, 1))
        )

    def test_mean_within_monte_carlo_bound(self):
        model, _ = simple_model()
        n = 10_000
        drawset = draw_coefficients(model, n, seed=7)
        sd = np.sqrt(np.diag(model.cov_beta))
        bound = 4.0 * sd / np.sqrt(n)
        mean = drawset.draws.mean(axis=0)
        assert np.all(np.abs(mean - model.beta) <= bound)

    def test_empirical_covariance_converges(self):
        model, _ = simple_model()
        n = 5_000
        drawset = draw_coefficients(model, n, seed=11)
        emp = np.cov(drawset.draws.T, ddof=1)
        err = np.linalg.norm(emp - model.cov_beta)
        assert err <= 5.0 * np.linalg.norm(model.cov_beta) / np.sqrt(n)

    def test_negative_covariance_rejected(self):
        model, _ = simple_model()
        bad = model.cov_beta.copy()
        bad[0, 0] = -1.0
        from dataclasses import replace

        broken = replace(model, cov_beta=bad)
        with pytest.raises(CovarianceError):
            draw_coefficients(broken, 10, seed=0)

    def test_records_seed_and_algorithm(self):
        model, _ = simple_model()
        drawset = draw_coefficients(model, 10, seed=5)
        assert drawset.seed == 5
        assert drawset.algorithm == "numpy-pcg64"
        payload = drawset.to_json()
        assert payload["seed"] == 5
        assert payload["n_draws"] == 10


class TestPredictCurves:
    def test_each_curve_is_its_drawn_line(self):
        ds = make_dataset(y=[1.0, 2.0, 3.0, 4.0], x=[0.0, 1.0, 2.0, 3.0])
        model = fit_model(parse_formula("y ~ x"), ds)
        drawset = draw_coefficients(model, 20, seed=3)
        curves = predict_curves(drawset, ds, "x")
        mid = curves.grid[25]
        for d in range(20):
            expected = drawset.draws[d, 0] + drawset.draws[d, 1] * mid
            assert curves.curves[d, 25] == pytest.approx(expected, rel=1e-12)

    def test_zero_variance_curves_equal_point_estimate(self):
        ds = make_dataset(y=[2.0, 4.0, 6.0], x=[1.0, 2.0, 3.0])
        model = fit_model(parse_formula("y ~ x"), ds)
        drawset = draw_coefficients(model, 5, seed=2)
        curves = predict_curves(drawset, ds, "x")
        for d in range(5):
            np.testing.assert_allclose(curves.curves[d], curves.point_estimate)

    def test_point_estimate_is_beta_curve(self):
        model, ds = simple_model()
        drawset = draw_coefficients(model, 3, seed=9)
        curves = predict_curves(drawset, ds, "x")
        expected = model.beta[0] + model.beta[1] * curves.grid
        np.testing.assert_allclose(curves.point_estimate, expected, rtol=1e-12)

    def test_grid_spans_observed_range(self):
        model, ds = simple_model()
        drawset = draw_coefficients(model, 2, seed=1)
        curves = predict_curves(drawset, ds, "x")
        assert curves.grid[0] == 0.0
        assert curves.grid[-1] == 2.0
        assert len(curves.grid) == 50

    def test_gamma_curves_on_response_scale(self):
        rng = np.random.default_rng(4)
        x = rng.uniform(0, 2, 60)
        y = rng.gamma(20.0, np.exp(1.0 + 0.5 * x) / 20.0)
        ds = make_dataset(y=y, x=x)
        model = fit_model(parse_formula("y ~ x", family=GAMMA), ds)
        drawset = draw_coefficients(model, 4, seed=6)
        curves = predict_curves(drawset, ds, "x")
        assert np.all(curves.curves > 0.0)
        eta = model.beta[0] + model.beta[1] * curves.grid
        np.testing.assert_allclose(curves.point_estimate, np.exp(eta), rtol=1e-12)

    def test_unknown_focus_var(self):
        model, ds = simple_model()
        drawset = draw_coefficients(model, 2, seed=1)
        with pytest.raises(NotInModelError):
            predict_curves(drawset, ds, "y")
