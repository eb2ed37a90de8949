import math

import numpy as np
import pytest
from conftest import make_dataset
from scipy import stats

from statquery.engine import fit_model
from statquery.errors import KindError, NotInModelError
from statquery.formula import GAMMA, parse_formula
from statquery.inference import (
    coefficient_tests,
    model_summary,
    pairwise_contrasts,
    slope_by_group,
)


class TestCoefficientTests:
    def test_hand_computed_fixture(self):
        # x=[0,1,2], y=[1,2,4]: beta=(5/6,3/2), RSS=1/6, sigma2=1/6,
        # (X'X)^-1 diag = (5/6, 1/2) -> t0 = sqrt(5), t1 = sqrt(27)
        ds = make_dataset(y=[1.0, 2.0, 4.0], x=[0.0, 1.0, 2.0])
        model = fit_model(parse_formula("y ~ x"), ds)
        tests = coefficient_tests(model)
        assert tests[0].t_stat == pytest.approx(math.sqrt(5.0), rel=1e-10)
        assert tests[1].t_stat == pytest.approx(math.sqrt(27.0), rel=1e-10)
        assert tests[1].se == pytest.approx(math.sqrt(1.0 / 12.0), rel=1e-10)
        # two-sided p from the t distribution with df=1
        expected_p = 2.0 * stats.t.sf(math.sqrt(27.0), 1)
        assert tests[1].p_value == pytest.approx(expected_p, abs=1e-12)

    def test_exact_fit_zero_se(self):
        ds = make_dataset(y=[2.0, 4.0, 6.0], x=[1.0, 2.0, 3.0])
        model = fit_model(parse_formula("y ~ x"), ds)
        tests = coefficient_tests(model)
        slope = tests[1]
        assert slope.se == 0.0
        assert slope.p_value == 0.0
        assert slope.degenerate

    def test_zero_coefficient_p_one(self):
        # y symmetric in x: slope exactly 0
        ds = make_dataset(y=[1.0, 2.0, 1.0, 13.0], x=[-1.0, 0.0, 1.0, 0.0])
        model = fit_model(parse_formula("y ~ x"), ds)
        tests = coefficient_tests(model)
        assert tests[1].estimate == pytest.approx(0.0, abs=1e-12)
        assert tests[1].p_value == pytest.approx(1.0, abs=1e-10)


def one_way_dataset():
    return make_dataset(
        y=[1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
        g=["A", "A", "A", "B", "B", "B"],
    )


class TestPairwiseContrasts:
    def test_matches_pooled_t_test(self):
        ds = one_way_dataset()
        model = fit_model(parse_formula("y ~ g"), ds)
        table = pairwise_contrasts(model, "g", ds)
        assert len(table.rows) == 1
        row = table.rows[0]
        assert row.label == "B - A"
        assert row.estimate == pytest.approx(3.0, abs=1e-12)
        assert row.se == pytest.approx(math.sqrt(2.0 / 3.0), rel=1e-12)
        assert row.t_stat == pytest.approx(3.0 / math.sqrt(2.0 / 3.0), rel=1e-12)
        assert row.df == 4
        # pooled two-sample t oracle
        t_oracle, p_oracle = stats.ttest_ind([4.0, 5.0, 6.0], [1.0, 2.0, 3.0])
        assert row.t_stat == pytest.approx(t_oracle, rel=1e-10)
        assert row.p_raw == pytest.approx(p_oracle, abs=1e-10)
        # k=2: single contrast, no multiplicity penalty
        assert row.p_adj == row.p_raw

    def test_marginal_means_equal_group_means(self):
        ds = one_way_dataset()
        model = fit_model(parse_formula("y ~ g"), ds)
        table = pairwise_contrasts(model, "g", ds)
        assert table.marginal_means["A"] == pytest.approx(2.0, abs=1e-12)
        assert table.marginal_means["B"] == pytest.approx(5.0, abs=1e-12)

    def test_equal_means_p_one(self):
        ds = make_dataset(
            y=[1.0, 2.0, 3.0, 1.0, 2.0, 3.0],
            g=["A", "A", "A", "B", "B", "B"],
        )
        model = fit_model(parse_formula("y ~ g"), ds)
        row = pairwise_contrasts(model, "g", ds).rows[0]
        assert row.estimate == pytest.approx(0.0, abs=1e-12)
        assert row.p_raw == pytest.approx(1.0, abs=1e-10)

    def test_bonferroni_three_levels(self):
        rng = np.random.default_rng(2)
        y = np.concatenate(
            [rng.normal(0, 1, 10), rng.normal(1, 1, 10), rng.normal(3, 1, 10)]
        )
        g = ["a"] * 10 + ["b"] * 10 + ["c"] * 10
        ds = make_dataset(y=y, g=g)
        model = fit_model(parse_formula("y ~ g"), ds)
        table = pairwise_contrasts(model, "g", ds)
        assert len(table.rows) == 3
        assert table.adjustment == "bonferroni"
        for row in table.rows:
            assert row.p_adj == pytest.approx(min(1.0, 3 * row.p_raw), abs=1e-15)
            assert row.p_adj >= row.p_raw

    def test_antisymmetry(self):
        # reversing which level is "later" flips the sign but nothing else;
        # check via relabeled data
        ds = one_way_dataset()
        model = fit_model(parse_formula("y ~ g"), ds)
        row = pairwise_contrasts(model, "g", ds).rows[0]

        ds_flipped = make_dataset(
            y=[1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
            g=["Z", "Z", "Z", "B", "B", "B"],  # A renamed so it sorts later
        )
        model_f = fit_model(parse_formula("y ~ g"), ds_flipped)
        row_f = pairwise_contrasts(model_f, "g", ds_flipped).rows[0]
        assert row_f.label == "Z - B"
        assert row_f.estimate == pytest.approx(-row.estimate, abs=1e-12)
        assert row_f.se == pytest.approx(row.se, abs=1e-12)
        assert row_f.p_raw == pytest.approx(row.p_raw, abs=1e-12)

    def test_covariate_adjusted_contrast(self):
        # with a covariate, contrasts are evaluated at its mean; in a
        # parallel-slopes model the group difference is the coefficient
        rng = np.random.default_rng(8)
        x = rng.uniform(0, 10, 40)
        g = np.array(["A", "B"] * 20)
        y = 1.0 + 2.0 * x + (g == "B") * 5.0 + rng.normal(0, 0.5, 40)
        ds = make_dataset(y=y, x=x, g=list(g))
        model = fit_model(parse_formula("y ~ x + g"), ds)
        table = pairwise_contrasts(model, "g", ds)
        coef = {t.name: t for t in coefficient_tests(model)}
        assert table.rows[0].estimate == pytest.approx(
            coef["g=B"].estimate, abs=1e-10
        )
        assert "x at mean" in table.context_note

    def test_group_not_in_model(self):
        ds = make_dataset(
            y=[1.0, 2.0, 3.0, 4.0], x=[1.0, 2.0, 3.0, 4.0], g=["a", "b", "a", "b"]
        )
        model = fit_model(parse_formula("y ~ x"), ds)
        with pytest.raises(NotInModelError):
            pairwise_contrasts(model, "g", ds)

    def test_continuous_group_rejected(self):
        ds = make_dataset(y=[1.0, 2.0, 3.0, 4.0], x=[1.0, 2.0, 3.0, 4.0])
        model = fit_model(parse_formula("y ~ x"), ds)
        with pytest.raises(KindError):
            pairwise_contrasts(model, "x", ds)


def slope_fixture(n=200, *, econ_slope=5.0, bus_slope=0.0, sigma=20.0, seed=314):
    rng = np.random.default_rng(seed)
    duration = rng.uniform(1.0, 16.0, n)
    klass = np.where(rng.random(n) < 0.5, "economy", "business")
    price = np.where(
        klass == "economy",
        200.0 + econ_slope * duration,
        450.0 + bus_slope * duration,
    ) + rng.normal(0.0, sigma, n)
    return make_dataset(price=price, duration=duration, klass=list(klass))


class TestSlopeByGroup:
    def test_noise_free_equal_slopes(self):
        x = np.arange(1.0, 9.0)
        g = ["a", "b"] * 4
        y = 2.0 + 3.0 * x + np.where(np.array(g) == "b", 10.0, 0.0)
        ds = make_dataset(y=y, x=x, g=g)
        cmp = slope_by_group(parse_formula("y ~ x"), ds, "y", "x", "g")
        slopes = {r.level: r.slope for r in cmp.rows}
        assert slopes["a"] == pytest.approx(3.0, abs=1e-9)
        assert slopes["b"] == pytest.approx(3.0, abs=1e-9)
        assert cmp.interaction.statistic == pytest.approx(0.0, abs=1e-6)

    def test_flight_fixture_detects_interaction(self):
        ds = slope_fixture()
        model = fit_model(parse_formula("price ~ duration + klass"), ds)
        cmp = slope_by_group(model, ds, "price", "duration", "klass")
        assert cmp.refitted
        assert cmp.interaction.p_value < 0.01
        slopes = {r.level: r for r in cmp.rows}
        assert slopes["economy"].slope == pytest.approx(5.0, abs=1.5)
        # business-class slope is consistent with zero
        assert slopes["business"].p_value > 0.05

    def test_reuses_model_with_interaction(self):
        ds = slope_fixture(seed=7)
        model = fit_model(parse_formula("price ~ duration*klass"), ds)
        cmp = slope_by_group(model, ds, "price", "duration", "klass")
        assert not cmp.refitted
        assert cmp.model is model

    def test_two_groups_f_equals_t_squared(self):
        ds = slope_fixture(seed=99, econ_slope=3.0, bus_slope=2.0)
        cmp = slope_by_group(
            parse_formula("price ~ duration"), ds, "price", "duration", "klass"
        )
        assert cmp.interaction.kind == "t"
        t = cmp.interaction.statistic
        # independent F computation from the two nested fits
        full = fit_model(parse_formula("price ~ duration*klass"), ds)
        reduced = fit_model(parse_formula("price ~ duration + klass"), ds)
        rss_f = float(full.residuals_raw @ full.residuals_raw)
        rss_r = float(reduced.residuals_raw @ reduced.residuals_raw)
        f_stat = (rss_r - rss_f) / (rss_f / full.df_residual)
        assert t * t == pytest.approx(f_stat, rel=1e-10)
        p_f = stats.f.sf(f_stat, 1, full.df_residual)
        assert cmp.interaction.p_value == pytest.approx(p_f, abs=1e-10)

    def test_slopes_match_coefficients(self):
        ds = slope_fixture(seed=21)
        cmp = slope_by_group(
            parse_formula("price ~ duration"), ds, "price", "duration", "klass"
        )
        coef = {t.name: t.estimate for t in coefficient_tests(cmp.model)}
        slopes = {r.level: r.slope for r in cmp.rows}
        # business is the reference level (lexicographically first)
        assert slopes["business"] == pytest.approx(coef["duration"], abs=1e-10)
        assert slopes["economy"] == pytest.approx(
            coef["duration"] + coef["duration:klass=economy"], abs=1e-10
        )

    def test_three_level_group_uses_f(self):
        rng = np.random.default_rng(17)
        n = 90
        x = rng.uniform(0, 5, n)
        g = np.array(["a", "b", "c"] * 30)
        slope = {"a": 1.0, "b": 2.0, "c": 3.0}
        y = np.array([slope[gi] for gi in g]) * x + rng.normal(0, 0.4, n)
        ds = make_dataset(y=y, x=x, g=list(g))
        cmp = slope_by_group(parse_formula("y ~ x"), ds, "y", "x", "g")
        assert cmp.interaction.kind == "F"
        assert cmp.interaction.df1 == 2
        assert cmp.interaction.p_value < 0.001

    def test_gamma_family_slope_on_link_scale(self):
        rng = np.random.default_rng(31)
        n = 150
        x = rng.uniform(0, 2, n)
        g = np.array(["a", "b"] * 75)
        eta = 1.0 + np.where(g == "a", 0.8, 0.2) * x
        y = rng.gamma(30.0, np.exp(eta) / 30.0)
        ds = make_dataset(y=y, x=x, g=list(g))
        cmp = slope_by_group(
            parse_formula("y ~ x", family=GAMMA), ds, "y", "x", "g"
        )
        slopes = {r.level: r.slope for r in cmp.rows}
        assert slopes["a"] == pytest.approx(0.8, abs=0.15)
        assert slopes["b"] == pytest.approx(0.2, abs=0.15)
        assert cmp.model.spec.family == GAMMA

    def test_wrong_kinds_rejected(self):
        ds = slope_fixture(seed=1)
        with pytest.raises(KindError):
            slope_by_group(
                parse_formula("price ~ duration"), ds, "price", "klass", "duration"
            )


class TestModelSummary:
    def test_summary_fields(self):
        ds = make_dataset(y=[1.0, 2.0, 4.0, 4.5], x=[0.0, 1.0, 2.0, 3.0])
        model = fit_model(parse_formula("y ~ x"), ds)
        summary = model_summary(model)
        assert summary["formula"] == "y ~ x"
        assert summary["family"] == "gaussian"
        assert [c["name"] for c in summary["coefficients"]] == ["(Intercept)", "x"]
        assert summary["n_used"] == 4
        assert summary["df_residual"] == 2
