"""Acceptance gate: one test per release criterion, each printing a
PASS/FAIL line (run with -s to see them). Tolerances are fixed here and
are not to be loosened.
"""

import json
import math
import subprocess
import sys
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pytest
from conftest import make_dataset, normal_equation_beta
from fastapi.testclient import TestClient
from scipy import integrate

from statquery.design import build_design
from statquery.engine import FamilySpec, fit_irls, fit_model, fit_ols
from statquery.flights import FLIGHT_SYNONYMS, flights_csv, flights_skewed_csv
from statquery.formula import GAMMA, GAUSSIAN, LOGNORMAL, parse_formula
from statquery.hops import draw_coefficients
from statquery.inference import pairwise_contrasts, slope_by_group
from statquery.server import create_app
from statquery.session import (
    GUIDANCE_SKEW_OFFER,
    REJECTION_MESSAGE,
    SessionStore,
    attach_dataset,
    handle_query,
)
from statquery.special import t_cdf, t_quantile

ROOT = Path(__file__).resolve().parent.parent


@contextmanager
def criterion(name):
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE FAIL: {name}")
        raise
    print(f"ACCEPTANCE PASS: {name}")


def random_gaussian_instance(rng):
    n = int(rng.integers(10, 51))
    p_pred = int(rng.integers(1, 5))
    X = rng.normal(size=(n, p_pred))
    beta_true = rng.normal(size=p_pred)
    y = 1.0 + X @ beta_true + rng.normal(size=n)
    cols = {f"x{j}": X[:, j] for j in range(p_pred)}
    ds = make_dataset(y=y, **cols)
    spec = parse_formula("y ~ " + " + ".join(cols))
    return ds, spec


def test_ols_oracle_equivalence():
    with criterion("OLS oracle equivalence (100 instances, rel err <= 1e-8, < 5 s)"):
        rng = np.random.default_rng(12345)
        start = time.monotonic()
        for _ in range(100):
            ds, spec = random_gaussian_instance(rng)
            model = fit_model(spec, ds)
            design, y, _ = build_design(spec, ds)
            oracle = normal_equation_beta(design.matrix, y)
            rel = np.max(np.abs(model.beta - oracle) / np.maximum(np.abs(oracle), 1e-12))
            assert rel <= 1e-8
        elapsed = time.monotonic() - start
        assert elapsed < 5.0, f"took {elapsed:.2f}s"


def test_residual_invariants():
    with criterion("Gaussian residual invariants (X'r = 0, sum(r) = 0)"):
        rng = np.random.default_rng(777)
        for _ in range(25):
            ds, spec = random_gaussian_instance(rng)
            model = fit_model(spec, ds)
            design, y, _ = build_design(spec, ds)
            norm_y = np.linalg.norm(y)
            assert np.max(np.abs(design.matrix.T @ model.residuals_raw)) <= 1e-8 * norm_y
            assert abs(float(np.sum(model.residuals_raw))) <= 1e-8 * norm_y


def test_irls_gaussian_delegation():
    with criterion("IRLS(gaussian) bit-identical to OLS (20 fixtures)"):
        rng = np.random.default_rng(2024)
        for _ in range(20):
            ds, spec = random_gaussian_instance(rng)
            design, y, rows = build_design(spec, ds)
            direct = fit_ols(design, y, spec, rows)
            delegated = fit_irls(design, y, FamilySpec(GAUSSIAN), spec, rows)
            assert np.array_equal(direct.beta, delegated.beta)
            assert np.array_equal(direct.cov_beta, delegated.cov_beta)
            assert np.array_equal(direct.fitted, delegated.fitted)
            assert np.array_equal(direct.residuals_raw, delegated.residuals_raw)
            assert direct.loglik == delegated.loglik
            assert direct.aic == delegated.aic


def test_gamma_intercept_only_mean():
    with criterion("Gamma intercept-only fitted mean = sample mean (1e-8)"):
        rng = np.random.default_rng(99)
        for _ in range(20):
            n = int(rng.integers(5, 40))
            y = rng.gamma(shape=2.0, scale=3.0, size=n) + 0.1
            ds = make_dataset(y=y)
            model = fit_model(parse_formula("y ~ 1", family=GAMMA), ds)
            sample_mean = float(np.mean(y))
            assert math.exp(model.beta[0]) == pytest.approx(sample_mean, rel=1e-8)
            assert model.fitted[0] == pytest.approx(sample_mean, rel=1e-8)


def _t_density(x, df):
    log_c = (
        math.lgamma((df + 1.0) / 2.0)
        - math.lgamma(df / 2.0)
        - 0.5 * math.log(df * math.pi)
    )
    return math.exp(log_c - 0.5 * (df + 1.0) * math.log(1.0 + x * x / df))


def _t_cdf_oracle(t, df):
    if t <= 0:
        val, _ = integrate.quad(_t_density, -math.inf, t, args=(df,))
        return val
    left, _ = integrate.quad(_t_density, -math.inf, 0.0, args=(df,))
    body, _ = integrate.quad(_t_density, 0.0, t, args=(df,))
    return left + body


def test_special_functions():
    with criterion("t CDF vs quadrature oracle (1e-8) and symmetry (1e-12)"):
        grid = np.arange(-10.0, 10.0 + 1e-9, 0.5)
        for df in (1.0, 2.0, 5.0, 10.0, 100.0):
            for t in grid:
                assert abs(t_cdf(float(t), df) - _t_cdf_oracle(float(t), df)) <= 1e-8
            for t in grid:
                assert abs(t_cdf(float(-t), df) - (1.0 - t_cdf(float(t), df))) <= 1e-12


def test_pairwise_contrast_oracle():
    with criterion("pairwise contrasts = pooled two-sample t oracle (1e-10)"):
        rng = np.random.default_rng(5150)
        for _ in range(10):
            n_per = int(rng.integers(4, 12))
            a = rng.normal(10.0, 2.0, n_per)
            b = rng.normal(12.0, 2.0, n_per)
            ds = make_dataset(
                y=np.concatenate([a, b]), g=["A"] * n_per + ["B"] * n_per
            )
            model = fit_model(parse_formula("y ~ g"), ds)
            row = pairwise_contrasts(model, "g", ds).rows[0]

            # hand-computed pooled two-sample t oracle
            mean_diff = float(np.mean(b) - np.mean(a))
            sp2 = (
                (n_per - 1) * float(np.var(a, ddof=1))
                + (n_per - 1) * float(np.var(b, ddof=1))
            ) / (2 * n_per - 2)
            se = math.sqrt(sp2 * (2.0 / n_per))
            t_stat = mean_diff / se
            from scipy import stats

            p = 2.0 * float(stats.t.sf(abs(t_stat), 2 * n_per - 2))

            assert abs(row.estimate - mean_diff) <= 1e-10 * max(1, abs(mean_diff))
            assert abs(row.se - se) <= 1e-10 * se
            assert abs(row.t_stat - t_stat) <= 1e-10 * abs(t_stat)
            assert abs(row.p_raw - p) <= 1e-10
            assert row.df == 2 * n_per - 2

        # Bonferroni exactness on a three-level fixture
        rng = np.random.default_rng(60)
        y = np.concatenate(
            [rng.normal(0, 1, 8), rng.normal(0.5, 1, 8), rng.normal(2, 1, 8)]
        )
        ds = make_dataset(y=y, g=["a"] * 8 + ["b"] * 8 + ["c"] * 8)
        model = fit_model(parse_formula("y ~ g"), ds)
        table = pairwise_contrasts(model, "g", ds)
        for row in table.rows:
            assert row.p_adj == min(1.0, 3 * row.p_raw)


def test_slope_by_group_power_fixture():
    with criterion(
        "slope fixture: interaction p < 0.01, business-class CI contains 0"
    ):
        from statquery.data import load_csv

        ds = load_csv(flights_csv(n=200, seed=314))
        comparison = slope_by_group(
            parse_formula("price ~ duration"), ds, "price", "duration", "class"
        )
        assert comparison.interaction.p_value < 0.01
        business = next(r for r in comparison.rows if r.level == "business")
        q = t_quantile(0.975, business.df)
        lo = business.slope - q * business.se
        hi = business.slope + q * business.se
        assert lo <= 0.0 <= hi
        economy = next(r for r in comparison.rows if r.level == "economy")
        assert economy.p_value < 0.01  # the economy slope is real


def test_family_comparison_on_lognormal_data():
    with criterion(
        "log-normal data: skewed family beats gaussian in >= 95/100 (< 30 s)"
    ):
        start = time.monotonic()
        wins = 0
        for trial in range(100):
            rng = np.random.default_rng(9000 + trial)
            x = rng.uniform(0.0, 2.0, 300)
            y = np.exp(0.8 + 0.6 * x + rng.normal(0.0, 0.6, 300))
            ds = make_dataset(y=y, x=x)
            spec = parse_formula("y ~ x")
            gauss = fit_model(spec, ds)
            gamma = fit_model(spec.with_family(GAMMA), ds)
            logn = fit_model(spec.with_family(LOGNORMAL), ds)
            if min(gamma.aic, logn.aic) < gauss.aic:
                wins += 1
        elapsed = time.monotonic() - start
        assert wins >= 95, f"only {wins}/100"
        assert elapsed < 30.0, f"took {elapsed:.2f}s"


def test_hops_draws():
    with criterion(
        "HOPs: 10k-draw mean within 4*sd/sqrt(B); same seed bit-identical"
    ):
        ds = make_dataset(y=[1.0, 2.0, 4.0], x=[0.0, 1.0, 2.0])
        model = fit_model(parse_formula("y ~ x"), ds)
        B = 10_000
        drawset = draw_coefficients(model, B, seed=424242)
        sd = np.sqrt(np.diag(model.cov_beta))
        bound = 4.0 * sd / math.sqrt(B)
        assert np.all(np.abs(drawset.draws.mean(axis=0) - model.beta) <= bound)
        again = draw_coefficients(model, B, seed=424242)
        assert np.array_equal(drawset.draws, again.draws)


GOLDEN_QUERIES = [
    ("Longer flight results in a more expensive ticket", "fit_model"),
    ("Include class as an additional variable.", "revise_model"),
    ("The residual patterns don’t look random.", "report_residual_pattern"),
    ("yes", "change_family"),
    (
        "Does flight duration affect price differently for economy and "
        "business class?",
        "test_slope_by_group",
    ),
]


def test_golden_transcript_cli_replay():
    with criterion("golden transcript replay (CLI, rule grammar): exit 0"):
        proc = subprocess.run(
            [
                sys.executable,
                "-m",
                "statquery.cli",
                "replay",
                str(ROOT / "fixtures" / "golden_transcript.tsv"),
                str(ROOT / "fixtures" / "flights.csv"),
                "--synonyms",
                str(ROOT / "fixtures" / "flight_synonyms.json"),
            ],
            capture_output=True,
            text=True,
            timeout=120,
            cwd=str(ROOT),
        )
        assert proc.returncode == 0, proc.stdout + proc.stderr
        assert "6/6 matched" in proc.stdout


def test_golden_transcript_session(tmp_path):
    with criterion(
        "golden workflow over HTTP: action sequence, skewed final family, "
        "verbatim rejection"
    ):
        store = SessionStore(str(tmp_path), synonyms=FLIGHT_SYNONYMS, default_seed=1)
        client = TestClient(create_app(store))
        session_id = client.post("/sessions").json()["session_id"]
        upload = client.post(
            f"/sessions/{session_id}/dataset",
            params={"name": "flights_skewed.csv"},
            content=flights_skewed_csv().encode("utf-8"),
        )
        assert upload.status_code == 200

        seen_actions = []
        for query, expected_type in GOLDEN_QUERIES:
            body = client.post(
                f"/sessions/{session_id}/query", json={"text": query}
            ).json()
            action = body["response"]["action"]
            seen_actions.append(action["type"])
            assert action["type"] == expected_type, (query, action)
            if expected_type == "report_residual_pattern":
                assert body["response"]["guidance"] == [GUIDANCE_SKEW_OFFER]

        model = client.get(f"/sessions/{session_id}/model").json()["model"]
        assert model["family"] in (GAMMA, LOGNORMAL)

        rejection = client.post(
            f"/sessions/{session_id}/query", json={"text": "blorp zomble"}
        ).json()
        assert rejection["response"]["text"] == REJECTION_MESSAGE
        assert seen_actions == [t for _, t in GOLDEN_QUERIES]


def test_persistence_round_trip(tmp_path):
    with criterion("persistence: transcript and refit results bit-for-bit"):
        store = SessionStore(str(tmp_path), synonyms=FLIGHT_SYNONYMS, default_seed=4)
        session = store.create()
        attach_dataset(session, flights_skewed_csv(), source_name="flights.csv")
        for query, _ in GOLDEN_QUERIES:
            handle_query(session, query)
        store.persist(session)

        restored = SessionStore(str(tmp_path), synonyms=FLIGHT_SYNONYMS).restore(
            session.id
        )
        original_transcript = json.dumps(
            [e.to_json() for e in session.transcript], sort_keys=True
        )
        restored_transcript = json.dumps(
            [e.to_json() for e in restored.transcript], sort_keys=True
        )
        assert original_transcript == restored_transcript
        assert len(restored.model_history) == len(session.model_history)
        for original, refit in zip(session.model_history, restored.model_history):
            assert np.array_equal(original.beta, refit.beta)
            assert np.array_equal(original.cov_beta, refit.cov_beta)
            assert np.array_equal(original.fitted, refit.fitted)
            assert np.array_equal(original.residuals_raw, refit.residuals_raw)
            assert original.loglik == refit.loglik
            assert original.aic == refit.aic
