"""Tests for the contaminated-model Monte Carlo harness."""

import json
import math

import numpy as np
import pytest

from mindiv import (
    ContaminationModel,
    EstimatorSpec,
    InvalidInputError,
    pool_results,
    report,
    run_study,
    sample_contaminated,
)
from mindiv.simulation import _replication_rng


def model(eps=0.1, contaminant="cauchy", sigma=1.0):
    return ContaminationModel(base_sigma=sigma, epsilon=eps, contaminant=contaminant)


class TestContaminationModel:
    def test_epsilon_open_interval(self):
        for bad in (0.0, 0.5, 0.6, -0.1):
            with pytest.raises(InvalidInputError):
                model(eps=bad)
        model(eps=0.499)

    def test_contaminant_names(self):
        with pytest.raises(InvalidInputError):
            model(contaminant="uniform")


class TestSampleContaminated:
    def test_determinism(self):
        rng1 = np.random.default_rng(42)
        rng2 = np.random.default_rng(42)
        a = sample_contaminated(model(), 1000, rng1)
        b = sample_contaminated(model(), 1000, rng2)
        assert np.array_equal(a, b)

    def test_contaminant_fraction_band(self):
        # tail proxy: base mass above 5 sigma is negligible, the wide normal
        # contaminant puts P(|Z| > 0.5) = 0.6171 there
        eps, n = 0.05, 100_000
        xs = sample_contaminated(model(eps=eps, contaminant="normal10"), n, np.random.default_rng(7))
        p_tail = eps * 0.6170750774519740
        observed = np.mean(np.abs(xs) > 5.0)
        band = 4.0 * math.sqrt(p_tail * (1 - p_tail) / n)
        assert abs(observed - p_tail) < band

    def test_bernoulli_mixture_rate(self):
        # per-contract each draw is contaminated independently with
        # probability eps; the mask is recoverable from the stream layout
        eps, n = 0.05, 100_000
        rng = np.random.default_rng(11)
        sample_contaminated(model(eps=eps, contaminant="normal10"), n, rng)
        mask = np.random.default_rng(11).random(n) < eps
        assert abs(mask.mean() - eps) < 3.0 * math.sqrt(eps * (1 - eps) / n)

    def test_cauchy_heavy_tail(self):
        xs = sample_contaminated(model(eps=0.1, contaminant="cauchy"), 10_000, np.random.default_rng(3))
        assert np.max(np.abs(xs)) > 20.0

    def test_logistic_draws_spread(self):
        xs = sample_contaminated(model(eps=0.3, contaminant="logistic"), 50_000, np.random.default_rng(5))
        assert np.all(np.isfinite(xs))
        assert xs.std() > 1.0


SPECS = (
    EstimatorSpec(kind="mle"),
    EstimatorSpec(kind="power-pseudo", alpha=0.5),
    EstimatorSpec(kind="renyi", alpha=0.5),
)


class TestRunStudy:
    def test_determinism(self):
        a = run_study(model(), 40, 5, SPECS, seed=99)
        b = run_study(model(), 40, 5, SPECS, seed=99)
        assert a == b

    def test_single_replication_mse(self):
        result = run_study(model(), 30, 1, (EstimatorSpec(kind="mle"),), seed=17)
        rng = _replication_rng(17, 0)
        xs = sample_contaminated(model(), 30, rng)
        sigma_hat = math.sqrt(np.mean(xs**2))
        assert result.rows[0].mse == pytest.approx((sigma_hat - 1.0) ** 2, rel=1e-12)
        assert result.rows[0].mean_estimate == pytest.approx(sigma_hat, rel=1e-12)

    def test_zero_order_rows_identical(self):
        specs = (
            EstimatorSpec(kind="mle"),
            EstimatorSpec(kind="power-pseudo", alpha=0.0),
            EstimatorSpec(kind="renyi", alpha=0.0),
        )
        result = run_study(model(eps=0.05, contaminant="normal3"), 50, 10, specs, seed=21)
        mses = [row.mse for row in result.rows]
        assert mses[0] == mses[1] == mses[2]

    def test_chunk_pooling_matches_direct(self):
        direct = run_study(model(), 40, 6, SPECS, seed=5)
        chunks = [
            run_study(model(), 40, 3, SPECS, seed=5, first_rep=0),
            run_study(model(), 40, 3, SPECS, seed=5, first_rep=3),
        ]
        pooled = pool_results(chunks)
        assert pooled.replications == direct.replications
        for row_a, row_b in zip(pooled.rows, direct.rows):
            assert row_a.mse == pytest.approx(row_b.mse, rel=1e-10)
            assert row_a.mean_estimate == pytest.approx(row_b.mean_estimate, rel=1e-10)
            assert row_a.failure_count == row_b.failure_count

    def test_mle_mse_near_asymptotic_variance(self):
        # near-pure normal control: var(sigma_hat) ~= sigma^2 / (2n)
        n, reps = 200, 500
        result = run_study(
            model(eps=1e-4, contaminant="normal3"),
            n,
            reps,
            (EstimatorSpec(kind="mle"),),
            seed=2024,
        )
        target = 1.0 / (2 * n)
        assert result.rows[0].mse == pytest.approx(target, rel=0.3)


class TestReport:
    def test_csv_columns(self):
        result = run_study(model(), 30, 2, SPECS, seed=1)
        text = report(result, format="csv")
        lines = text.strip().split("\n")
        assert lines[0] == "estimator,alpha,mse,mean,failures"
        assert lines[1].startswith("mle,,")
        assert lines[2].startswith("power-pseudo,0.5")
        assert len(lines) == 4

    def test_empty_specs_header_only(self):
        result = run_study(model(), 30, 2, (), seed=1)
        assert report(result, format="csv") == "estimator,alpha,mse,mean,failures\n"

    def test_json_round_trip_bit_exact(self):
        result = run_study(model(), 30, 3, SPECS, seed=8)
        payload = json.loads(report(result, format="json"))
        assert payload["replications"] == 3
        assert payload["seed"] == 8
        for row, parsed in zip(result.rows, payload["rows"]):
            assert parsed["mse"] == row.mse
            assert parsed["mean"] == row.mean_estimate
            assert parsed["failures"] == row.failure_count

    def test_csv_round_trip_bit_exact(self):
        result = run_study(model(), 30, 3, SPECS, seed=8)
        lines = report(result, format="csv").strip().split("\n")[1:]
        for row, line in zip(result.rows, lines):
            fields = line.split(",")
            assert float(fields[2]) == row.mse
            assert float(fields[3]) == row.mean_estimate

    def test_rejects_unknown_format(self):
        result = run_study(model(), 30, 1, (), seed=8)
        with pytest.raises(InvalidInputError):
            report(result, format="xml")
