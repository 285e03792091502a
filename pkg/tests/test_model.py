"""Distribution-level checks: normalization, round trips, score identities,
and Monte Carlo sanity of the sampler."""
from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest
from scipy.integrate import quad

from lldpd.model import (
    ModelParams,
    as_sample,
    cdf,
    log_pdf,
    pdf,
    quantile,
    sample,
    score_alpha,
    score_beta,
)

P15 = ModelParams(1.0, 5.0)


class TestParams:
    @pytest.mark.parametrize("alpha,beta", [(0.0, 5.0), (-1.0, 5.0), (1.0, 0.0), (math.inf, 5.0), (1.0, math.nan)])
    def test_invalid(self, alpha, beta):
        with pytest.raises(ValueError):
            ModelParams(alpha, beta)

    def test_sample_validation(self):
        with pytest.raises(ValueError):
            as_sample([])
        with pytest.raises(ValueError):
            as_sample([1.0, -2.0])
        with pytest.raises(ValueError):
            as_sample([1.0, math.inf])


class TestPdf:
    def test_at_median(self):
        # x = alpha makes (x^b + a^b)^2 = 4 a^(2b), so f(alpha) = beta/(4 alpha)
        assert pdf(1.0, P15) == pytest.approx(1.25, rel=1e-14)
        assert pdf(2.0, ModelParams(2.0, 3.0)) == pytest.approx(3.0 / 8.0, rel=1e-14)

    def test_origin_limit(self):
        assert pdf(1e-12, P15) == pytest.approx(0.0, abs=1e-40)

    def test_against_high_precision_formula(self):
        # direct formula evaluated at 50 digits
        mpmath.mp.dps = 50
        x, a, b = mpmath.mpf(2), mpmath.mpf(1), mpmath.mpf(5)
        oracle = float(b * a**b * x ** (b - 1) / (x**b + a**b) ** 2)
        assert pdf(2.0, P15) == pytest.approx(oracle, rel=1e-14)

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 3.0])
    @pytest.mark.parametrize("beta", [1.5, 5.0, 10.0])
    def test_integrates_to_one(self, alpha, beta):
        p = ModelParams(alpha, beta)
        total, _ = quad(lambda x: pdf(x, p), 0.0, np.inf, limit=400)
        assert total == pytest.approx(1.0, abs=1e-9)

    def test_domain(self):
        with pytest.raises(ValueError):
            pdf(0.0, P15)
        with pytest.raises(ValueError):
            pdf(-1.0, P15)

    def test_extreme_shape_no_overflow(self):
        # naive x^beta would overflow here
        p = ModelParams(1.0, 50.0)
        assert np.isfinite(log_pdf(1e6, p))
        assert pdf(1e6, p) == 0.0 or pdf(1e6, p) > 0.0


class TestCdfQuantile:
    def test_median(self):
        assert cdf(1.0, P15) == pytest.approx(0.5, abs=1e-15)

    def test_upper_limit(self):
        assert cdf(1e12, P15) == pytest.approx(1.0, abs=1e-12)

    def test_quantile_round_trip_point(self):
        assert cdf(1.5518455739, P15) == pytest.approx(0.9, abs=1e-6)

    def test_quantile_values(self):
        assert quantile(0.5, P15) == pytest.approx(1.0, rel=1e-14)
        assert quantile(0.9, P15) == pytest.approx(9.0**0.2, rel=1e-12)
        assert quantile(0.1, P15) == pytest.approx(9.0**-0.2, rel=1e-12)

    def test_round_trip_grid(self):
        u = np.linspace(0.01, 0.99, 99)
        for p in (P15, ModelParams(0.5, 1.5), ModelParams(3.0, 10.0)):
            assert cdf(quantile(u, p), p) == pytest.approx(u, abs=1e-12)

    def test_monotone(self):
        x = np.linspace(0.1, 5.0, 200)
        v = cdf(x, P15)
        assert np.all(np.diff(v) >= 0.0)

    def test_domain(self):
        for bad in (0.0, 1.0, -0.1, 1.1):
            with pytest.raises(ValueError):
                quantile(bad, P15)


class TestSampling:
    def test_median_monte_carlo(self):
        rng = np.random.default_rng(20240601)
        x = sample(100_000, P15, rng)
        assert abs(np.median(x) - 1.0) < 0.02

    def test_ecdf_monte_carlo(self):
        rng = np.random.default_rng(20240602)
        x = sample(100_000, P15, rng)
        assert abs(np.mean(x <= 1.5518455739) - 0.9) < 0.01

    def test_single_draw(self):
        rng = np.random.default_rng(3)
        x = sample(1, P15, rng)
        assert x.shape == (1,) and x[0] > 0.0

    def test_deterministic_given_stream(self):
        a = sample(50, P15, np.random.default_rng(77))
        b = sample(50, P15, np.random.default_rng(77))
        np.testing.assert_array_equal(a, b)

    def test_rejects_n_zero(self):
        with pytest.raises(ValueError):
            sample(0, P15, np.random.default_rng(1))


class TestScores:
    def test_alpha_at_median(self):
        assert score_alpha(1.0, P15) == pytest.approx(0.0, abs=1e-15)

    def test_alpha_upper_limit(self):
        assert score_alpha(1e9, P15) == pytest.approx(5.0, rel=1e-12)

    def test_alpha_arithmetic(self):
        # (b/a) * (x^b - a^b)/(x^b + a^b) at x=2: 5 * 31/33
        assert score_alpha(2.0, P15) == pytest.approx(5.0 * 31.0 / 33.0, rel=1e-12)

    def test_beta_at_median(self):
        assert score_beta(1.0, P15) == pytest.approx(0.2, rel=1e-14)

    def test_beta_arithmetic(self):
        expected = (1.0 - math.exp(5.0)) / (1.0 + math.exp(5.0)) + 0.2
        assert score_beta(math.e, P15) == pytest.approx(expected, rel=1e-12)

    def test_match_log_pdf_finite_differences(self):
        rng = np.random.default_rng(8)
        for _ in range(100):
            x = float(rng.uniform(0.2, 4.0))
            alpha = float(rng.uniform(0.5, 3.0))
            beta = float(rng.uniform(1.5, 9.0))
            p = ModelParams(alpha, beta)
            ha, hb = 1e-6 * alpha, 1e-6 * beta
            fd_a = (log_pdf(x, ModelParams(alpha + ha, beta)) - log_pdf(x, ModelParams(alpha - ha, beta))) / (2 * ha)
            fd_b = (log_pdf(x, ModelParams(alpha, beta + hb)) - log_pdf(x, ModelParams(alpha, beta - hb))) / (2 * hb)
            assert score_alpha(x, p) == pytest.approx(fd_a, abs=1e-5)
            assert score_beta(x, p) == pytest.approx(fd_b, abs=1e-5)

    def test_zero_mean_monte_carlo(self):
        rng = np.random.default_rng(20240603)
        x = sample(100_000, P15, rng)
        for fn in (score_alpha, score_beta):
            v = fn(x, P15)
            se = np.std(v) / math.sqrt(v.size)
            assert abs(np.mean(v)) < 3.0 * se
