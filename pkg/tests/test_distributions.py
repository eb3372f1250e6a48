import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate as sci
from scipy.stats import binom

from ulln_lab.distributions import (DistributionSpec, binomial_upper_median_tail,
                                    cdf, draw_sample, median_tail_bound_holds,
                                    pdf, quantile)

STD = DistributionSpec("laplace", 0.0, 1.0)


class TestDensity:
    def test_value_at_center(self):
        assert pdf(STD, 0.0) == 0.25

    def test_direct_substitution(self):
        assert pdf(STD, 2.0) == pytest.approx(math.exp(-1.0) / 4.0, rel=1e-14)

    @pytest.mark.parametrize("a", [0.1, 1.0, 10.0])
    def test_symmetry_about_mu(self, a):
        d = DistributionSpec("laplace", 3.0, 2.0)
        assert pdf(d, 3.0 + a) == pdf(d, 3.0 - a)

    def test_normalization_by_quadrature(self):
        # independent oracle: scipy panels on both sides of the kink
        for d in (STD, DistributionSpec("laplace", -2.0, 0.5)):
            lo, hi = d.mu - 60 * d.sigma, d.mu + 60 * d.sigma
            mass = (sci.quad(lambda x: pdf(d, x), lo, d.mu, limit=200)[0]
                    + sci.quad(lambda x: pdf(d, x), d.mu, hi, limit=200)[0])
            assert abs(mass - 1.0) < 1e-9

    def test_invalid_params(self):
        with pytest.raises(ValueError):
            DistributionSpec("laplace", 0.0, 0.0)
        with pytest.raises(ValueError):
            DistributionSpec("cauchy", 0.0, 1.0)


class TestCdf:
    def test_median_point(self):
        assert cdf(DistributionSpec("laplace", 5.0, 1.0), 5.0) == 0.5

    def test_upper_tail_formula(self):
        assert 1.0 - cdf(STD, 4.0) == pytest.approx(0.5 * math.exp(-2.0), rel=1e-13)

    def test_monotone_on_grid(self):
        vals = cdf(STD, np.linspace(-20, 20, 2001))
        assert np.all(np.diff(vals) >= 0.0)
        assert np.all((vals > 0.0) & (vals < 1.0))


class TestQuantile:
    def test_median(self):
        assert quantile(DistributionSpec("laplace", 7.0, 3.0), 0.5) == 7.0

    def test_analytic_inversion(self):
        assert quantile(STD, 0.75) == pytest.approx(2.0 * math.log(2.0), rel=1e-14)

    @pytest.mark.parametrize("x", [-5.0, 0.3, 11.0])
    def test_roundtrip_through_cdf(self, x):
        assert quantile(STD, cdf(STD, x)) == pytest.approx(x, abs=1e-10)

    def test_roundtrip_grid(self):
        q = cdf(STD, np.linspace(-15, 15, 1000))
        x = quantile(STD, q)
        assert np.allclose(cdf(STD, x), q, atol=1e-10)

    @pytest.mark.parametrize("q", [0.0, 1.0, -0.1, 1.5])
    def test_domain_errors(self, q):
        with pytest.raises(ValueError):
            quantile(STD, q)

    @given(st.floats(min_value=1e-12, max_value=1.0 - 1e-12))
    @settings(max_examples=200, deadline=None)
    def test_cdf_of_quantile_is_identity(self, q):
        assert cdf(STD, quantile(STD, q)) == pytest.approx(q, rel=1e-12, abs=1e-12)


class TestDrawSample:
    def test_deterministic(self):
        a = draw_sample(STD, 100, 42)
        b = draw_sample(STD, 100, 42)
        assert np.array_equal(a, b)

    def test_length_and_domain_error(self):
        assert draw_sample(STD, 5, 1).shape == (5,)
        with pytest.raises(ValueError):
            draw_sample(STD, 0, 1)

    def test_kolmogorov_smirnov_against_exact_cdf(self):
        s = np.sort(draw_sample(STD, 100_000, 2024))
        u = cdf(STD, s)
        n = s.size
        grid = np.arange(1, n + 1) / n
        ks = max(np.max(grid - u), np.max(u - (grid - 1.0 / n)))
        assert ks < 0.01

    def test_moment_check(self):
        # variance of this parameterization is 8 sigma^2; verified against a
        # quadrature oracle before being used as the standard-error scale
        d = DistributionSpec("laplace", 1.5, 1.0)
        var = (sci.quad(lambda x: (x - d.mu) ** 2 * pdf(d, x), -np.inf, d.mu, limit=200)[0]
               + sci.quad(lambda x: (x - d.mu) ** 2 * pdf(d, x), d.mu, np.inf, limit=200)[0])
        assert var == pytest.approx(8.0 * d.sigma**2, rel=1e-9)
        s = draw_sample(d, 1_000_000, 99)
        assert abs(s.mean() - d.mu) < 4.0 * math.sqrt(var / s.size)


def _tail_oracle_fraction(n: int, p: Fraction) -> Fraction:
    total = Fraction(0)
    for k in range((n + 1) // 2, n + 1):
        total += math.comb(n, k) * p**k * (1 - p) ** (n - k)
    return total


class TestBinomialTail:
    def test_symmetric_odd(self):
        assert binomial_upper_median_tail(5, 0.5) == pytest.approx(0.5, rel=1e-13)

    def test_single_term(self):
        assert binomial_upper_median_tail(1, 0.3) == pytest.approx(0.3, rel=1e-13)

    def test_three_term_sum(self):
        assert binomial_upper_median_tail(4, 0.5) == pytest.approx(11.0 / 16.0, rel=1e-13)

    @pytest.mark.parametrize("n,p", [(4, Fraction(1, 2)), (7, Fraction(3, 10)),
                                     (12, Fraction(1, 100)), (9, Fraction(9, 10))])
    def test_exact_fraction_oracle(self, n, p):
        got = binomial_upper_median_tail(n, float(p))
        assert got == pytest.approx(float(_tail_oracle_fraction(n, p)), rel=1e-12)

    @given(st.integers(min_value=1, max_value=400),
           st.floats(min_value=1e-9, max_value=1.0 - 1e-9))
    @settings(max_examples=150, deadline=None)
    def test_matches_scipy_survival(self, n, p):
        got = binomial_upper_median_tail(n, p)
        want = float(binom.sf((n + 1) // 2 - 1, n, p))
        assert got == pytest.approx(want, rel=1e-9, abs=1e-300)

    def test_edge_probabilities(self):
        assert binomial_upper_median_tail(10, 0.0) == 0.0
        assert binomial_upper_median_tail(10, 1.0) == 1.0

    @given(st.integers(min_value=1, max_value=60))
    @settings(max_examples=60, deadline=None)
    def test_odd_fair_coin_is_half(self, m):
        n = 2 * m + 1
        assert binomial_upper_median_tail(n, 0.5) == pytest.approx(0.5, rel=1e-11)

    def test_nonincreasing_in_t(self):
        # p = (1/2) e^{-t/(2 sigma)} decreases in t, and the tail is monotone in p
        sigma = 1.0
        ts = np.linspace(8.0, 30.0, 45)
        vals = [binomial_upper_median_tail(25, 0.5 * math.exp(-t / (2 * sigma)))
                for t in ts]
        assert all(b <= a * (1 + 1e-12) for a, b in zip(vals[:-1], vals[1:]))


class TestMedianTailBound:
    def test_regime_example_holds(self):
        assert median_tail_bound_holds(8, 8.0, 1.0) == "holds"
        # evidence values behind the verdict, against the scipy oracle
        p = 0.5 * math.exp(-4.0)
        tail = float(binom.sf(3, 8, p))
        assert tail < 0.5 * math.exp(-8.0)
        assert tail == pytest.approx(4.78e-7, rel=0.01)

    def test_below_regime_abstains(self):
        assert median_tail_bound_holds(3, 8.0, 1.0) == "outside_regime"
        assert median_tail_bound_holds(50, 7.9, 1.0) == "outside_regime"

    def test_scaled_sigma_regime(self):
        assert median_tail_bound_holds(15, 16.0, 2.0) == "outside_regime"  # n < 16
        assert median_tail_bound_holds(16, 16.0, 2.0) in ("holds", "violated")
