"""Inverse binomial CDF helper against brute force and scipy."""
import numpy as np
import pytest
from scipy.stats import binom

from fsqkd._quantile import binom_cdf, binom_ppf


def brute_ppf(q: float, n: int, p: float) -> float:
    """Smallest k with CDF(k) >= q by direct summation."""
    total = 0.0
    for k in range(n + 1):
        total += binom.pmf(k, n, p)
        if total >= q:
            return float(k)
    return float(n)


class TestBinomCdf:
    @pytest.mark.parametrize("n,p", [(10, 0.3), (50, 0.9), (200, 0.02)])
    def test_matches_scipy(self, n, p):
        for k in range(0, n + 1, max(n // 10, 1)):
            assert binom_cdf(float(k), float(n), p) == pytest.approx(
                binom.cdf(k, n, p), rel=1e-10, abs=1e-300)

    def test_limits(self):
        assert binom_cdf(-1.0, 10.0, 0.5) == 0.0
        assert binom_cdf(10.0, 10.0, 0.5) == 1.0


class TestBinomPpf:
    @pytest.mark.parametrize("q", [1e-15, 1e-9, 0.01, 0.5, 0.99])
    @pytest.mark.parametrize("n,p", [(40, 0.3), (300, 0.9), (1000, 0.98)])
    def test_matches_brute_force(self, q, n, p):
        assert binom_ppf(q, float(n), p) == brute_ppf(q, n, p)

    @pytest.mark.parametrize("n", [1e4, 1e6, 1e9])
    def test_matches_scipy_at_scale(self, n):
        got = binom_ppf(1e-15, n, 0.98)
        want = float(binom.ppf(1e-15, int(n), 0.98))
        assert got == want

    def test_vectorized(self):
        n = np.array([1e4, 1e6, 2.5e5])
        got = binom_ppf(1e-15, n, 0.98)
        want = np.array([float(binom.ppf(1e-15, int(v), 0.98)) for v in n])
        np.testing.assert_array_equal(got, want)

    def test_real_valued_counts_stay_in_range(self):
        # expected counts are not integers; the quantile must stay in [0, n]
        n = 251187.94755083777
        got = binom_ppf(1e-15, n, 1.0 - 0.015337717636589641)
        assert 0.0 <= got <= n
        # one unit either side of the returned integer brackets the quantile
        assert binom_cdf(got, n, 1.0 - 0.015337717636589641) >= 1e-15
        assert binom_cdf(got - 1.0, n, 1.0 - 0.015337717636589641) < 1e-15

    def test_degenerate_success_probability(self):
        # p -> 1 pushes the quantile to the top of the support
        assert binom_ppf(1e-15, 100.0, 1.0) == 100.0
