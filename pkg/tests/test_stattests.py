import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from oracles import chi2_ppf_mpmath
from vlcnoise import DataError, TimeSeries, autocorrelation, chi2_cdf, chi2_quantile, ljung_box
from vlcnoise.stattests import regularized_gamma_p, regularized_gamma_q


class TestAutocorrelation:
    def test_hand_cases(self):
        assert autocorrelation([1, 1, 1, 1], 1)[0] == 0.75
        assert autocorrelation([1, -1, 1, -1], 1)[0] == -0.75

    def test_zero_series(self):
        with pytest.raises(DataError):
            autocorrelation([0.0, 0.0, 0.0], 1)

    def test_lag_bounds(self):
        with pytest.raises(DataError):
            autocorrelation([1.0, 2.0, 3.0], 3)

    def test_fft_route_matches_direct(self, use_backend):
        x = np.random.default_rng(0).standard_normal(4096)
        n = x.size
        spec = np.fft.rfft(x, 2 * n)
        acf = np.fft.irfft(spec * np.conj(spec), 2 * n)[1:41] / np.dot(x, x)
        np.testing.assert_allclose(autocorrelation(x, 40), acf, rtol=1e-10, atol=1e-13)


class TestIncompleteGamma:
    @pytest.mark.parametrize("a", [0.5, 1.0, 2.5, 10.0, 50.0])
    @pytest.mark.parametrize("x", [0.01, 0.7, 3.0, 12.0, 80.0])
    def test_against_mpmath(self, a, x):
        mp = pytest.importorskip("mpmath")
        want = float(mp.gammainc(a, 0, x, regularized=True))
        assert regularized_gamma_p(a, x) == pytest.approx(want, rel=1e-12, abs=1e-300)
        assert regularized_gamma_p(a, x) + regularized_gamma_q(a, x) == pytest.approx(1.0, abs=1e-14)

    def test_chi2_two_dof_is_exponential(self):
        for x in (0.1, 1.0, 5.0, 30.0):
            assert chi2_cdf(x, 2) == pytest.approx(1 - math.exp(-x / 2), rel=1e-13)


class TestChi2Quantile:
    def test_closed_forms(self):
        assert abs(chi2_quantile(0.95, 2) - (-2 * math.log(0.05))) < 1e-6
        assert abs(chi2_quantile(0.5, 2) - 2 * math.log(2)) < 1e-6
        assert chi2_quantile(0.95, 2) == pytest.approx(5.9915, abs=1e-4)
        assert chi2_quantile(0.5, 2) == pytest.approx(1.3863, abs=1e-4)

    def test_one_dof_against_mpmath_bisection(self):
        pytest.importorskip("mpmath")
        oracle = chi2_ppf_mpmath(0.95, 1)
        assert abs(oracle - 3.8415) < 1e-3
        assert chi2_quantile(0.95, 1) == pytest.approx(oracle, rel=1e-10)

    @pytest.mark.parametrize("k", [1, 3, 10, 57, 100])
    @pytest.mark.parametrize("p", [1e-6, 0.05, 0.5, 0.95, 0.999999])
    def test_relative_accuracy(self, p, k):
        pytest.importorskip("mpmath")
        assert chi2_quantile(p, k) == pytest.approx(chi2_ppf_mpmath(p, k), rel=1e-10)

    @given(st.floats(0.001, 0.999), st.integers(1, 200))
    @settings(max_examples=60)
    def test_cdf_round_trip(self, p, k):
        assert chi2_cdf(chi2_quantile(p, k), k) == pytest.approx(p, abs=1e-8)

    def test_monotone(self):
        ps = np.linspace(0.01, 0.99, 25)
        for k in (1, 2, 7, 50):
            q = [chi2_quantile(p, k) for p in ps]
            assert np.all(np.diff(q) > 0)
        assert np.all(np.diff([chi2_quantile(0.95, k) for k in range(1, 60)]) > 0)

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.1])
    def test_domain(self, p):
        with pytest.raises(DataError):
            chi2_quantile(p, 3)


class TestLjungBox:
    def test_alternating_series(self):
        x = np.tile([1.0, -1.0], 50)
        res = ljung_box(x, 1, 0.05)
        r1 = -99 / 100
        assert res.q_stats[0] == pytest.approx(100 * 102 * r1 ** 2 / 99, rel=1e-12)
        assert res.q_stats[0] > res.thresholds[0]
        assert bool(res.reject[0])

    def test_random_walk_rejects_everywhere(self):
        x = np.cumsum(np.random.default_rng(3).standard_normal(4000))
        res = ljung_box(TimeSeries(x, 1.0), 100, 0.05)
        assert res.thresholds[0] == pytest.approx(3.841, abs=1e-3)
        assert res.reject.all()

    def test_white_noise_rejection_rate_low(self):
        rng = np.random.default_rng(8)
        rejects = np.zeros(100)
        for _ in range(100):
            rejects += ljung_box(rng.standard_normal(4000), 100, 0.05).reject
        assert (rejects / 100).max() <= 0.10

    def test_result_invariants(self):
        res = ljung_box(np.random.default_rng(1).standard_normal(500), 30, 0.1)
        assert np.array_equal(res.reject, res.q_stats > res.thresholds)
        assert res.lags.tolist() == list(range(1, 31))
        assert res.n_samples == 500 and res.alpha == 0.1

    def test_demean_option(self):
        x = np.random.default_rng(2).standard_normal(1000) + 5.0
        assert ljung_box(x, 5, demean=False).reject.all()
        assert not ljung_box(x, 5, demean=True).reject.all()

    @given(arrays(np.float64, st.integers(12, 80), elements=st.floats(-100, 100)))
    def test_q_non_decreasing(self, x):
        if np.dot(x - x.mean(), x - x.mean()) < 1e-9:
            return
        res = ljung_box(x, 10)
        assert np.all(np.diff(res.q_stats) >= 0)

    def test_bad_alpha(self):
        with pytest.raises(DataError):
            ljung_box([1.0, 2.0, 3.0], 1, alpha=1.5)
