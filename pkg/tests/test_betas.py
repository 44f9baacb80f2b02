"""Closed-form quantities: exact examples, independent oracles, invariants."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.optimize import brentq

from hypercrit.betas import (BetaParams, BorelModel, borel_pmf, borel_survival,
                             classify, critical_profile, eval_beta,
                             fluctuation_variance,
                             fluctuation_variance_closed_form, lambda_k,
                             scaling_exponent, t_star, t_star_detail,
                             two_edge_intensity, two_edge_rates, z_curve,
                             z_tilde)

HALF_THIRD = BetaParams([0.5, 1 / 3])  # beta_2 = 1/2, beta_3 = 1/3
PURE_ONE = BetaParams.pure_graph(1.0)


class TestEvalBeta:
    def test_constant_second_derivative_at_zero(self):
        assert eval_beta(BetaParams([0.5]), 0.0) == (0.0, 0.0, 1.0)

    def test_direct_evaluation(self):
        # beta'(0.2) = 0.2 + 3*(1/3)*0.04 for (1/2, 1/3)
        _, bp, _ = eval_beta(HALF_THIRD, 0.2)
        assert bp == pytest.approx(0.24, abs=1e-15)

    def test_derivative_at_one_is_weighted_sum(self):
        params = BetaParams([0.3, 0.05, 0.2])
        _, bp, _ = eval_beta(params, 1.0)
        expected = sum(k * params.beta(k) for k in range(2, 5))
        assert bp == pytest.approx(expected, rel=1e-15)

    def test_domain_error(self):
        with pytest.raises(ValueError):
            eval_beta(HALF_THIRD, 1.2)
        with pytest.raises(ValueError):
            eval_beta(HALF_THIRD, -0.1)

    def test_vectorized_matches_scalar(self):
        ts = np.linspace(0, 1, 11)
        b, bp, bpp = eval_beta(HALF_THIRD, ts)
        for i, t in enumerate(ts):
            sb, sbp, sbpp = eval_beta(HALF_THIRD, float(t))
            assert (b[i], bp[i], bpp[i]) == (sb, sbp, sbpp)

    def test_rejects_negative_coefficients(self):
        with pytest.raises(ValueError):
            BetaParams([0.5, -0.1])


class TestCriticalProfile:
    def test_examples(self):
        assert critical_profile(3, 1 / 3).as_list() == [0.5, 1 / 3]
        assert critical_profile(4, 1 / 6).as_list() == [0.5, 1 / 6, 1 / 6]
        assert critical_profile(5, 0.2).beta(4) == pytest.approx(1 / 12)

    def test_rejects_small_k(self):
        with pytest.raises(ValueError):
            critical_profile(2, 0.5)


class TestClassify:
    def test_supercritical_k3(self):
        report = classify(critical_profile(3, 1 / 3))
        assert report.first_noncritical_k == 3
        assert report.mu_k == pytest.approx(1.0)
        assert report.alpha_k == scaling_exponent(3)
        assert float(report.alpha_k) == pytest.approx(2 / 3)
        assert report.regime == "supercritical"

    def test_subcritical_k3(self):
        report = classify(critical_profile(3, 0.1))
        assert report.mu_k == pytest.approx(-0.4)
        assert report.regime == "subcritical"
        assert report.t_star == 0.0

    def test_k4_exponent(self):
        report = classify(critical_profile(4, 1 / 6))
        assert report.first_noncritical_k == 4
        assert float(report.alpha_k) == pytest.approx(4 / 5)

    def test_all_critical_reports_graph_critical(self):
        report = classify(BetaParams([0.5]))
        assert report.all_critical
        assert report.label() == "all-critical-up-to-K"
        assert report.regime == "graph-critical"
        assert report.t_star == 0.0

    @pytest.mark.parametrize("k", [3, 4, 5])
    @pytest.mark.parametrize("eps", [1e-6, 1e-3, 0.05])
    def test_drift_identity_under_perturbation(self, k, eps):
        report = classify(critical_profile(k, 1.0 / (k * (k - 1)) + eps))
        assert report.first_noncritical_k == k
        assert report.mu_k == pytest.approx(eps * k * (k - 1), rel=1e-9, abs=1e-12)


class TestTStar:
    def test_subcritical_graph_is_zero(self):
        assert t_star(BetaParams.pure_graph(0.4)) == 0.0

    def test_pure_graph_oracle(self):
        # Independent root of 2t + log(1-t) = 0 on (0.5, 0.99).
        oracle = brentq(lambda t: 2 * t + math.log1p(-t), 0.5, 0.99, xtol=1e-14)
        assert oracle == pytest.approx(0.7968, abs=5e-5)
        assert t_star(PURE_ONE) == pytest.approx(oracle, abs=1e-9)

    def test_half_third_oracle(self):
        oracle = brentq(lambda t: t + t * t + math.log1p(-t), 0.5, 0.99, xtol=1e-14)
        assert oracle == pytest.approx(0.684, abs=5e-4)
        assert t_star(HALF_THIRD) == pytest.approx(oracle, abs=1e-9)

    def test_patch_intensity_shifts_root(self):
        # With an initial patch intensity even a subcritical profile
        # identifies a positive fraction.
        params = critical_profile(3, 0.1)
        detail = t_star_detail(params, beta1=0.5)
        assert 0.0 < detail.value < 1.0
        assert not detail.saturated
        assert not detail.interior_zero  # threshold function stays positive before
        f = 0.5 + eval_beta(params, detail.value)[1] + math.log1p(-detail.value)
        assert abs(f) < 1e-6

    def test_saturation_flag(self):
        detail = t_star_detail(BetaParams.pure_graph(15.0))
        assert detail.saturated and detail.value == 1.0

    def test_rejects_negative_beta1(self):
        with pytest.raises(ValueError):
            t_star(HALF_THIRD, beta1=-0.1)


class TestZCurve:
    def test_zero_at_origin(self):
        assert z_curve(HALF_THIRD, 0.0) == 0.0

    def test_direct_value(self):
        assert z_curve(HALF_THIRD, 0.2) == pytest.approx(0.8 - math.exp(-0.24), rel=1e-12)
        assert z_curve(HALF_THIRD, 0.2) == pytest.approx(0.01337, abs=5e-6)

    def test_root_at_t_star(self):
        ts = t_star(HALF_THIRD)
        assert abs(z_curve(HALF_THIRD, ts)) < 1e-9

    def test_z_tilde_freezes_at_t_star(self):
        ts = t_star(HALF_THIRD)
        assert z_tilde(HALF_THIRD, 0.9) == pytest.approx(z_curve(HALF_THIRD, ts), abs=1e-12)

    @given(st.lists(st.floats(0.0, 2.0), min_size=1, max_size=5))
    @settings(max_examples=60, deadline=None)
    def test_sign_identity_on_grid(self, coeffs):
        # z(t) < 0 iff beta'(t) + log(1-t) < 0: both say 1 - t < e^{-beta'}.
        params = BetaParams(coeffs)
        t = np.linspace(0.0, 0.999, 300)
        z = z_curve(params, t)
        f = eval_beta(params, t)[1] + np.log1p(-t)
        assert np.array_equal(z < 0, f < 0)


class TestBorel:
    def test_pmf_at_one(self):
        for mu in (0.3, 1.0, 2.0):
            assert borel_pmf(BorelModel(mu), 1) == pytest.approx(math.exp(-mu), rel=1e-14)

    def test_pmf_two_node_trees(self):
        # Root with one child, child with none: mu e^{-mu} * e^{-mu} at mu = 0.6.
        assert borel_pmf(BorelModel(0.6), 2) == pytest.approx(0.6 * math.exp(-1.2), rel=1e-14)
        assert borel_pmf(BorelModel(0.6), 2) == pytest.approx(0.1807, abs=5e-5)

    def test_mass_accounting(self):
        # Exponential-tail cases close to machine accuracy with 200 terms.
        for mu in (0.5, 2.0):
            model = BorelModel(mu)
            total = model.pmf(np.arange(1, 201)).sum() + model.survival()
            assert 1 - 1e-6 <= total <= 1 + 1e-12
        # At mu = 1 the tail is polynomial, P(M > n) ~ 0.8 n^{-1/2}, so 200
        # terms leave ~0.056 unaccounted; check the mass at the matching scale.
        model = BorelModel(1.0)
        total = model.pmf(np.arange(1, 2_000_001)).sum() + model.survival()
        assert 1 - 1e-3 <= total <= 1 + 1e-12

    def test_survival(self):
        assert borel_survival(BorelModel(0.7)) == 0.0
        assert borel_survival(BorelModel(1.0)) == 0.0
        assert borel_survival(BorelModel(2.0)) == pytest.approx(0.7968, abs=5e-5)

    def test_survival_matches_t_star(self):
        # Two descriptions of the same asymptotic fraction for a graph.
        assert borel_survival(BorelModel(2.0)) == pytest.approx(t_star(PURE_ONE), abs=1e-8)
        assert borel_survival(BorelModel(1.6)) == pytest.approx(
            t_star(BetaParams.pure_graph(0.8)), abs=1e-8)


class TestCollapsedIntensities:
    def test_single_term_at_zero_deletions(self):
        params = BetaParams([0.5, 0.25, 0.1])
        n = 50
        for k in range(2, 5):
            binom = math.comb(n, k)
            assert lambda_k(params, n, 0, k) == pytest.approx(
                n * params.beta(k) / binom, rel=1e-12)

    def test_two_edge_example(self):
        intensity = two_edge_intensity(BetaParams([0.5]), 10, 0)
        assert intensity.lam == pytest.approx(1 / 9, rel=1e-14)
        assert intensity.rho == pytest.approx(0.10516, abs=5e-6)
        assert intensity.rho == pytest.approx(1 - math.exp(-intensity.lam), rel=1e-12)

    def test_matches_exact_combinatorial_sum(self):
        params = BetaParams([0.5, 1 / 3, 0.05])
        n, i = 40, 17
        for k in (2, 3):
            exact = n * sum(params.beta(k + j) * math.comb(i, j) / math.comb(n, j + k)
                            for j in range(0, params.max_size - k + 1))
            assert lambda_k(params, n, i, k) == pytest.approx(exact, rel=1e-12)

    def test_coefficient_series_matches_direct_sum(self):
        # The kernels rebuild lambda_2 from falling-factorial coefficients;
        # pin that form against the combinatorial sum through j = 4.
        params = BetaParams([0.5, 1 / 6, 0.05, 0.02, 0.01])
        n = 200
        for i in (0, 1, 5, 37, 150):
            direct = n * sum(params.beta(2 + j) * math.comb(i, j) / math.comb(n, j + 2)
                             for j in range(0, params.max_size - 1))
            series = float(two_edge_rates(params, n, np.array([i]))[0])
            assert series == pytest.approx(direct, rel=1e-12)
            assert lambda_k(params, n, i, 2) == pytest.approx(direct, rel=1e-12)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            lambda_k(HALF_THIRD, 10, 10, 2)
        with pytest.raises(ValueError):
            lambda_k(HALF_THIRD, 10, -1, 2)

    def test_large_n_no_overflow(self):
        val = lambda_k(critical_profile(5, 0.1), 10**7, 10**6, 2)
        assert np.isfinite(val) and val > 0

    def test_rate_convergence_to_second_derivative(self):
        # |N lambda_2(N, floor(Ns)) - beta''(s)| shrinks with N, uniformly on [0, r].
        params = HALF_THIRD
        s = np.linspace(0.0, 0.5, 101)
        sups = []
        for n in (10**3, 10**4, 10**5, 10**6):
            i = np.floor(n * s)
            rates = n * two_edge_rates(params, n, i)
            bpp = eval_beta(params, s)[2]
            sups.append(np.abs(rates - bpp).max())
        for a, b in zip(sups, sups[1:]):
            assert b <= 2.0 * a  # nonincreasing up to slack

    def test_pointwise_trend_at_fixed_s(self):
        params = HALF_THIRD
        s = 0.3
        errs = []
        for n in (10**3, 10**4, 10**5, 10**6):
            lam = lambda_k(params, n, int(n * s), 2)
            errs.append(abs(n * lam - eval_beta(params, s)[2]))
        assert errs[-1] < errs[0]


class TestFluctuationVariance:
    def test_zero_at_origin(self):
        assert fluctuation_variance(PURE_ONE, 0.0) == 0.0

    def test_pure_graph_against_quad_oracle(self):
        # Oracle: adaptive quadrature of e^{-2 beta'(t)} int beta'' e^{beta'}.
        def oracle(params, t):
            integral, _ = quad(
                lambda s: eval_beta(params, s)[2] * math.exp(eval_beta(params, s)[1]),
                0.0, t, epsabs=1e-12, epsrel=1e-12)
            return math.exp(-2 * eval_beta(params, t)[1]) * integral

        val = fluctuation_variance(PURE_ONE, 0.5)
        assert val == pytest.approx(oracle(PURE_ONE, 0.5), rel=1e-9)
        assert val == pytest.approx(0.23254, abs=5e-6)
        assert val == pytest.approx(math.exp(-1) - math.exp(-2), rel=1e-7)

        val2 = fluctuation_variance(HALF_THIRD, 0.24)
        assert val2 == pytest.approx(oracle(HALF_THIRD, 0.24), rel=1e-9)
        assert val2 == pytest.approx(0.1911, abs=5e-5)

    def test_closed_form_validates_against_quadrature(self):
        for params in (PURE_ONE, HALF_THIRD, critical_profile(4, 0.2)):
            ts = t_star(params)
            for t in np.linspace(0.05, 0.95 * ts, 7):
                quad_val = fluctuation_variance(params, float(t), t_star_value=ts)
                closed = fluctuation_variance_closed_form(params, float(t))
                assert closed == pytest.approx(quad_val, rel=1e-6)

    def test_domain_error_beyond_t_star(self):
        with pytest.raises(ValueError):
            fluctuation_variance(PURE_ONE, 0.9)


class TestBetaParamsPlumbing:
    def test_text_round_trip(self):
        params = BetaParams([0.5, 1 / 3, 0.0, 0.01])
        assert BetaParams.from_text(params.to_text()) == params

    def test_beta_accessor_out_of_range(self):
        assert HALF_THIRD.beta(7) == 0.0
        assert HALF_THIRD.max_size == 3
