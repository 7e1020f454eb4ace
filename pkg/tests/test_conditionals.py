import itertools
import math

import pytest

from subpois import (
    BernsteinSpec,
    DomainError,
    ProcessParams,
    conditional_gamma_stats,
    conditional_pmf_gamma,
    conditional_pmf_spacefractional,
    gamma_moments,
    jump_times_density_gamma,
    jump_times_density_spacefractional,
    pmf,
    pmf_negative_binomial,
)
from scipy.special import gammaln


def compositions(k):
    """All ordered tuples of positive integers summing to k."""
    for r in range(1, k + 1):
        for cuts in itertools.combinations(range(1, k), r - 1):
            parts, prev = [], 0
            for c in cuts:
                parts.append(c - prev)
                prev = c
            parts.append(k - prev)
            yield parts


class TestConditionalSpaceFractional:
    def test_alpha_one_is_binomial(self):
        s, t, k = 1.0, 4.0, 3
        for lam in (0.5, 2.0):
            for r in range(k + 1):
                binom = math.comb(k, r) * (s / t) ** r * (1 - s / t) ** (k - r)
                got = conditional_pmf_spacefractional(1.0, lam, s, t, r, k)
                assert got == pytest.approx(binom, rel=1e-12)

    def test_k_zero(self):
        assert conditional_pmf_spacefractional(0.5, 1.0, 1.0, 2.0, 0, 0) == pytest.approx(1.0)

    def test_rows_sum_to_one(self):
        for alpha in (0.35, 0.5, 0.9):
            for k in (1, 2, 5, 10):
                row = [
                    conditional_pmf_spacefractional(alpha, 1.0, 1.0, 2.0, r, k)
                    for r in range(k + 1)
                ]
                assert sum(row) == pytest.approx(1.0, abs=1e-10)

    def test_matches_pmf_ratio_oracle(self):
        params = ProcessParams(BernsteinSpec.stable(0.5), 1.0)
        s, t, k = 1.0, 2.0, 2
        for r in range(k + 1):
            oracle = pmf(params, s, r) * pmf(params, t - s, k - r) / pmf(params, t, k)
            got = conditional_pmf_spacefractional(0.5, 1.0, s, t, r, k)
            assert got == pytest.approx(oracle, rel=1e-12)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            conditional_pmf_spacefractional(0.5, 1.0, 2.0, 1.0, 0, 1)  # s >= t
        with pytest.raises(DomainError):
            conditional_pmf_spacefractional(0.5, 1.0, 0.5, 1.0, 3, 2)  # r > k


class TestConditionalGamma:
    def test_k_zero(self):
        assert conditional_pmf_gamma(1.0, 2.0, 0, 0) == pytest.approx(1.0)

    def test_midpoint_single_event_is_fair(self):
        for t in (1.0, 2.0, 7.0):
            assert conditional_pmf_gamma(t / 2, t, 0, 1) == pytest.approx(0.5, rel=1e-12)
            assert conditional_pmf_gamma(t / 2, t, 1, 1) == pytest.approx(0.5, rel=1e-12)

    def test_hand_beta_value(self):
        # binom(2,1) B(2,2)/B(1,1) = 1/3
        assert conditional_pmf_gamma(1.0, 2.0, 1, 2) == pytest.approx(1.0 / 3.0, rel=1e-12)

    def test_rows_sum_to_one(self):
        for s, t in ((0.5, 2.0), (1.3, 1.9)):
            for k in (1, 3, 8):
                row = [conditional_pmf_gamma(s, t, r, k) for r in range(k + 1)]
                assert sum(row) == pytest.approx(1.0, abs=1e-10)

    def test_matches_pmf_ratio_for_every_lambda(self):
        # the bridge is lambda-invariant; the pmf ratio shows it
        s, t, k = 0.7, 2.0, 3
        for lam in (0.5, 1.0, 4.0):
            for r in range(k + 1):
                oracle = (
                    pmf_negative_binomial(lam, s, r)
                    * pmf_negative_binomial(lam, t - s, k - r)
                    / pmf_negative_binomial(lam, t, k)
                )
                assert conditional_pmf_gamma(s, t, r, k) == pytest.approx(oracle, rel=1e-11)


class TestJumpTimesSpaceFractional:
    def test_unit_jumps_constant(self):
        alpha, lam, t, k = 0.5, 1.0, 1.3, 3
        d = jump_times_density_spacefractional(alpha, lam, t, [0.2, 0.5, 1.0], [1, 1, 1])
        from subpois import spacefractional_coeffs

        c = spacefractional_coeffs(alpha, lam, k)
        expected = math.factorial(k) * (alpha * lam**alpha) ** k / sum(
            c[j] * t ** (j + 1) for j in range(k)
        )
        assert d == pytest.approx(expected, rel=1e-12)

    def test_alpha_one_uniform_on_simplex(self):
        lam, t = 2.0, 1.7
        for k in (1, 2, 4):
            times = [t * (i + 1) / (k + 1) for i in range(k)]
            d = jump_times_density_spacefractional(1.0, lam, t, times, [1] * k)
            assert d == pytest.approx(math.factorial(k) / t**k, rel=1e-12)

    def test_single_double_jump_consistent_with_normalization(self):
        # k = 2 via one jump of height 2: the value that makes the composition
        # probabilities sum to 1 (the two-unit-jump route carries the rest)
        alpha, lam, t = 0.5, 1.0, 1.3
        la = lam**alpha
        s2 = (alpha * la * t) ** 2 + alpha * (1 - alpha) * la * t
        d = jump_times_density_spacefractional(alpha, lam, t, [0.5], [2])
        assert d == pytest.approx(alpha * (1 - alpha) * la / s2, rel=1e-12)

    def test_constant_in_the_instants(self):
        alpha, lam, t = 0.6, 1.5, 2.0
        a = jump_times_density_spacefractional(alpha, lam, t, [0.1, 0.2], [2, 1])
        b = jump_times_density_spacefractional(alpha, lam, t, [1.0, 1.9], [2, 1])
        assert a == b

    def test_composition_normalization(self):
        alpha, lam, t = 0.6, 1.3, 0.9
        for k in range(1, 6):
            total = 0.0
            for parts in compositions(k):
                r = len(parts)
                times = [t * (i + 1) / (r + 1) for i in range(r)]
                d = jump_times_density_spacefractional(alpha, lam, t, times, parts)
                total += d * t**r / math.factorial(r)
            assert total == pytest.approx(1.0, abs=1e-10)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            jump_times_density_spacefractional(0.5, 1.0, 1.0, [0.5, 0.4], [1, 1])
        with pytest.raises(DomainError):
            jump_times_density_spacefractional(0.5, 1.0, 1.0, [0.5], [0])
        with pytest.raises(DomainError):
            jump_times_density_spacefractional(0.5, 1.0, 1.0, [1.5], [1])


class TestJumpTimesGamma:
    def test_unit_jumps_special_case(self):
        t, k = 1.7, 4
        d = jump_times_density_gamma(t, [0.1, 0.4, 0.9, 1.5], [1, 1, 1, 1])
        assert d == pytest.approx(
            math.exp(gammaln(k + 1) + gammaln(t) - gammaln(t + k)), rel=1e-12
        )

    def test_single_jump_special_case(self):
        t, k = 1.7, 4
        d = jump_times_density_gamma(t, [0.8], [k])
        base = math.exp(gammaln(k + 1) + gammaln(t) - gammaln(t + k))
        assert d == pytest.approx(base / k, rel=1e-12)

    def test_paired_jumps_special_case(self):
        # k = 2m, all jumps of height 2
        t, m = 1.3, 3
        k = 2 * m
        times = [t * (i + 1) / (m + 1) for i in range(m)]
        d = jump_times_density_gamma(t, times, [2] * m)
        base = math.exp(gammaln(k + 1) + gammaln(t) - gammaln(t + k))
        assert d == pytest.approx(base / 2**m, rel=1e-12)

    def test_composition_normalization(self):
        for t in (0.7, 1.7):
            for k in range(1, 6):
                total = 0.0
                for parts in compositions(k):
                    r = len(parts)
                    times = [t * (i + 1) / (r + 1) for i in range(r)]
                    total += jump_times_density_gamma(t, times, parts) * t**r / math.factorial(r)
                assert total == pytest.approx(1.0, abs=1e-10)


class TestConditionalGammaStats:
    def test_midpoint_mean(self):
        for t, k in ((2.0, 4), (5.0, 7)):
            stats = conditional_gamma_stats(t / 2, t / 2, t, k)
            assert stats.mean == pytest.approx(k / 2.0)

    def test_covariance_reduces_to_variance(self):
        s, t, k = 0.8, 2.0, 5
        stats = conditional_gamma_stats(s, s, t, k)
        variance = s * k * (t - s) * (1 + k / t) / (t * (t + 1))
        assert stats.covariance == pytest.approx(variance, rel=1e-12)
        assert stats.second_moment - stats.mean**2 == pytest.approx(variance, rel=1e-10)

    def test_cross_moment_consistent_with_covariance(self):
        s, w, t, k = 0.5, 1.2, 2.0, 4
        stats = conditional_gamma_stats(s, w, t, k)
        mean_w = k * w / t
        assert stats.cross_moment - stats.mean * mean_w == pytest.approx(
            stats.covariance, rel=1e-10
        )

    def test_law_of_total_variance_recovers_marginal(self):
        # E[Var(N(s)|N(t))] + Var(E[N(s)|N(t)]) must equal lam(lam+1)s
        lam, s, t = 1.3, 0.8, 2.0
        mean_t = lam * t
        var_t = gamma_moments(lam, t).variance
        second_t = var_t + mean_t**2
        expected_cond_var = (
            s * (t - s) / (t * (t + 1)) * mean_t + s * (t - s) / (t**2 * (t + 1)) * second_t
        )
        var_cond_mean = (s / t) ** 2 * var_t
        assert expected_cond_var + var_cond_mean == pytest.approx(
            lam * (lam + 1) * s, rel=1e-12
        )

    def test_domain(self):
        with pytest.raises(DomainError):
            conditional_gamma_stats(1.5, 1.0, 2.0, 3)  # s > w
        with pytest.raises(DomainError):
            conditional_gamma_stats(0.5, 2.0, 2.0, 3)  # w >= t
