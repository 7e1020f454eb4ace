import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from subpois import (
    BernsteinSpec,
    DivergentIntegralError,
    DomainError,
    ParameterError,
    ProcessParams,
    eval_f,
    eval_f_derivative,
    jump_size_pmf,
    jump_size_tail_bound,
    levy_exp_moment,
)
from subpois.families import jump_size_pmf_generic


class TestParameterValidation:
    def test_alpha_range(self):
        with pytest.raises(ParameterError):
            BernsteinSpec.stable(1.0)
        with pytest.raises(ParameterError):
            BernsteinSpec.stable(0.0)
        with pytest.raises(ParameterError):
            BernsteinSpec.tempered(0.5, 0.0)
        with pytest.raises(ParameterError):
            BernsteinSpec.dirac_unit(-1.0)

    def test_extraneous_parameters_rejected(self):
        with pytest.raises(ParameterError):
            BernsteinSpec("gamma", alpha=0.5)
        with pytest.raises(ParameterError):
            BernsteinSpec("stable")

    def test_lambda_positive(self):
        with pytest.raises(ParameterError):
            ProcessParams(BernsteinSpec.gamma(), 0.0)


class TestFunctionValues:
    def test_stable_sqrt(self):
        assert eval_f(BernsteinSpec.stable(0.5), 4.0) == pytest.approx(2.0, abs=1e-15)

    def test_gamma_log(self):
        assert eval_f(BernsteinSpec.gamma(), math.e - 1.0) == pytest.approx(1.0, abs=1e-15)

    def test_tempered_difference(self):
        assert eval_f(BernsteinSpec.tempered(0.5, 1.0), 3.0) == pytest.approx(1.0, abs=1e-14)

    def test_f_vanishes_at_zero(self, specs):
        for spec in specs.values():
            assert eval_f(spec, 0.0) == 0.0

    def test_nondecreasing(self, specs):
        grid = [0.0, 0.1, 0.5, 1.0, 3.0, 10.0]
        for spec in specs.values():
            values = [eval_f(spec, mu) for mu in grid]
            assert all(a <= b for a, b in zip(values, values[1:]))


class TestDerivatives:
    def test_gamma_first(self):
        assert eval_f_derivative(BernsteinSpec.gamma(), 1, 1.0) == pytest.approx(0.5)

    def test_stable_second(self):
        assert eval_f_derivative(BernsteinSpec.stable(0.5), 2, 1.0) == pytest.approx(-0.25)

    def test_linear_higher_orders_vanish(self):
        assert eval_f_derivative(BernsteinSpec.linear(), 2, 7.0) == 0.0
        assert eval_f_derivative(BernsteinSpec.linear(), 1, 7.0) == 1.0

    def test_m_zero_is_contract_error(self):
        with pytest.raises(DomainError):
            eval_f_derivative(BernsteinSpec.gamma(), 0, 1.0)

    def test_sign_pattern(self, specs):
        # (-1)^(m+1) f^(m)(mu) > 0 for every family with Levy mass
        for name, spec in specs.items():
            if name == "linear":
                continue
            for m in range(1, 13):
                for mu in (0.1, 1.0, 10.0):
                    value = eval_f_derivative(spec, m, mu)
                    assert (1 if m % 2 == 1 else -1) * value > 0.0

    @given(
        alpha=st.floats(0.05, 0.95),
        mu=st.floats(0.05, 50.0),
        m=st.integers(1, 10),
    )
    @settings(max_examples=60, deadline=None)
    def test_stable_derivative_against_finite_difference(self, alpha, mu, m):
        # one central finite-difference step of order m-1 on f^(m-1)
        spec = BernsteinSpec.stable(alpha)
        h = 1e-6 * max(mu, 1.0)
        if m == 1:
            approx = (eval_f(spec, mu + h) - eval_f(spec, mu - h)) / (2 * h)
        else:
            approx = (
                eval_f_derivative(spec, m - 1, mu + h) - eval_f_derivative(spec, m - 1, mu - h)
            ) / (2 * h)
        exact = eval_f_derivative(spec, m, mu)
        assert approx == pytest.approx(exact, rel=1e-4, abs=1e-10)


class TestLevyMoments:
    def test_identity_with_derivative(self):
        assert levy_exp_moment(BernsteinSpec.gamma(), 1, 1.0) == pytest.approx(0.5)
        assert levy_exp_moment(BernsteinSpec.stable(0.5), 2, 1.0) == pytest.approx(0.25)

    def test_dirac_against_direct_point_mass(self):
        # integral of exp(-lam*s) s^m against rate2 * delta_1 is rate2 * exp(-lam)
        spec = BernsteinSpec.dirac_unit(3.0)
        for m in (1, 2, 5):
            assert levy_exp_moment(spec, m, 0.5) == pytest.approx(3.0 * math.exp(-0.5), rel=1e-15)

    def test_linear_convention(self):
        assert levy_exp_moment(BernsteinSpec.linear(), 3, 2.0) == 0.0

    def test_m_zero(self):
        for spec in (BernsteinSpec.stable(0.5), BernsteinSpec.tempered(0.5, 1.0), BernsteinSpec.gamma()):
            with pytest.raises(DivergentIntegralError):
                levy_exp_moment(spec, 0, 1.0)
        assert levy_exp_moment(BernsteinSpec.dirac_unit(2.0), 0, 1.0) == pytest.approx(
            2.0 * math.exp(-1.0)
        )


class TestJumpSizePmf:
    def test_sibuya_first_mass_is_alpha(self):
        spec = BernsteinSpec.stable(0.5)
        for lam in (0.3, 1.0, 7.3):
            assert jump_size_pmf(spec, lam, 1) == pytest.approx(0.5, rel=1e-14)

    def test_logarithmic_first_mass(self):
        assert jump_size_pmf(BernsteinSpec.gamma(), 1.0, 1) == pytest.approx(
            0.5 / math.log(2.0), rel=1e-14
        )

    def test_linear_degenerate(self):
        assert jump_size_pmf(BernsteinSpec.linear(), 2.0, 1) == 1.0
        assert jump_size_pmf(BernsteinSpec.linear(), 2.0, 5) == 0.0

    def test_generic_route_agrees_with_closed_forms(self, specs):
        for name, spec in specs.items():
            if name == "linear":
                continue
            for lam in (0.5, 1.0, 4.0):
                for k in range(1, 51):
                    closed = jump_size_pmf(spec, lam, k)
                    generic = jump_size_pmf_generic(spec, lam, k)
                    assert generic == pytest.approx(closed, rel=1e-12)

    def test_normalization_brackets_one(self, specs):
        for spec in specs.values():
            for lam in (0.5, 1.0, 4.0):
                total = sum(jump_size_pmf(spec, lam, k) for k in range(1, 201))
                tail = jump_size_tail_bound(spec, lam, 200)
                assert total <= 1.0 + 1e-10
                assert total + tail >= 1.0 - 1e-10

    def test_gamma_partial_sum_with_geometric_tail(self):
        spec = BernsteinSpec.gamma()
        total = sum(jump_size_pmf(spec, 1.0, k) for k in range(1, 201))
        assert total + jump_size_tail_bound(spec, 1.0, 200) == pytest.approx(1.0, abs=1e-10)


class TestTemperedToStableLimit:
    """theta -> 0 continuity.  f and pi_k converge at rate theta**alpha
    (exactly bounded by theta**alpha for f), derivatives at rate theta/mu."""

    def test_f_gap_bounded_by_theta_alpha(self):
        for theta in (1e-6, 1e-12):
            stable = BernsteinSpec.stable(0.5)
            tempered = BernsteinSpec.tempered(0.5, theta)
            for mu in (0.1, 1.0, 10.0):
                gap = eval_f(stable, mu) - eval_f(tempered, mu)
                assert 0.0 <= gap <= theta**0.5 * (1.0 + 1e-12)

    def test_derivatives_within_1e4_at_theta_1e6(self):
        stable = BernsteinSpec.stable(0.5)
        tempered = BernsteinSpec.tempered(0.5, 1e-6)
        for m in (1, 2, 5):
            for mu in (0.1, 1.0, 10.0):
                ratio = eval_f_derivative(tempered, m, mu) / eval_f_derivative(stable, m, mu)
                assert ratio == pytest.approx(1.0, abs=1e-4)

    def test_jump_pmf_converges_at_rate_theta_alpha(self):
        stable = BernsteinSpec.stable(0.5)
        for theta, tol in ((1e-6, 3e-3), (1e-12, 3e-6)):
            tempered = BernsteinSpec.tempered(0.5, theta)
            for k in (1, 5, 20):
                ratio = jump_size_pmf(tempered, 1.0, k) / jump_size_pmf(stable, 1.0, k)
                assert ratio == pytest.approx(1.0, abs=tol)
