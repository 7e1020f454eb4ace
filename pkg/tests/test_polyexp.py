import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from subpois import DomainError, PolyExpForm, complete_bell
from subpois.polyexp import complete_bell_poly, poly_add, poly_derivative, poly_eval

floats = st.floats(-5.0, 5.0)


class TestCompleteBell:
    def test_base_cases(self):
        assert complete_bell([]) == 1.0
        assert complete_bell([3.0]) == 3.0

    def test_hand_expanded_b2(self):
        # B2 = x1^2 + x2
        assert complete_bell([2.0, 5.0]) == pytest.approx(9.0)

    @given(x1=floats, x2=floats, x3=floats)
    @settings(max_examples=50, deadline=None)
    def test_explicit_b3(self, x1, x2, x3):
        expected = x1**3 + 3.0 * x1 * x2 + x3
        assert complete_bell([x1, x2, x3]) == pytest.approx(expected, rel=1e-12, abs=1e-9)

    @given(x1=floats, x2=floats, x3=floats, x4=floats)
    @settings(max_examples=50, deadline=None)
    def test_explicit_b4(self, x1, x2, x3, x4):
        expected = x1**4 + 6.0 * x1**2 * x2 + 4.0 * x1 * x3 + 3.0 * x2**2 + x4
        assert complete_bell([x1, x2, x3, x4]) == pytest.approx(expected, rel=1e-12, abs=1e-9)

    def test_polynomial_variant_matches_scalar(self):
        # constant polynomials reduce to the scalar recurrence
        args = [np.array([2.0]), np.array([-1.0]), np.array([0.5])]
        polys = complete_bell_poly(args)
        assert poly_eval(polys[3], 123.0) == pytest.approx(complete_bell([2.0, -1.0, 0.5]))

    def test_polynomial_variant_evaluates_pointwise(self):
        # x_j(s) linear in s: B_k(x(s)) evaluated at s equals scalar B_k at x(s)
        coeffs = [np.array([0.0, -1.3]), np.array([0.0, 0.7]), np.array([0.0, -0.2])]
        polys = complete_bell_poly(coeffs)
        for s in (0.0, 0.5, 2.0):
            scalar = complete_bell([-1.3 * s, 0.7 * s, -0.2 * s])
            assert poly_eval(polys[3], s) == pytest.approx(scalar, rel=1e-12, abs=1e-12)


class TestPolyOps:
    def test_add_and_derivative(self):
        a = np.array([1.0, 2.0, 3.0])
        b = np.array([5.0])
        assert list(poly_add(a, b)) == [6.0, 2.0, 3.0]
        assert list(poly_derivative(a)) == [2.0, 6.0]
        assert list(poly_derivative(np.array([4.0]))) == [0.0]


class TestPolyExpForm:
    def test_evaluation(self):
        form = PolyExpForm(2.0, [1.0, 3.0])
        assert form(0.5) == pytest.approx(math.exp(-1.0) * 2.5)

    def test_derivative_matches_finite_difference(self):
        form = PolyExpForm(0.7, [0.2, -1.0, 0.4])
        dform = form.derivative()
        for t in (0.1, 1.0, 3.0):
            h = 1e-6
            approx = (form(t + h) - form(t - h)) / (2.0 * h)
            assert dform(t) == pytest.approx(approx, rel=1e-8, abs=1e-8)

    def test_integral_closed_form_matches_quadrature(self):
        from scipy.integrate import quad

        form = PolyExpForm(1.3, [0.5, 2.0, 0.25])
        numeric, _ = quad(form, 0.0, np.inf)
        assert form.integral_zero_inf() == pytest.approx(numeric, rel=1e-10)

    def test_requires_positive_decay_for_integral(self):
        with pytest.raises(DomainError):
            PolyExpForm(0.0, [1.0]).integral_zero_inf()

    def test_negative_decay_rejected(self):
        with pytest.raises(DomainError):
            PolyExpForm(-1.0, [1.0])
