"""First-passage laws of T_k = inf{t : N(t) >= k}.

With p_l(s) = e^{-s f(lambda)} P_l(s) exactly polynomial-exponential, the
density of T_k is

    q_k(s) = -d/ds sum_{l<k} p_l(s)
           = e^{-s f(lambda)} [ f(lambda) sum_{l<k} P_l(s) - sum_{l<k} P_l'(s) ],

so every operation here is closed polynomial calculus; no finite differences
enter the residual checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .families import ProcessParams, eval_f, eval_f_derivative, jump_rate
from .distributions import pmf_polyexp_table
from .polyexp import (
    PolyExpForm,
    complete_bell_poly,
    poly_add,
    poly_derivative,
)


@dataclass(frozen=True)
class HittingDensityForm(PolyExpForm):
    """q_k(s) = exp(-s f(lambda)) * R_k(s) with R_k held exactly."""


def hitting_density_form(params: ProcessParams, k: int) -> HittingDensityForm:
    """Exact polynomial-exponential form of the density of T_k, k >= 1."""
    if k < 1:
        raise DomainError(f"k must be >= 1 (T_0 is identically 0), got {k}")
    forms = pmf_polyexp_table(params, k - 1)
    decay = forms[0].decay
    below = np.zeros(1)
    for form in forms:
        below = poly_add(below, form.coeffs)
    poly = poly_add(decay * below, -poly_derivative(below))
    return HittingDensityForm(decay, poly)


def hitting_density(params: ProcessParams, k: int, s: float) -> float:
    """Density of T_k at s > 0."""
    if s < 0.0:
        raise DomainError(f"s must be nonnegative, got {s}")
    return hitting_density_form(params, k)(s)


def hitting_survival(params: ProcessParams, k: int, s: float) -> float:
    """P(T_k > s) = P(N(s) < k) = sum_{l<k} p_l(s)."""
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    if s < 0.0:
        raise DomainError(f"s must be nonnegative, got {s}")
    if s == 0.0:
        return 1.0
    forms = pmf_polyexp_table(params, k - 1)
    return float(sum(form(s) for form in forms))


def hitting_density_t2(params: ProcessParams, s: float) -> float:
    """Closed form of the T_2 density:
    e^{-s f(lam)} (f(lam) - lam f'(lam) + lam s f'(lam) f(lam))."""
    if s < 0.0:
        raise DomainError(f"s must be nonnegative, got {s}")
    lam = params.lam
    f = eval_f(params.spec, lam)
    f1 = eval_f_derivative(params.spec, 1, lam)
    return math.exp(-s * f) * (f - lam * f1 + lam * s * f1 * f)


def _lambda_derivative_form(params: ProcessParams, l: int) -> PolyExpForm:
    """d^l/dlam^l e^{-s f(lam)} = e^{-s f(lam)} W_l(s), with s kept symbolic.

    W_l is the complete Bell polynomial in x_j(s) = -s f^(j)(lam).
    """
    args = [
        np.array([0.0, -eval_f_derivative(params.spec, j, params.lam)])
        for j in range(1, l + 1)
    ]
    w = complete_bell_poly(args)[l]
    return PolyExpForm(eval_f(params.spec, params.lam), w)


def hitting_recurrence_check(params: ProcessParams, k: int, s: float) -> float:
    """Residual of the successive-derivation identity

    q_k(s) = q_{k-1}(s) - (-lam)^{k-1}/(k-1)! * d/ds d^{k-1}/dlam^{k-1} e^{-s f(lam)}

    with both sides built by independent symbolic routes.
    """
    if k < 2:
        raise DomainError(f"the recurrence needs k >= 2, got {k}")
    if s < 0.0:
        raise DomainError(f"s must be nonnegative, got {s}")
    q_k = hitting_density(params, k, s)
    q_prev = hitting_density(params, k - 1, s)
    w_form = _lambda_derivative_form(params, k - 1)
    correction = ((-params.lam) ** (k - 1) / math.factorial(k - 1)) * w_form.derivative()(s)
    return abs(q_k - q_prev + correction)


def hitting_gf(params: ProcessParams, u: float, s: float) -> float:
    """Generating function sum_k u^k q_k(s) in closed form:
    (u/(1-u)) f(lam(1-u)) e^{-s f(lam(1-u))}."""
    if not 0.0 < u < 1.0:
        raise DomainError(f"u must lie in (0, 1), got {u}")
    if s < 0.0:
        raise DomainError(f"s must be nonnegative, got {s}")
    fv = eval_f(params.spec, params.lam * (1.0 - u))
    return u / (1.0 - u) * fv * math.exp(-s * fv)


def hitting_gf_partial_sum(
    params: ProcessParams, u: float, s: float, tol: float = 1e-12, kcap: int = 500
) -> float:
    """Adaptive partial sum sum_{k>=1} u^k q_k(s); converges for u < 1."""
    if not 0.0 < u < 1.0:
        raise DomainError(f"u must lie in (0, 1), got {u}")
    total = 0.0
    streak = 0
    for k in range(1, kcap + 1):
        term = u**k * hitting_density(params, k, s)
        total += term
        if abs(term) <= tol * max(abs(total), 1e-300):
            streak += 1
            if streak >= 5:
                break
        else:
            streak = 0
    return total


def hitting_equation_residual(params: ProcessParams, k: int, s: float) -> float:
    """Residual of the governing equation of the hitting densities:

    f(lam) q_k(s) - sum_{m=1}^{k-1} w_m q_{k-m}(s) = -q_k'(s),

    where w_m = lam^m/m! * integral e^{-lam z} z^m nu(dz).
    """
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    if s < 0.0:
        raise DomainError(f"s must be nonnegative, got {s}")
    f = eval_f(params.spec, params.lam)
    forms = [hitting_density_form(params, j) for j in range(1, k + 1)]
    lhs = f * forms[k - 1](s)
    for m in range(1, k):
        lhs -= jump_rate(params.spec, params.lam, m) * forms[k - m - 1](s)
    rhs = -forms[k - 1].derivative()(s)
    return abs(lhs - rhs)
