"""Exact state probabilities, generating functions, moments and conditional laws.

The primary pmf route rests on the Faa di Bruno / complete Bell expansion of
the k-th derivative of exp(-t f(lambda u)) at u = 1.  In scaled form

    p_k(t) = exp(-t f(lambda)) * beta_k(t),
    beta_{k+1}(t) = t/(k+1) * sum_{j=0}^{k} (j+1) w_{j+1} beta_{k-j}(t),

where w_m = lambda**m levy_exp_moment(m) / m! is the intensity of size-m
jumps.  Every term is nonnegative, so the recurrence is cancellation-free,
and carrying the coefficients of beta_k as polynomials in t yields the exact
PolyExpForm of each state probability.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import betaln, gammaln

from .errors import (
    AccuracyError,
    CancellationError,
    DomainError,
    InfiniteMomentError,
    SupportCapError,
)
from .families import (
    STABLE,
    ProcessParams,
    eval_f,
    eval_f_derivative,
    jump_rate,
)
from .polyexp import PolyExpForm, complete_bell, poly_eval

__all__ = [
    "SUPPORT_CAP",
    "DistTable",
    "GammaMoments",
    "TemperedMoments",
    "ConditionalGammaStats",
    "complete_bell",
    "pmf",
    "pmf_polyexp",
    "pmf_table",
    "spacefractional_coeffs",
    "pgf",
    "pmf_series_spacefractional",
    "pmf_series_tempered",
    "pmf_series_dirac",
    "pmf_negative_binomial",
    "raw_moment",
    "central_moment",
    "ode_pmf",
    "factorial_moment",
    "tempered_moments",
    "gamma_moments",
    "conditional_pmf_spacefractional",
    "conditional_pmf_gamma",
    "jump_times_density_spacefractional",
    "jump_times_density_gamma",
    "conditional_gamma_stats",
    "skellam_gamma_pmf",
    "negative_binomial_tail_bound",
]

SUPPORT_CAP = 500

# Alternating-series guards: reject outright beyond this exponent scale, and
# reject a posteriori when the largest term dwarfs the summed result.
_SERIES_ARG_GUARD = 30.0
_SERIES_RATIO_GUARD = 1e12


def _check_cap(k: int):
    if k > SUPPORT_CAP:
        raise SupportCapError(f"state index {k} exceeds the hard cap {SUPPORT_CAP}")


@functools.lru_cache(maxsize=256)
def _rates(params: ProcessParams, kmax: int) -> tuple[float, ...]:
    """Size-m jump intensities w_m for m = 1..kmax."""
    return tuple(jump_rate(params.spec, params.lam, m) for m in range(1, kmax + 1))


def _beta_values(params: ProcessParams, t: float, kmax: int) -> np.ndarray:
    """Scaled Bell values beta_k(t) = B_k / k! for k = 0..kmax."""
    w = _rates(params, kmax) if kmax >= 1 else ()
    beta = np.empty(kmax + 1)
    beta[0] = 1.0
    for k in range(kmax):
        acc = 0.0
        for j in range(k + 1):
            acc += (j + 1) * w[j] * beta[k - j]
        beta[k + 1] = acc * t / (k + 1)
    return beta


def pmf(params: ProcessParams, t: float, k: int) -> float:
    """State probability P(N(t) = k) by the Bell-recurrence route."""
    if t < 0.0:
        raise DomainError(f"t must be nonnegative, got {t}")
    if k < 0:
        raise DomainError(f"k must be nonnegative, got {k}")
    _check_cap(k)
    if t == 0.0:
        return 1.0 if k == 0 else 0.0
    decay = eval_f(params.spec, params.lam)
    return math.exp(-decay * t) * _beta_values(params, t, k)[k]


@functools.lru_cache(maxsize=128)
def _poly_table(params: ProcessParams, kmax: int) -> list[np.ndarray]:
    """Coefficient arrays of beta_k as polynomials in t, k = 0..kmax."""
    w = _rates(params, kmax) if kmax >= 1 else ()
    polys = [np.array([1.0])]
    for k in range(kmax):
        acc = np.zeros(k + 2)
        for j in range(k + 1):
            acc[1 : k + 2 - j] += ((j + 1) * w[j] / (k + 1)) * polys[k - j]
        polys.append(acc)
    return polys


def pmf_polyexp(params: ProcessParams, k: int) -> PolyExpForm:
    """P(N(t) = k) as an exact exp(-t f(lambda)) * polynomial(t) form."""
    if k < 0:
        raise DomainError(f"k must be nonnegative, got {k}")
    _check_cap(k)
    decay = eval_f(params.spec, params.lam)
    return PolyExpForm(decay, _poly_table(params, k)[k])


def pmf_polyexp_table(params: ProcessParams, kmax: int) -> list[PolyExpForm]:
    """All PolyExpForms for k = 0..kmax in one recurrence pass."""
    _check_cap(kmax)
    decay = eval_f(params.spec, params.lam)
    return [PolyExpForm(decay, c) for c in _poly_table(params, kmax)]


@dataclass(frozen=True)
class DistTable:
    """Finite pmf over {0, ..., support_max} with an explicit tail-mass bound."""

    support_max: int
    probs: np.ndarray = field(repr=False)
    tail_bound: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "probs", np.asarray(self.probs, dtype=float))
        if len(self.probs) != self.support_max + 1:
            raise DomainError("probs must have support_max + 1 entries")
        if np.any(self.probs < -1e-12):
            raise DomainError("probabilities must be nonnegative")
        total = float(self.probs.sum()) + self.tail_bound
        if not 1.0 - 1e-9 <= total <= 1.0 + 1e-9:
            raise DomainError(f"probs + tail_bound = {total} does not bracket 1")


def pmf_table(params: ProcessParams, t: float, kmax: int | None = None, tol: float = 1e-9) -> DistTable:
    """Tabulate the pmf up to kmax, or adaptively until the tail is below tol.

    Heavy-tailed families (stable) cannot certify arbitrarily small tails at
    desk scale; the adaptive loop then stops at the hard cap and reports the
    honest remaining mass.
    """
    if t <= 0.0:
        raise DomainError(f"t must be positive, got {t}")
    decay = eval_f(params.spec, params.lam)
    scale = math.exp(-decay * t)
    if kmax is not None:
        _check_cap(kmax)
        probs = scale * _beta_values(params, t, kmax)
        return DistTable(kmax, probs, max(0.0, 1.0 - float(probs.sum())))
    k = 32
    while True:
        probs = scale * _beta_values(params, t, k)
        tail = max(0.0, 1.0 - float(probs.sum()))
        if tail <= tol or k >= SUPPORT_CAP:
            return DistTable(k, probs, tail)
        k = min(2 * k, SUPPORT_CAP)


# ---------------------------------------------------------------------------
# Space-fractional machinery, parameterized by alpha directly so that the
# classical boundary alpha = 1 stays available for reduction checks.
# ---------------------------------------------------------------------------


def _sf_rates(alpha: float, lam: float, kmax: int) -> np.ndarray:
    """Jump intensities w_m for f(mu) = mu**alpha, alpha in (0, 1]."""
    if not 0.0 < alpha <= 1.0:
        raise DomainError(f"alpha must lie in (0, 1], got {alpha}")
    if kmax < 1:
        return np.zeros(0)
    w = np.zeros(kmax)
    if alpha == 1.0:
        w[0] = lam
        return w
    la = lam**alpha
    ks = np.arange(1, kmax + 1)
    w[:] = la * np.exp(
        math.log(alpha) + gammaln(ks - alpha) - gammaln(1.0 - alpha) - gammaln(ks + 1)
    )
    return w


@functools.lru_cache(maxsize=128)
def _sf_poly_table(alpha: float, lam: float, kmax: int) -> list[np.ndarray]:
    w = _sf_rates(alpha, lam, kmax)
    polys = [np.array([1.0])]
    for k in range(kmax):
        acc = np.zeros(k + 2)
        for j in range(k + 1):
            acc[1 : k + 2 - j] += ((j + 1) * w[j] / (k + 1)) * polys[k - j]
        polys.append(acc)
    return polys


def _sf_falling(alpha: float, j: int) -> float:
    """a_j = alpha * prod_{i=1}^{j-1} (i - alpha), the magnitude of the j-th
    derivative factor of mu**alpha."""
    out = alpha
    for i in range(1, j):
        out *= i - alpha
    return out


def spacefractional_coeffs(alpha: float, lam: float, k: int) -> np.ndarray:
    """Coefficients c_{j,k}, j = 1..k, of p_k(t) = e^{-t lam^alpha}/k! sum_j c_{j,k} t^j.

    Four entries have independent closed forms and are checked against the
    symbolic recurrence to relative 1e-10:

        c_{k,k}   = (alpha lam^alpha)^k
        c_{k-1,k} = alpha^(k-1) (1-alpha) k(k-1)/2 lam^(alpha(k-1))
        c_{1,k}   = alpha lam^alpha prod_{j=1}^{k-1} (j - alpha)
        c_{2,k}   = lam^(2 alpha)/2 sum_{j=1}^{k-1} C(k,j) a_j a_{k-j}

    where a_j = alpha prod_{i<j} (i - alpha).  The two-block coefficient is
    the full pair sum; collapsing it to the single product
    C(k,2) alpha a_{k-1} only holds for k <= 3.
    """
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    _check_cap(k)
    if k > 170:
        raise SupportCapError("c-coefficients overflow past k = 170; use pmf_polyexp")
    beta_poly = _sf_poly_table(alpha, lam, k)[k]
    coeffs = beta_poly[1:] * math.factorial(k)

    la = lam**alpha
    closed: dict[int, float] = {k: (alpha * la) ** k}
    if k >= 2:
        closed[k - 1] = alpha ** (k - 1) * (1.0 - alpha) * k * (k - 1) / 2.0 * la ** (k - 1)
        closed[1] = alpha * la * float(np.prod(np.arange(1, k) - alpha))
        closed[2] = (
            la**2
            / 2.0
            * sum(math.comb(k, j) * _sf_falling(alpha, j) * _sf_falling(alpha, k - j) for j in range(1, k))
        )
    for j, value in closed.items():
        got = coeffs[j - 1]
        if abs(got - value) > 1e-10 * max(abs(value), 1.0):
            raise AccuracyError(
                f"closed form c_({j},{k}) = {value} disagrees with recurrence value {got}"
            )
    return coeffs


def pgf(params: ProcessParams, u: float, t: float) -> float:
    """Probability generating function: exp(-t f(lambda (1-u)))."""
    if not 0.0 <= u <= 1.0:
        raise DomainError(f"u must lie in [0, 1], got {u}")
    if t < 0.0:
        raise DomainError(f"t must be nonnegative, got {t}")
    return math.exp(-t * eval_f(params.spec, params.lam * (1.0 - u)))


# ---------------------------------------------------------------------------
# Alternating-series routes (secondary; guarded against cancellation).
# ---------------------------------------------------------------------------


def _falling_factorial(y: float, k: int) -> float:
    """y (y-1) ... (y-k+1); empty product for k = 0."""
    out = 1.0
    for i in range(k):
        out *= y - i
    return out


def _alternating_series(x: float, alpha: float, k: int, tol: float) -> float:
    """sum_r (-x)^r / r! * (alpha r)(alpha r - 1)...(alpha r - k + 1), guarded."""
    if x > _SERIES_ARG_GUARD:
        raise CancellationError(
            f"series argument {x:.3g} exceeds the guard threshold {_SERIES_ARG_GUARD}"
        )
    total = 0.0
    max_term = 0.0
    term_x = 1.0  # (-x)^r / r!
    small_streak = 0
    for r in range(100000):
        term = term_x * _falling_factorial(alpha * r, k)
        total += term
        max_term = max(max_term, abs(term))
        if not math.isfinite(total):
            raise CancellationError("series left the double-precision range")
        if r > x and abs(term) <= tol * max(abs(total), 1e-300):
            small_streak += 1
            if small_streak >= 3:
                break
        else:
            small_streak = 0
        term_x *= -x / (r + 1)
    if max_term > _SERIES_RATIO_GUARD * max(abs(total), 1e-300):
        raise CancellationError(
            f"largest series term {max_term:.3g} exceeds {_SERIES_RATIO_GUARD:.0e} "
            f"times the result {total:.3g}"
        )
    return total


def pmf_series_spacefractional(alpha: float, lam: float, t: float, k: int, tol: float = 1e-12) -> float:
    """P(N(t) = k) for f(mu) = mu**alpha via the alternating Gamma-ratio series."""
    if not 0.0 < alpha <= 1.0:
        raise DomainError(f"alpha must lie in (0, 1], got {alpha}")
    if k < 0 or t < 0.0:
        raise DomainError("need k >= 0 and t >= 0")
    _check_cap(k)
    total = _alternating_series(lam**alpha * t, alpha, k, tol)
    sign = -1.0 if k % 2 == 1 else 1.0
    return sign * total / math.factorial(k)


def pmf_series_tempered(
    alpha: float, theta: float, lam: float, t: float, k: int, tol: float = 1e-12
) -> float:
    """P(N(t) = k) for the tempered family via its alternating series.

    theta = 0 reduces to the space-fractional series.
    """
    if theta < 0.0:
        raise DomainError(f"theta must be nonnegative, got {theta}")
    if theta == 0.0:
        return pmf_series_spacefractional(alpha, lam, t, k, tol)
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    if k < 0 or t < 0.0:
        raise DomainError("need k >= 0 and t >= 0")
    _check_cap(k)
    total = _alternating_series((lam + theta) ** alpha * t, alpha, k, tol)
    sign = -1.0 if k % 2 == 1 else 1.0
    rho = lam / (lam + theta)
    return sign * rho**k * math.exp(theta**alpha * t) * total / math.factorial(k)


def _log_negative_binomial(lam: float, t: float, k: int) -> float:
    return (
        k * math.log(lam)
        + gammaln(k + t)
        - gammaln(t)
        - gammaln(k + 1)
        - (t + k) * math.log1p(lam)
    )


def pmf_series_dirac(rate2: float, lam: float, t: float, k: int, tol: float = 1e-14) -> float:
    """P(N(t) = k) for the Dirac-unit family by Poisson composition.

    Conditioning on the secondary count j gives the all-positive series
    sum_j Poisson(j; rate2 t) * Poisson(k; lam j).
    """
    if rate2 <= 0.0 or lam <= 0.0 or t <= 0.0:
        raise DomainError("need rate2 > 0, lam > 0, t > 0")
    if k < 0:
        raise DomainError(f"k must be nonnegative, got {k}")
    total = math.exp(-rate2 * t) if k == 0 else 0.0
    peak = rate2 * t * math.exp(-lam) + k
    j = 0
    while True:
        j += 1
        log_term = (
            -rate2 * t
            + j * math.log(rate2 * t)
            - gammaln(j + 1)
            - lam * j
            + k * math.log(lam * j)
            - gammaln(k + 1)
        )
        term = math.exp(log_term)
        total += term
        if j > peak and term < tol * max(total, 1e-300):
            return total
        if j > 10**6:
            raise AccuracyError("dirac composition series failed to converge")


def raw_moment(params: ProcessParams, t: float, r: int) -> float:
    """E[N(t)**r] for r <= 4, from factorial moments via Stirling numbers."""
    stirling2 = {1: (1.0,), 2: (1.0, 1.0), 3: (1.0, 3.0, 1.0), 4: (1.0, 7.0, 6.0, 1.0)}
    if r not in stirling2:
        raise DomainError(f"raw_moment supports r in 1..4, got {r}")
    return sum(
        coeff * factorial_moment(params, t, j + 1) for j, coeff in enumerate(stirling2[r])
    )


def central_moment(params: ProcessParams, t: float, r: int) -> float:
    """r-th central moment E[(N(t) - E N(t))**r] for r <= 4."""
    if r not in (2, 3, 4):
        raise DomainError(f"central_moment supports r in 2..4, got {r}")
    mu = raw_moment(params, t, 1)
    raws = [1.0] + [raw_moment(params, t, j) for j in range(1, r + 1)]
    return sum(
        math.comb(r, j) * raws[j] * (-mu) ** (r - j) for j in range(r + 1)
    )


def pmf_negative_binomial(lam: float, t: float, k: int) -> float:
    """Negative binomial marginal of the gamma-subordinated process, log-space."""
    if lam <= 0.0 or t <= 0.0:
        raise DomainError("need lam > 0 and t > 0")
    if k < 0:
        raise DomainError(f"k must be nonnegative, got {k}")
    return math.exp(_log_negative_binomial(lam, t, k))


def negative_binomial_tail_bound(lam: float, t: float, k: int) -> float:
    """Certified upper bound on P(N > k) for the negative binomial marginal."""
    rho = lam / (1.0 + lam)
    q = max(lam * (k + 1 + t) / ((1.0 + lam) * (k + 2)), rho)
    while q >= 1.0:
        k += 1
        q = max(lam * (k + 1 + t) / ((1.0 + lam) * (k + 2)), rho)
    return pmf_negative_binomial(lam, t, k + 1) / (1.0 - q)


# ---------------------------------------------------------------------------
# ODE oracle: direct integration of the governing lower-triangular system.
# ---------------------------------------------------------------------------


def ode_pmf(params: ProcessParams, t: float, kmax: int, steps: int | None = None) -> DistTable:
    """Integrate dp_k/dt = -f(lam) p_k + sum_m w_m p_{k-m} with classical RK4.

    Independent oracle for :func:`pmf`.  The step count is doubled until two
    successive grids agree to 1e-8 in sup norm (or ``steps`` is honored as
    given); failure to converge raises AccuracyError.
    """
    if t <= 0.0:
        raise DomainError(f"t must be positive, got {t}")
    if kmax < 0:
        raise DomainError(f"kmax must be nonnegative, got {kmax}")
    _check_cap(kmax)
    c = eval_f(params.spec, params.lam)
    w = np.zeros(kmax + 1)
    w[1:] = _rates(params, kmax) if kmax >= 1 else ()

    def rhs(p):
        return -c * p + np.convolve(p, w)[: kmax + 1]

    def integrate(n):
        h = t / n
        p = np.zeros(kmax + 1)
        p[0] = 1.0
        for _ in range(n):
            k1 = rhs(p)
            k2 = rhs(p + 0.5 * h * k1)
            k3 = rhs(p + 0.5 * h * k2)
            k4 = rhs(p + h * k3)
            p = p + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        return p

    if steps is not None:
        coarse, fine = integrate(steps), integrate(2 * steps)
        if float(np.max(np.abs(fine - coarse))) > 1e-8:
            raise AccuracyError(f"step count {steps} too coarse for t = {t}")
        probs = fine
    else:
        n = 64
        coarse = integrate(n)
        while True:
            fine = integrate(2 * n)
            if float(np.max(np.abs(fine - coarse))) <= 1e-8:
                probs = fine
                break
            n *= 2
            coarse = fine
            if n > 2**18:
                raise AccuracyError("RK4 refinement failed to reach 1e-8")
    probs = np.clip(probs, 0.0, None)
    return DistTable(kmax, probs, max(0.0, 1.0 - float(probs.sum())))


# ---------------------------------------------------------------------------
# Moments.
# ---------------------------------------------------------------------------


def factorial_moment(params: ProcessParams, t: float, r: int) -> float:
    """r-th factorial moment E[N (N-1) ... (N-r+1)] via pgf derivatives at u = 1.

    Evaluating the pgf derivatives probes f at the origin, so the stable
    family (whose derivatives blow up at 0) has no finite moments of any
    order.
    """
    if r < 1:
        raise DomainError(f"r must be >= 1, got {r}")
    if t < 0.0:
        raise DomainError(f"t must be nonnegative, got {t}")
    if params.spec.family == STABLE:
        raise InfiniteMomentError("the stable family has divergent moments of every order")
    lam = params.lam
    args = []
    for j in range(1, r + 1):
        sign = 1.0 if j % 2 == 1 else -1.0
        args.append(t * lam**j * sign * eval_f_derivative(params.spec, j, 0.0))
    return complete_bell(args)


@dataclass(frozen=True)
class TemperedMoments:
    mean: float
    variance: float
    covariance: float


def tempered_moments(alpha: float, theta: float, lam: float, t: float, s: float | None = None) -> TemperedMoments:
    """Mean, variance, and covariance at s ^ t of the tempered process."""
    if theta <= 0.0:
        raise InfiniteMomentError("theta = 0 is the stable limit; moments diverge")
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    if s is None:
        s = t
    prefactor = alpha * lam * theta ** (alpha - 2.0) * (lam * (1.0 - alpha) + theta)
    return TemperedMoments(
        mean=alpha * lam * theta ** (alpha - 1.0) * t,
        variance=prefactor * t,
        covariance=prefactor * min(s, t),
    )


@dataclass(frozen=True)
class GammaMoments:
    mean: float
    variance: float
    covariance: float
    integrated_mean: float
    integrated_variance: float


def gamma_moments(lam: float, t: float, s: float | None = None) -> GammaMoments:
    """Moments of the gamma-subordinated process and of its running integral."""
    if lam <= 0.0 or t < 0.0:
        raise DomainError("need lam > 0 and t >= 0")
    if s is None:
        s = t
    return GammaMoments(
        mean=lam * t,
        variance=lam * t * (lam + 1.0),
        covariance=lam * (lam + 1.0) * min(s, t),
        integrated_mean=lam * t**2 / 2.0,
        integrated_variance=lam * (lam + 1.0) * t**3 / 3.0,
    )


# ---------------------------------------------------------------------------
# Conditional laws and jump-instant densities.
# ---------------------------------------------------------------------------


def _sf_poly_value(polys, m: int, x: float) -> float:
    """beta_m(x) for the space-fractional family (the exponential-free factor
    of p_m up to 1/m!)."""
    return poly_eval(polys[m], x)


def conditional_pmf_spacefractional(
    alpha: float, lam: float, s: float, t: float, r: int, k: int
) -> float:
    """P(N(s) = r | N(t) = k) for f(mu) = mu**alpha, alpha in (0, 1].

    Computed as the ratio of marginal pmfs (independent increments); the
    exponential factors cancel exactly, leaving binom(k, r) times a ratio of
    the coefficient polynomials.  alpha = 1 reduces to binomial(k, s/t).
    """
    if not 0.0 < s < t:
        raise DomainError(f"need 0 < s < t, got s={s}, t={t}")
    if not 0 <= r <= k:
        raise DomainError(f"need 0 <= r <= k, got r={r}, k={k}")
    _check_cap(k)
    polys = _sf_poly_table(alpha, lam, k)
    # p_m(x) = e^{-c x} beta_m(x); in the ratio p_r(s) p_{k-r}(t-s) / p_k(t)
    # the exponentials cancel exactly, and beta_m absorbs 1/m!, so the
    # binomial coefficient is already accounted for.
    return (
        _sf_poly_value(polys, r, s)
        * _sf_poly_value(polys, k - r, t - s)
        / _sf_poly_value(polys, k, t)
    )


def conditional_pmf_gamma(s: float, t: float, r: int, k: int) -> float:
    """Beta-binomial bridge: binom(k, r) B(s+r, t-s+k-r) / B(s, t-s).

    Independent of lambda.
    """
    if not 0.0 < s < t:
        raise DomainError(f"need 0 < s < t, got s={s}, t={t}")
    if not 0 <= r <= k:
        raise DomainError(f"need 0 <= r <= k, got r={r}, k={k}")
    log_binom = gammaln(k + 1) - gammaln(r + 1) - gammaln(k - r + 1)
    return math.exp(log_binom + betaln(s + r, t - s + k - r) - betaln(s, t - s))


def _validate_jump_args(t: float, times, sizes) -> int:
    times = list(times)
    sizes = list(sizes)
    if len(times) != len(sizes):
        raise DomainError("times and sizes must have equal length")
    if len(times) == 0:
        raise DomainError("need at least one jump")
    prev = 0.0
    for ti in times:
        if not prev < ti:
            raise DomainError("jump instants must be strictly increasing and positive")
        prev = ti
    if not prev < t:
        raise DomainError("jump instants must precede the horizon t")
    for l in sizes:
        if l < 1 or l != int(l):
            raise DomainError("jump sizes must be integers >= 1")
    return int(sum(sizes))


def jump_times_density_spacefractional(alpha: float, lam: float, t: float, times, sizes) -> float:
    """Joint density of the r jump instants with given sizes, conditional on
    N(t) = sum(sizes), for f(mu) = mu**alpha.

    Constant in the instants: k! prod_j w(l_j) / (k! beta_k(t)) where w(l) is
    the intensity of size-l jumps.
    """
    k = _validate_jump_args(t, times, sizes)
    _check_cap(k)
    polys = _sf_poly_table(alpha, lam, k)
    w = _sf_rates(alpha, lam, k)
    log_num = gammaln(k + 1)
    for l in sizes:
        wl = w[int(l) - 1]
        if wl == 0.0:
            return 0.0
        log_num += math.log(wl)
    # denominator sum_j c_{j,k} t^j = k! beta_k(t)
    den = math.factorial(k) * poly_eval(polys[k], t) if k <= 170 else None
    if den is not None:
        return math.exp(log_num) / den
    return math.exp(log_num - gammaln(k + 1) - math.log(poly_eval(polys[k], t)))


def jump_times_density_gamma(t: float, times, sizes) -> float:
    """Joint density of jump instants for the gamma family:
    k! Gamma(t) / Gamma(t+k) * prod_j 1/l_j, constant on the simplex."""
    k = _validate_jump_args(t, times, sizes)
    log_val = gammaln(k + 1) + gammaln(t) - gammaln(t + k)
    for l in sizes:
        log_val -= math.log(l)
    return math.exp(log_val)


@dataclass(frozen=True)
class ConditionalGammaStats:
    mean: float
    second_moment: float
    cross_moment: float
    covariance: float


def conditional_gamma_stats(s: float, w: float, t: float, k: int) -> ConditionalGammaStats:
    """Conditional bridge moments of the gamma family given N(t) = k, 0 < s <= w < t."""
    if not 0.0 < s <= w < t:
        raise DomainError(f"need 0 < s <= w < t, got s={s}, w={w}, t={t}")
    if k < 0:
        raise DomainError(f"k must be nonnegative, got {k}")
    mean = k * s / t
    second = k * s / t + k * (k - 1) * s * (s + 1.0) / (t * (t + 1.0))
    cross = (
        k * s / t
        + k * (k - 1) * s * (s + 1.0) / (t * (t + 1.0))
        + k * (k - 1) * s * (w - s) / (t * (t + 1.0))
    )
    cov = k / (t * (t + 1.0)) * (1.0 + k / t) * min(s, w) * min(t - s, t - w)
    return ConditionalGammaStats(mean, second, cross, cov)


def skellam_gamma_pmf(lam: float, t: float, r: int, tol: float = 1e-12) -> float:
    """P(N1(t) - N2(t) = r) for independent gamma-subordinated processes.

    Direct cross-series of negative binomials, truncated with a certified
    geometric tail bound; symmetric in r <-> -r.
    """
    if lam <= 0.0 or t <= 0.0:
        raise DomainError("need lam > 0 and t > 0")
    r = abs(int(r))
    rho = lam / (1.0 + lam)
    total = 0.0
    k = 0
    while True:
        term = math.exp(_log_negative_binomial(lam, t, k) + _log_negative_binomial(lam, t, k + r))
        total += term
        ratio_a = max(lam * (k + t) / ((1.0 + lam) * (k + 1)), rho)
        ratio_b = max(lam * (k + r + t) / ((1.0 + lam) * (k + r + 1)), rho)
        q = ratio_a * ratio_b
        if q < 1.0 and term * q / (1.0 - q) < tol * max(total, 1e-300):
            break
        k += 1
        if k > 10**7:
            raise AccuracyError("skellam cross-series failed to converge")
    return total
