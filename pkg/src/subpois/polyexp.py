"""Complete Bell polynomials and exact exp(-c*t) * polynomial forms.

Every marginal pmf and hitting density in this package is exactly a
polynomial in t multiplied by exp(-t*f(lambda)).  Working on coefficient
arrays keeps derivatives, residuals and normalization integrals exact up
to floating point, with no finite differencing anywhere.

Polynomials are ascending coefficient arrays: coeffs[j] multiplies t**j.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError


def complete_bell(args) -> float:
    """Complete Bell polynomial B_k(x_1, ..., x_k) for k = len(args).

    Uses the recurrence B_{k+1} = sum_{j=0}^{k} C(k, j) B_{k-j} x_{j+1};
    B_0 = 1.
    """
    xs = list(args)
    k = len(xs)
    bell = [1.0] * (k + 1)
    for n in range(k):
        acc = 0.0
        for j in range(n + 1):
            acc += math.comb(n, j) * bell[n - j] * xs[j]
        bell[n + 1] = acc
    return bell[k]


def complete_bell_poly(arg_polys) -> list[np.ndarray]:
    """Bell recurrence with polynomial arguments.

    ``arg_polys[j]`` is the ascending coefficient array of x_{j+1}(s).
    Returns [B_0, ..., B_k] as coefficient arrays, B_0 = [1].
    """
    xs = [np.asarray(p, dtype=float) for p in arg_polys]
    k = len(xs)
    bell = [np.array([1.0])]
    for n in range(k):
        acc = np.zeros(1)
        for j in range(n + 1):
            acc = poly_add(acc, math.comb(n, j) * np.convolve(bell[n - j], xs[j]))
        bell.append(acc)
    return bell


def poly_add(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if len(a) < len(b):
        a, b = b, a
    out = a.copy()
    out[: len(b)] += b
    return out


def poly_derivative(a: np.ndarray) -> np.ndarray:
    if len(a) <= 1:
        return np.zeros(1)
    return a[1:] * np.arange(1, len(a), dtype=float)


def poly_eval(a: np.ndarray, t: float) -> float:
    # Horner on the ascending representation.
    acc = 0.0
    for c in a[::-1]:
        acc = acc * t + c
    return float(acc)


@dataclass(frozen=True)
class PolyExpForm:
    """Exact representation of g(t) = exp(-decay * t) * sum_j coeffs[j] t**j."""

    decay: float
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.decay < 0.0:
            raise DomainError(f"decay rate must be nonnegative, got {self.decay}")
        object.__setattr__(self, "coeffs", np.atleast_1d(np.asarray(self.coeffs, dtype=float)))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, t: float) -> float:
        return math.exp(-self.decay * t) * poly_eval(self.coeffs, t)

    def derivative(self) -> "PolyExpForm":
        """d/dt [e^{-ct} P(t)] = e^{-ct} (P'(t) - c P(t))."""
        return PolyExpForm(self.decay, poly_add(poly_derivative(self.coeffs), -self.decay * self.coeffs))

    def integral_zero_inf(self) -> float:
        """Exact integral over [0, inf) via int e^{-ct} t^j dt = j! / c^{j+1}."""
        if self.decay <= 0.0:
            raise DomainError("integral over [0, inf) requires a positive decay rate")
        c = self.decay
        total = 0.0
        fac_over_power = 1.0 / c  # j! / c^{j+1} at j = 0
        for j, a in enumerate(self.coeffs):
            if j > 0:
                fac_over_power *= j / c
            total += a * fac_over_power
        return total
