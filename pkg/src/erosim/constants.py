"""Exact recursion for the expected particle counts and the constants it defines.

``w_k`` is the expected number of particles the killed process on [-k, k]
emits before it is killed (the killed particle included):

    w_0 = 1,   w_k = w_{k-1} (k+1)(k+2) / k^2 - 1/k.

It satisfies  w_k / ((k+1)^2 (k+2)) = 1/2 - sum_{j<=k} 1/(j (j+1)^2 (j+2)),
so w_k / k^3 tends to 1/alpha with  1/alpha = 1/2 - sum_{j>=1} 1/(j (j+1)^2 (j+2)).
The support scale is C = 2 sqrt(2) alpha^(1/4).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction


def w_recursion(K: int) -> list[Fraction]:
    if K < 0:
        raise ValueError("K must be non-negative")
    w = [Fraction(1)]
    for k in range(1, K + 1):
        w.append(w[-1] * (k + 1) * (k + 2) / (k * k) - Fraction(1, k))
    return w


def series_term(j: int) -> Fraction:
    return Fraction(1, j * (j + 1) ** 2 * (j + 2))


def series_partial_sums(K: int) -> list[Fraction]:
    """S_0 = 0, S_k = sum_{j=1}^k 1/(j (j+1)^2 (j+2))."""
    out = [Fraction(0)]
    for j in range(1, K + 1):
        out.append(out[-1] + series_term(j))
    return out


def identity_holds(K: int) -> list[int]:
    """Indices k <= K where the closed-form identity fails (empty when exact)."""
    w = w_recursion(K)
    s = series_partial_sums(K)
    half = Fraction(1, 2)
    return [k for k in range(K + 1) if w[k] / ((k + 1) ** 2 * (k + 2)) != half - s[k]]


@dataclass(frozen=True)
class Certified:
    value: float
    error: float   # |true - value| <= error

    @property
    def interval(self) -> tuple[float, float]:
        return self.value - self.error, self.value + self.error


# slack for floating-point rounding in the partial sum (terms are all < 0.1
# and fsum is correctly rounded, so the true error is far below this)
_ROUNDING_SLACK = 1e-15


def inverse_alpha_bounds(K: int) -> tuple[float, float]:
    """Rigorous enclosure of 1/alpha from K terms and the integral tail bound."""
    partial = math.fsum(1.0 / (j * (j + 1) ** 2 * (j + 2)) for j in range(1, K + 1))
    tail = 1.0 / (3.0 * K ** 3)
    hi = 0.5 - partial + _ROUNDING_SLACK
    lo = 0.5 - partial - tail - _ROUNDING_SLACK
    return lo, hi


def _terms_for(tolerance: float) -> int:
    # error of 1/alpha must stay below tolerance / alpha^2 (alpha < 2.6)
    target = tolerance / 2.6 ** 2 / 2
    return max(10, math.ceil((1.0 / (3.0 * target)) ** (1.0 / 3.0)) + 1)


def alpha(tolerance: float = 1e-10) -> Certified:
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    lo, hi = inverse_alpha_bounds(_terms_for(tolerance))
    a_lo, a_hi = 1.0 / hi, 1.0 / lo
    return Certified((a_lo + a_hi) / 2, (a_hi - a_lo) / 2 + _ROUNDING_SLACK)


def C_constant(tolerance: float = 1e-10) -> Certified:
    a = alpha(tolerance / 2)
    lo, hi = a.interval
    c_lo = 2 * math.sqrt(2) * lo ** 0.25
    c_hi = 2 * math.sqrt(2) * hi ** 0.25
    return Certified((c_lo + c_hi) / 2, (c_hi - c_lo) / 2 + _ROUNDING_SLACK)


@dataclass
class ConstantsTable:
    w_values: list[Fraction]
    series_partial_sums: list[Fraction]
    alpha: Certified
    C: Certified


def constants_table(K: int = 20, tolerance: float = 1e-10) -> ConstantsTable:
    return ConstantsTable(w_recursion(K), series_partial_sums(K), alpha(tolerance), C_constant(tolerance))
