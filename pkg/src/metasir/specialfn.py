"""Special functions backing the closed-form reliability expressions.

Upper incomplete gamma at half-integer order, the complementary error
function and its inverse, and log-domain gamma/binomial coefficients.
All functions here are pure and safe to call from any number of workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.special import erfcinv as _scipy_erfcinv

SQRT_PI = math.sqrt(math.pi)


@dataclass(frozen=True)
class HalfIntegerOrder:
    """Order s = twice_order / 2 of an incomplete gamma function.

    twice_order must be a positive integer, so s runs over 1/2, 1, 3/2, ...
    """

    twice_order: int

    def __post_init__(self):
        if not isinstance(self.twice_order, int) or isinstance(self.twice_order, bool):
            raise ValueError(f"twice_order must be an integer, got {self.twice_order!r}")
        if self.twice_order < 1:
            raise ValueError(f"twice_order must be >= 1, got {self.twice_order}")

    @property
    def value(self) -> float:
        return self.twice_order / 2.0


def erfc(z: float) -> float:
    """Complementary error function, erfc(z) = (2/sqrt(pi)) int_z^inf e^{-u^2} du."""
    z = float(z)
    if not math.isfinite(z):
        raise ValueError(f"erfc requires a finite argument, got {z!r}")
    return math.erfc(z)


def erfc_inv(y: float) -> float:
    """Inverse of erfc on (0, 2): the z with erfc(z) = y."""
    y = float(y)
    if not (0.0 < y < 2.0):
        raise ValueError(f"erfc_inv requires y in (0, 2), got {y!r}")
    return float(_scipy_erfcinv(y))


def _power_times_exp(s: float, x: float) -> float:
    # x^s * e^{-x}, evaluated in the log domain so x^s alone cannot overflow
    if x == 0.0:
        return 0.0
    return math.exp(s * math.log(x) - x)


def upper_incomplete_gamma(order: HalfIntegerOrder, x: float) -> float:
    """Upper incomplete gamma Gamma(s, x) = int_x^inf u^{s-1} e^{-u} du.

    Half-integer orders only.  The base cases are Gamma(1/2, x) =
    sqrt(pi) * erfc(sqrt(x)) and Gamma(1, x) = e^{-x}; larger orders follow
    the upward recurrence Gamma(s+1, x) = s Gamma(s, x) + x^s e^{-x}, whose
    terms are all positive, so the recursion never cancels.
    """
    if not isinstance(order, HalfIntegerOrder):
        raise TypeError(f"order must be a HalfIntegerOrder, got {type(order).__name__}")
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"upper_incomplete_gamma requires finite x, got {x!r}")
    if x < 0.0:
        raise ValueError(f"upper_incomplete_gamma requires x >= 0, got {x}")
    if order.twice_order % 2 == 1:
        s = 0.5
        g = SQRT_PI * erfc(math.sqrt(x))
    else:
        s = 1.0
        g = math.exp(-x)
    while s < order.value:
        g = s * g + _power_times_exp(s, x)
        s += 1.0
    return g


def log_gamma(x: float) -> float:
    """Natural log of the complete gamma function for x > 0."""
    x = float(x)
    if not (x > 0.0):
        raise ValueError(f"log_gamma requires x > 0, got {x!r}")
    return math.lgamma(x)


def log_binomial(n: int, k: int) -> float:
    """ln C(n, k) through log-gamma; exact enough to recover integer C(n, k)
    for n up to ~100 after exponentiation."""
    if not isinstance(n, int) or not isinstance(k, int):
        raise ValueError("log_binomial requires integer arguments")
    if k < 0 or n < 0:
        raise ValueError(f"log_binomial requires nonnegative arguments, got ({n}, {k})")
    if k > n:
        raise ValueError(f"log_binomial requires k <= n, got ({n}, {k})")
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)
