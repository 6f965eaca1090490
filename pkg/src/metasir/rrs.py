"""Closed-form reliability results under random resource scheduling.

Conditioned on the geometry, the typical link's success probability is
approximated by exp(-beta * theta), where beta = sum_i (r_d_i / y_i)^alpha
aggregates the interferer ratios.  Over a thinned Poisson field beta has the
stretched-exponential Laplace transform exp(-t s^{2/alpha}) with
t = (1/2) p0 lambda_p pi r_cluster^2 Gamma(1 - 2/alpha).  For alpha = 4 the
density of beta is one-sided Levy, and the reliability CCDF comes out as

    F(theta, x) = (1/sqrt(pi)) Gamma(1/2, (t^2/4) theta / (-ln x))
                = erfc((t/2) sqrt(theta / (-ln x))).

Deriving that CDF integral with the substitution u = 1/omega keeps the
(t^2/4) factor inside the incomplete gamma argument; dropping it would make
the expression independent of the deployment density, which is wrong.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .network import SystemParams
from .scheduling import occupation_probability
from .specialfn import SQRT_PI, erfc, erfc_inv

_CONSISTENCY_RTOL = 1e-12


@dataclass(frozen=True)
class RrsAnalyticParams:
    """Derived constants feeding every closed form.

    t is the stretched-exponential constant of the Laplace transform of beta; a = t^2/4
    and b = t/(2 sqrt(pi)) are the substitution constants of the CDF
    integral.  b * a^{-1/2} = 1/sqrt(pi) whenever t > 0.
    """

    p0: float
    t: float
    a: float
    b: float
    alpha: float

    def __post_init__(self):
        if not (0.0 <= self.p0 <= 1.0):
            raise ValueError(f"p0 must lie in [0, 1], got {self.p0!r}")
        if not (self.t >= 0.0 and math.isfinite(self.t)):
            raise ValueError(f"t must be finite and >= 0, got {self.t!r}")
        if self.alpha <= 2.0:
            raise ValueError(f"alpha must exceed 2, got {self.alpha!r}")
        if not math.isclose(self.a, self.t**2 / 4.0, rel_tol=_CONSISTENCY_RTOL, abs_tol=0.0):
            raise ValueError(f"a must equal t^2/4: a={self.a!r}, t={self.t!r}")
        if not math.isclose(self.b, self.t / (2.0 * SQRT_PI), rel_tol=_CONSISTENCY_RTOL, abs_tol=0.0):
            raise ValueError(f"b must equal t/(2 sqrt(pi)): b={self.b!r}, t={self.t!r}")


@dataclass(frozen=True)
class MetaQuery:
    """One reliability query: SIR threshold theta (linear) and target
    reliability x."""

    theta: float
    x: float

    def __post_init__(self):
        if not (self.theta > 0.0 and math.isfinite(self.theta)):
            raise ValueError(f"theta must be positive and finite, got {self.theta!r}")
        if not (0.0 <= self.x <= 1.0):
            raise ValueError(f"x must lie in [0, 1], got {self.x!r}")


def derive_params(params: SystemParams) -> RrsAnalyticParams:
    """Occupation probability, then the stretched-exponential constant
    t = (1/2) p0 lambda_p pi r_cluster^2 Gamma(1 - 2/alpha)."""
    if params.alpha <= 2.0:
        raise ValueError(
            f"closed forms need alpha > 2 (Gamma(1 - 2/alpha) diverges at 2), got {params.alpha}"
        )
    p0 = occupation_probability(params.n_channels, params.m_mean)
    t = 0.5 * p0 * params.lambda_p * math.pi * params.r_cluster**2 * math.gamma(1.0 - 2.0 / params.alpha)
    return RrsAnalyticParams(p0=p0, t=t, a=t * t / 4.0, b=t / (2.0 * SQRT_PI), alpha=params.alpha)


def _require_alpha_four(p: RrsAnalyticParams, what: str):
    if p.alpha != 4.0:
        raise ValueError(
            f"{what} is only available in closed form for alpha = 4 "
            f"(got alpha = {p.alpha}); use the Monte Carlo estimator for other exponents"
        )


def beta_laplace(s: float, p: RrsAnalyticParams) -> float:
    """Laplace transform of beta: exp(-t s^{2/alpha}), valid for any alpha > 2."""
    s = float(s)
    if not (s >= 0.0 and math.isfinite(s)):
        raise ValueError(f"s must be finite and >= 0, got {s!r}")
    return math.exp(-p.t * s ** (2.0 / p.alpha))


def beta_pdf(omega: float, p: RrsAnalyticParams) -> float:
    """One-sided Levy density of beta for alpha = 4:
    f(omega) = t exp(-t^2 / (4 omega)) / (2 sqrt(pi) omega^{3/2})."""
    _require_alpha_four(p, "the beta density")
    omega = float(omega)
    if not (omega > 0.0):
        raise ValueError(f"omega must be > 0, got {omega!r}")
    return p.t * math.exp(-p.t**2 / (4.0 * omega)) / (2.0 * SQRT_PI * omega**1.5)


def rrs_meta(q: MetaQuery, p: RrsAnalyticParams) -> float:
    """Fraction of links whose success probability exceeds x at threshold theta:
    F(theta, x) = erfc((t/2) sqrt(theta / (-ln x))).

    Boundary conventions by continuity: x = 0 -> 1, x = 1 -> 0, t = 0 -> 1.
    """
    _require_alpha_four(p, "the reliability CCDF")
    if q.x >= 1.0:
        return 0.0
    if q.x <= 0.0:
        return 1.0
    if p.t == 0.0:
        return 1.0
    return erfc(0.5 * p.t * math.sqrt(q.theta / -math.log(q.x)))


def _rrs_meta_grid(theta: float, x: np.ndarray, p: RrsAnalyticParams) -> np.ndarray:
    # vectorized rrs_meta on an x grid with the same boundary conventions
    _require_alpha_four(p, "the reliability CCDF")
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    inner = (0.0 < x) & (x < 1.0)
    out[x <= 0.0] = 1.0
    out[x >= 1.0] = 0.0
    if p.t == 0.0:
        out[inner] = 1.0
        return out
    from scipy.special import erfc as _erfc_vec

    out[inner] = _erfc_vec(0.5 * p.t * np.sqrt(theta / -np.log(x[inner])))
    return out


def rrs_success_probability(theta: float, p: RrsAnalyticParams) -> float:
    """Mean success probability over geometries: exp(-t theta^{2/alpha}),
    the Laplace transform of beta at the threshold."""
    theta = float(theta)
    if not (theta > 0.0 and math.isfinite(theta)):
        raise ValueError(f"theta must be positive and finite, got {theta!r}")
    return math.exp(-p.t * theta ** (2.0 / p.alpha))


class RateSolution(NamedTuple):
    theta: float
    rate_bpcu: float


def rrs_max_threshold(x: float, u: float, p: RrsAnalyticParams) -> RateSolution:
    """Largest SIR threshold (and its rate) such that a fraction u of links
    still reaches reliability x: inverting the CCDF gives
    theta = (-ln x) (2 erfc_inv(u) / t)^2 and rate = log2(1 + theta)."""
    _require_alpha_four(p, "the threshold inverse")
    if not (0.0 < x < 1.0):
        raise ValueError(f"x must lie in (0, 1), got {x!r}")
    if not (0.0 < u < 1.0):
        raise ValueError(f"u must lie in (0, 1), got {u!r}")
    if p.t <= 0.0:
        raise ValueError("the threshold inverse needs t > 0 (some interference)")
    theta = -math.log(x) * (2.0 * erfc_inv(u) / p.t) ** 2
    return RateSolution(theta=theta, rate_bpcu=math.log2(1.0 + theta))
