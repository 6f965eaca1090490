"""Channel assignment under the two scheduling schemes.

RRS hands the N channels to uniformly random cluster members without channel
state information; CRS hands them to the min(K, N) members with the largest
channel gains.  The average channel occupation probability
P0 = E[min(K, N)] / N is the thinning factor of the interferer field seen by
the typical link and is the same for both schemes.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import gammaincc

from .specialfn import log_binomial

_BOUNDARY_SLACK = 1e-12


class Scheme(enum.Enum):
    RRS = "rrs"
    CRS = "crs"


@dataclass(frozen=True)
class ScheduleOutcome:
    """Indices of the cluster members granted a channel."""

    selected: tuple[int, ...]
    scheme: Scheme

    def __post_init__(self):
        if len(set(self.selected)) != len(self.selected):
            raise ValueError("selected indices must be distinct")


def _is_int(value) -> bool:
    return isinstance(value, (int, np.integer)) and not isinstance(value, bool)


def occupation_probability(n_channels: int, m_mean: float) -> float:
    """Average occupation probability of one channel, E[min(K, N)] / N for
    K ~ Poisson(m_mean).

    Evaluated as 1 - Q(N+1, m) + (m/N) Q(N, m), where Q is the regularized
    upper incomplete gamma: Q(N+1, m) = P(K <= N) and (m/N) Q(N, m) =
    E[K 1{K <= N}] / N.  Regularization keeps the evaluation overflow-free
    for N and m well beyond 10^3.
    """
    if not _is_int(n_channels) or n_channels < 1:
        raise ValueError(f"n_channels must be a positive integer, got {n_channels!r}")
    n_channels = int(n_channels)
    m_mean = float(m_mean)
    if not math.isfinite(m_mean) or m_mean < 0.0:
        raise ValueError(f"m_mean must be finite and >= 0, got {m_mean!r}")
    p0 = (
        1.0
        - float(gammaincc(n_channels + 1, m_mean))
        + (m_mean / n_channels) * float(gammaincc(n_channels, m_mean))
    )
    if p0 < 0.0:
        if p0 < -_BOUNDARY_SLACK:
            raise ArithmeticError(f"occupation probability evaluated to {p0}")
        return 0.0
    if p0 > 1.0:
        if p0 > 1.0 + _BOUNDARY_SLACK:
            raise ArithmeticError(f"occupation probability evaluated to {p0}")
        return 1.0
    return p0


def rrs_assign(k: int, n_channels: int, rng: np.random.Generator) -> ScheduleOutcome:
    """Uniformly random subset of min(k, N) member indices; no CSI consulted."""
    if not _is_int(k) or k < 0:
        raise ValueError(f"k must be a nonnegative integer, got {k!r}")
    if not _is_int(n_channels) or n_channels < 1:
        raise ValueError(f"n_channels must be a positive integer, got {n_channels!r}")
    k = int(k)
    n_selected = min(k, n_channels)
    if n_selected == 0:
        return ScheduleOutcome(selected=(), scheme=Scheme.RRS)
    chosen = rng.choice(k, size=n_selected, replace=False)
    return ScheduleOutcome(selected=tuple(sorted(int(i) for i in chosen)), scheme=Scheme.RRS)


def crs_assign(gains: Sequence[float], n_channels: int) -> ScheduleOutcome:
    """Indices of the min(K, N) largest gains; ties break toward the lower index.

    With inversion power control the per-member SIR ordering equals the gain
    ordering, so selecting by gain selects by SIR.  Ties have probability
    zero under continuous fading; index tie-breaking just keeps the outcome
    deterministic.
    """
    if not _is_int(n_channels) or n_channels < 1:
        raise ValueError(f"n_channels must be a positive integer, got {n_channels!r}")
    g = np.asarray(gains, dtype=float)
    if g.ndim != 1:
        raise ValueError("gains must be a one-dimensional sequence")
    if g.size and not np.all(np.isfinite(g)):
        raise ValueError("gains must all be finite")
    n_selected = min(g.size, n_channels)
    if n_selected == 0:
        return ScheduleOutcome(selected=(), scheme=Scheme.CRS)
    # stable argsort on the negated gains: equal gains keep their original
    # relative order, which is exactly lower-index tie-breaking
    order = np.argsort(-g, kind="stable")[:n_selected]
    return ScheduleOutcome(selected=tuple(sorted(int(i) for i in order)), scheme=Scheme.CRS)


def order_statistic_cdf(k: int, nu: int, v: float) -> float:
    """CDF of the nu-th largest of k i.i.d. unit-mean exponential gains.

    P(h(nu) <= v) = sum_{l=q}^{k} C(k, l) F^l (1 - F)^{k-l} with
    q = k - nu + 1 and F = 1 - e^{-v}: at least q of the k gains fall at or
    below v.  Every term is positive, so a term-by-term log-domain sum is
    stable at any k.
    """
    if not _is_int(k) or k < 1:
        raise ValueError(f"k must be a positive integer, got {k!r}")
    if not _is_int(nu) or not (1 <= nu <= k):
        raise ValueError(f"nu must be an integer in [1, {k}], got {nu!r}")
    k, nu = int(k), int(nu)
    v = float(v)
    if math.isnan(v) or v < 0.0:
        raise ValueError(f"v must be >= 0, got {v!r}")
    if v == 0.0:
        return 0.0
    if math.isinf(v):
        return 1.0
    log_f = math.log(-math.expm1(-v))  # ln F without cancellation near F ~ 0
    q = k - nu + 1
    total = 0.0
    for l in range(q, k + 1):
        log_term = log_binomial(k, l) + l * log_f - (k - l) * v  # ln(1-F) = -v
        total += math.exp(log_term)
    return min(total, 1.0)
