"""Per-realization conditional success probabilities and empirical meta
distribution curves.

RRS success conditioned on the geometry is an exact product over the
interferer set, so no fading is ever simulated on the estimation path.  CRS
success for the weakest scheduled link is an alternating binomial double sum
over the order statistics of the cluster gains.  Its terms reach
C(K, K/2) ~ 1e26 at realistic cluster sizes while the result lies in [0, 1],
which costs ~90 bits to cancellation in IEEE doubles; the sum is therefore
collapsed onto exact integer weights and accumulated in software extended
precision sized to the full alternating mass.

The realization loop is embarrassingly parallel: every realization draws its
randomness from a counter-based substream keyed by (master_seed, index), and
all reductions happen on the assembled per-index value array, so any worker
count produces bit-identical output.
"""

from __future__ import annotations

import enum
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import gmpy2
import numpy as np

from .network import (
    InterferenceModel,
    SystemParams,
    TypicalLinkSample,
    build_typical_link_full,
    build_typical_link_thinned,
    realization_rng,
)
from .scheduling import Scheme, occupation_probability

LANDING_TOL = 2.0**-40
_GUARD_BITS = 64
_CI_Z = 1.959963984540054  # two-sided 95% normal quantile


class Provenance(enum.Enum):
    ANALYTIC = "analytic"
    SEMI_ANALYTIC = "semi_analytic"
    EMPIRICAL = "empirical"


class CrsPrecisionError(ArithmeticError):
    """The extended-precision CRS sum landed outside [0, 1] beyond tolerance;
    precision_bits must grow."""


@dataclass(frozen=True)
class CondSuccessSample:
    """Success probability of one realization, exact over fading (and, for
    CRS, over scheduling), conditioned on the sampled geometry."""

    value: float

    def __post_init__(self):
        if not (0.0 <= self.value <= 1.0):
            raise ValueError(f"conditional success must lie in [0, 1], got {self.value!r}")


@dataclass(frozen=True)
class CrsEvalSettings:
    """Numerical controls for the CRS evaluator.

    precision_bits is a floor; the evaluator raises it automatically to cover
    the largest outer binomial and the full alternating weight mass, plus
    guard bits.  oracle_fading_draws sizes the fading-simulation cross-checks.
    """

    precision_bits: int = 128
    oracle_fading_draws: int = 100_000

    def __post_init__(self):
        if not isinstance(self.precision_bits, int) or self.precision_bits < 53:
            raise ValueError(f"precision_bits must be an integer >= 53, got {self.precision_bits!r}")
        if not isinstance(self.oracle_fading_draws, int) or self.oracle_fading_draws < 1:
            raise ValueError(f"oracle_fading_draws must be >= 1, got {self.oracle_fading_draws!r}")


@dataclass(frozen=True)
class MetaCurve:
    """A reliability grid x -> fraction of links with success probability
    above x, with provenance and (for sampled curves) confidence half-widths."""

    theta: float
    x: np.ndarray
    values: np.ndarray
    provenance: Provenance
    ci_halfwidth: np.ndarray | None = None
    n_realizations: int | None = None

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "values", values)
        if x.ndim != 1 or x.shape != values.shape:
            raise ValueError("x and values must be one-dimensional arrays of equal length")
        if x.size == 0:
            raise ValueError("the reliability grid must be nonempty")
        if np.any(np.diff(x) <= 0.0):
            raise ValueError("the reliability grid must be strictly increasing")
        if np.any(x < 0.0) or np.any(x > 1.0):
            raise ValueError("reliability targets must lie in [0, 1]")
        if np.any(values < 0.0) or np.any(values > 1.0):
            raise ValueError("curve values must lie in [0, 1]")
        if self.ci_halfwidth is not None:
            ci = np.asarray(self.ci_halfwidth, dtype=float)
            object.__setattr__(self, "ci_halfwidth", ci)
            if ci.shape != x.shape:
                raise ValueError("ci_halfwidth must match the grid shape")
        self._check_monotone()

    def _check_monotone(self):
        rises = np.diff(self.values)
        worst = float(rises.max(initial=0.0))
        if worst <= 0.0:
            return
        tol = np.zeros(self.values.size - 1)
        if self.ci_halfwidth is not None:
            tol = self.ci_halfwidth[1:]
        if np.any(rises > np.maximum(tol, 1e-12)):
            raise ValueError(
                f"curve values must be nonincreasing in x (worst rise {worst:g})"
            )
        warnings.warn(
            f"meta curve has a within-noise monotonicity violation (worst rise {worst:g})",
            RuntimeWarning,
            stacklevel=3,
        )

    @property
    def grid(self) -> tuple[tuple[float, float], ...]:
        return tuple((float(a), float(v)) for a, v in zip(self.x, self.values))


def _success_from_ratios(theta: float, ratios: np.ndarray) -> float:
    # exact over fading: prod_i 1 / (1 + theta c_i), via logs so extreme
    # ratios cannot underflow the running product
    if ratios.size == 0:
        return 1.0
    return float(math.exp(-np.log1p(theta * ratios).sum()))


def rrs_conditional_success(theta: float, link: TypicalLinkSample) -> CondSuccessSample:
    """Success probability of the typical link over fading, conditioned on the
    geometry: prod_i [1 + theta (r_d_i / y_i)^alpha]^{-1}."""
    theta = float(theta)
    if not (theta > 0.0 and math.isfinite(theta)):
        raise ValueError(f"theta must be positive and finite, got {theta!r}")
    return CondSuccessSample(_success_from_ratios(theta, link.ratio_powers()))


def sample_beta(link: TypicalLinkSample, alpha: float) -> float:
    """The interference ratio functional beta = sum_i (r_d_i / y_i)^alpha."""
    alpha = float(alpha)
    if not (alpha >= 2.0 and math.isfinite(alpha)):
        raise ValueError(f"alpha must be finite and >= 2, got {alpha!r}")
    return float(link.ratio_powers(alpha).sum())


def worst_case_q(k: int, n_channels: int) -> int:
    """Order-statistic index of the weakest scheduled link: at least q of the
    k gains must fall below v for the weakest scheduled one to do so.
    q = k - N + 1 when k >= N; when k < N every member is scheduled and the
    weakest of all k is tracked, so q = 1."""
    return k - n_channels + 1 if k >= n_channels else 1


@lru_cache(maxsize=4096)
def _crs_weights(k: int, q: int) -> tuple[tuple[int, ...], int, int]:
    """Exact integer weights of the collapsed CRS sum.

    sum_{l=q}^{k} sum_{r=0}^{l} C(k,l) C(l,r) (-1)^r m_{k-l+r} regroups by
    j = k-l+r into sum_j W[j] m_j, where m_j is the j-th moment of the
    conditional fading survival e^{-theta I}.  All binomial cancellation is
    pushed into the integer W[j].  Returns (W, bit length of the largest
    outer binomial, bit length of sum_j |W[j]|).
    """
    weights = [0] * (k + 1)
    for d in range(k + 1):  # d = k - j
        acc = 0
        for l in range(max(q, d), k + 1):
            term = math.comb(k, l) * math.comb(l, d)
            acc = acc + term if (l - d) % 2 == 0 else acc - term
        weights[k - d] = acc
    max_outer = max(math.comb(k, l) for l in range(q, k + 1))
    sum_abs = sum(abs(w) for w in weights)
    return tuple(weights), max_outer.bit_length(), sum_abs.bit_length()


def _required_precision(settings: CrsEvalSettings, outer_bits: int, sumw_bits: int) -> int:
    # the largest outer binomial alone underestimates the cancellation once
    # the inner binomials bite, so cover the full alternating mass too
    return max(settings.precision_bits, outer_bits + _GUARD_BITS, sumw_bits + _GUARD_BITS)


def _weighted_moment_sum(theta: float, weights: Sequence[int], ratios: np.ndarray, precision: int) -> float:
    """sum_j W[j] * prod_i [1 + theta j c_i]^{-1} at the given working
    precision.  Each product has only positive factors and each moment is
    computed to full working precision, so the only rounding that matters is
    the final accumulation, which the precision is sized for."""
    with gmpy2.context(precision=precision):
        one = gmpy2.mpfr(1)
        theta_mp = gmpy2.mpfr(theta)
        cs = [gmpy2.mpfr(float(c)) for c in ratios]
        total = gmpy2.mpfr(weights[0])  # j = 0: the moment is exactly 1
        for j in range(1, len(weights)):
            w = weights[j]
            if w == 0:
                continue
            tj = theta_mp * j
            denom = one
            for c in cs:
                denom *= one + tj * c
            total += w / denom
        return float(total)


def crs_conditional_success(
    theta: float,
    k: int,
    n_channels: int,
    link: TypicalLinkSample,
    settings: CrsEvalSettings,
) -> CondSuccessSample:
    """Success probability of the weakest scheduled link over fading and
    scheduling, conditioned on the geometry.

    P_s = 1 - sum_{l=q}^{k} sum_{r=0}^{l} C(k,l) C(l,r) (-1)^r
              prod_i [1 + theta (k-l+r) (r_d_i/y_i)^alpha]^{-1}

    evaluated through exact integer weights in extended precision.  The
    result must land in [0, 1] within 2^-40; a louder violation raises
    CrsPrecisionError instead of being clamped away.
    """
    theta = float(theta)
    if not (theta > 0.0 and math.isfinite(theta)):
        raise ValueError(f"theta must be positive and finite, got {theta!r}")
    if not isinstance(k, (int, np.integer)) or isinstance(k, bool) or k < 1:
        raise ValueError(f"k must be a positive integer, got {k!r}")
    if not isinstance(n_channels, (int, np.integer)) or n_channels < 1:
        raise ValueError(f"n_channels must be a positive integer, got {n_channels!r}")
    ratios = link.ratio_powers()
    if ratios.size and not np.all(np.isfinite(ratios)):
        raise ValueError("interferer ratios must all be finite")
    weights, outer_bits, sumw_bits = _crs_weights(int(k), worst_case_q(int(k), int(n_channels)))
    precision = _required_precision(settings, outer_bits, sumw_bits)
    failure = _weighted_moment_sum(theta, weights, ratios, precision)
    value = 1.0 - failure
    if not (-LANDING_TOL <= value <= 1.0 + LANDING_TOL):
        raise CrsPrecisionError(
            f"CRS sum landed at {value!r} for k={k}, N={n_channels} at "
            f"{precision} bits; raise CrsEvalSettings.precision_bits"
        )
    return CondSuccessSample(min(max(value, 0.0), 1.0))


def crs_conditional_success_float64(
    theta: float, k: int, n_channels: int, link: TypicalLinkSample
) -> float:
    """The same alternating double sum evaluated naively in IEEE doubles.

    Reference implementation for demonstrating why extended precision is
    required: at cluster sizes around K ~ 90 the returned value violates
    [0, 1] by many orders of magnitude.  Never use this for estimation.
    """
    theta = float(theta)
    k = int(k)
    q = worst_case_q(k, int(n_channels))
    ratios = link.ratio_powers()
    moments = np.empty(k + 1)
    moments[0] = 1.0
    for j in range(1, k + 1):
        moments[j] = _success_from_ratios(theta * j, ratios)
    total = 0.0
    for l in range(q, k + 1):
        for r in range(l + 1):
            term = float(math.comb(k, l)) * float(math.comb(l, r)) * moments[k - l + r]
            total += -term if r % 2 else term
    return 1.0 - total


def crs_fading_oracle(
    theta: float,
    k: int,
    n_channels: int,
    link: TypicalLinkSample,
    n_draws: int,
    rng: np.random.Generator,
) -> tuple[float, float]:
    """Monte Carlo estimate of the weakest scheduled link's success
    probability, simulating fading and the selection step that the
    semi-analytic evaluator integrates out.  Returns (estimate, stderr).
    """
    theta = float(theta)
    if not (theta > 0.0 and math.isfinite(theta)):
        raise ValueError(f"theta must be positive and finite, got {theta!r}")
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise ValueError(f"k must be a positive integer, got {k!r}")
    if not isinstance(n_draws, (int, np.integer)) or n_draws < 1:
        raise ValueError(f"n_draws must be >= 1, got {n_draws!r}")
    k = int(k)
    n_selected = min(k, int(n_channels))
    gains = rng.exponential(size=(int(n_draws), k))
    # the weakest of the n_selected largest gains per draw; identical in law
    # to scheduling via crs_assign and taking the weakest granted member
    h_weakest = np.partition(gains, k - n_selected, axis=1)[:, k - n_selected]
    ratios = link.ratio_powers()
    if ratios.size:
        interference = rng.exponential(size=(int(n_draws), ratios.size)) @ ratios
    else:
        interference = np.zeros(int(n_draws))
    successes = h_weakest > theta * interference
    estimate = float(successes.mean())
    stderr = math.sqrt(estimate * (1.0 - estimate) / int(n_draws))
    return estimate, stderr


def _one_realization(
    scheme: Scheme,
    params: SystemParams,
    p0: float,
    theta: float,
    model: InterferenceModel,
    settings: CrsEvalSettings,
    master_seed: int,
    index: int,
) -> float:
    rng = realization_rng(master_seed, index)
    while True:
        if model is InterferenceModel.THINNED:
            link = build_typical_link_thinned(params, p0, rng)
        else:
            link = build_typical_link_full(params, scheme, rng)
        if scheme is Scheme.RRS or link.k_typical >= 1:
            break
        # an empty typical cluster carries no link to measure; discard and redraw
    if scheme is Scheme.RRS:
        return _success_from_ratios(theta, link.ratio_powers())
    return crs_conditional_success(theta, link.k_typical, params.n_channels, link, settings).value


def _simulate_range(args) -> tuple[int, np.ndarray]:
    scheme, params, p0, theta, model, settings, master_seed, start, stop = args
    values = np.empty(stop - start)
    for i in range(start, stop):
        values[i - start] = _one_realization(
            scheme, params, p0, theta, model, settings, master_seed, i
        )
    return start, values


def simulate_conditional_success(
    scheme: Scheme,
    params: SystemParams,
    theta: float,
    n_realizations: int,
    interference_model: InterferenceModel = InterferenceModel.THINNED,
    settings: CrsEvalSettings | None = None,
    master_seed: int = 0,
    n_workers: int = 1,
) -> np.ndarray:
    """Per-realization conditional success probabilities, index-aligned.

    Realization i draws all of its randomness from the substream keyed by
    (master_seed, i), and the output array is assembled by index, so the
    result is bit-identical for any worker count.
    """
    theta = float(theta)
    if not (theta > 0.0 and math.isfinite(theta)):
        raise ValueError(f"theta must be positive and finite, got {theta!r}")
    if not isinstance(n_realizations, int) or n_realizations < 1:
        raise ValueError(f"n_realizations must be >= 1, got {n_realizations!r}")
    if not isinstance(scheme, Scheme):
        raise ValueError(f"scheme must be a Scheme, got {scheme!r}")
    if not isinstance(interference_model, InterferenceModel):
        raise ValueError(f"interference_model must be an InterferenceModel, got {interference_model!r}")
    if settings is None:
        settings = CrsEvalSettings()
    if scheme is Scheme.CRS and params.m_mean == 0.0:
        raise ValueError("CRS needs m_mean > 0: an empty typical cluster has no link to schedule")
    n_workers = max(1, int(n_workers))
    p0 = occupation_probability(params.n_channels, params.m_mean)

    if n_workers == 1:
        _, values = _simulate_range(
            (scheme, params, p0, theta, interference_model, settings, master_seed, 0, n_realizations)
        )
        return values

    chunk = max(1, min(4096, math.ceil(n_realizations / (4 * n_workers))))
    tasks = [
        (scheme, params, p0, theta, interference_model, settings, master_seed, start, min(start + chunk, n_realizations))
        for start in range(0, n_realizations, chunk)
    ]
    values = np.empty(n_realizations)
    with ProcessPoolExecutor(max_workers=n_workers) as pool:
        for start, block in pool.map(_simulate_range, tasks):
            values[start : start + block.size] = block
    return values


def curve_from_success_values(
    theta: float,
    x_grid: Sequence[float],
    values: np.ndarray,
    provenance: Provenance,
) -> MetaCurve:
    """Empirical CCDF of the conditional success probability over the grid,
    with 95% normal-approximation binomial half-widths.  The CCDF uses the
    strict inequality P_s > x."""
    x = np.asarray(x_grid, dtype=float)
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or values.size == 0:
        raise ValueError("values must be a nonempty one-dimensional array")
    n = values.size
    ordered = np.sort(values)
    counts = n - np.searchsorted(ordered, x, side="right")
    fractions = counts / n
    ci = _CI_Z * np.sqrt(fractions * (1.0 - fractions) / n)
    return MetaCurve(
        theta=float(theta),
        x=x,
        values=fractions,
        provenance=provenance,
        ci_halfwidth=ci,
        n_realizations=n,
    )


def estimate_meta_curve(
    scheme: Scheme,
    params: SystemParams,
    theta: float,
    x_grid: Sequence[float],
    n_realizations: int,
    interference_model: InterferenceModel = InterferenceModel.THINNED,
    settings: CrsEvalSettings | None = None,
    master_seed: int = 0,
    n_workers: int = 1,
) -> MetaCurve:
    """Empirical meta distribution curve for one scheme at one threshold."""
    values = simulate_conditional_success(
        scheme,
        params,
        theta,
        n_realizations,
        interference_model,
        settings,
        master_seed,
        n_workers,
    )
    provenance = Provenance.EMPIRICAL if scheme is Scheme.RRS else Provenance.SEMI_ANALYTIC
    return curve_from_success_values(theta, x_grid, values, provenance)


def empirical_success_probability(samples: Sequence[CondSuccessSample]) -> float:
    """Sample mean of conditional success probabilities: the standard success
    probability estimate."""
    if len(samples) == 0:
        raise ValueError("empirical_success_probability needs at least one sample")
    values = [s.value if isinstance(s, CondSuccessSample) else float(s) for s in samples]
    return float(np.mean(values))
