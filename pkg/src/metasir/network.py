"""Scenario parameters and spatial samplers for the aggregation network.

Aggregators form a homogeneous Poisson process on a disk; each serves
Poisson-many machine-type devices placed uniformly inside a cluster disk of
radius r_cluster (a Matern cluster process).  The typical aggregator sits at
the origin and, on any one channel, is interfered by at most one device per
other cluster.

Two interferer-field constructions are provided.  ``thinned`` places the
interfering devices directly as a Poisson process of density p0 * lambda_p,
which is the independent-thinning picture the closed forms are built on.
``full`` simulates the mechanism explicitly: parent aggregators, per-cluster
device counts, per-cluster channel occupation, and the actual displaced
device positions.  Comparing the two quantifies the thinning approximation.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .scheduling import Scheme

_TWO_PI = 2.0 * math.pi


class InterferenceModel(enum.Enum):
    THINNED = "thinned"
    FULL = "full"


@dataclass(frozen=True)
class SystemParams:
    """All scenario constants.

    lambda_p    aggregator density [1/m^2]
    n_channels  orthogonal channels per aggregator
    m_mean      mean devices per cluster (counts are Poisson)
    r_cluster   cluster disk radius [m]
    alpha       path-loss exponent (>= 2; closed forms need alpha = 4)
    sim_radius  simulation disk radius [m]
    rho         received-power target; inversion power control makes the
                SIR independent of it, so it stays at 1
    """

    lambda_p: float
    n_channels: int
    m_mean: float
    r_cluster: float
    alpha: float
    sim_radius: float
    rho: float = 1.0

    def __post_init__(self):
        if not (isinstance(self.n_channels, int) and not isinstance(self.n_channels, bool)):
            raise ValueError(f"n_channels must be an integer, got {self.n_channels!r}")
        if self.n_channels < 1:
            raise ValueError(f"n_channels must be >= 1, got {self.n_channels}")
        for name in ("lambda_p", "m_mean", "r_cluster", "alpha", "sim_radius", "rho"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
        if self.lambda_p <= 0.0:
            raise ValueError(f"lambda_p must be > 0, got {self.lambda_p}")
        if self.m_mean < 0.0:
            raise ValueError(f"m_mean must be >= 0, got {self.m_mean}")
        if self.r_cluster <= 0.0:
            raise ValueError(f"r_cluster must be > 0, got {self.r_cluster}")
        if self.alpha < 2.0:
            raise ValueError(f"alpha must be >= 2, got {self.alpha}")
        if self.sim_radius <= self.r_cluster:
            raise ValueError(
                f"sim_radius must exceed r_cluster, got {self.sim_radius} <= {self.r_cluster}"
            )
        if self.rho <= 0.0:
            raise ValueError(f"rho must be > 0, got {self.rho}")

    @property
    def mean_parents(self) -> float:
        """Expected aggregator count on the simulation disk."""
        return self.lambda_p * math.pi * self.sim_radius**2


@dataclass(frozen=True)
class Interferer:
    """One co-channel device: its serving-link distance and its distance to
    the typical aggregator.  The fading gain is drawn only inside Monte Carlo
    oracles, never stored; the deterministic interference ratio is
    (r_d / y)^alpha."""

    r_d: float
    y: float

    def __post_init__(self):
        if not (self.r_d > 0.0 and math.isfinite(self.r_d)):
            raise ValueError(f"r_d must be positive and finite, got {self.r_d!r}")
        if not (self.y > 0.0 and math.isfinite(self.y)):
            raise ValueError(f"y must be positive and finite, got {self.y!r}")


@dataclass(frozen=True)
class TypicalLinkSample:
    """One conditioned realization seen from the typical aggregator.

    r_d[i] and y[i] describe interferer i; k_typical is the device count of
    the typical cluster (consumed by CRS evaluation only).  alpha is the
    path-loss exponent the distances are meant to be combined under.
    """

    r_d: np.ndarray
    y: np.ndarray
    k_typical: int
    alpha: float

    def __post_init__(self):
        r_d = np.atleast_1d(np.asarray(self.r_d, dtype=float))
        y = np.atleast_1d(np.asarray(self.y, dtype=float))
        object.__setattr__(self, "r_d", r_d)
        object.__setattr__(self, "y", y)
        if r_d.shape != y.shape or r_d.ndim != 1:
            raise ValueError("r_d and y must be one-dimensional arrays of equal length")
        if r_d.size and (not np.all(r_d > 0.0) or not np.all(np.isfinite(r_d))):
            raise ValueError("all r_d must be positive and finite")
        if y.size and (not np.all(y > 0.0) or not np.all(np.isfinite(y))):
            raise ValueError("all y must be positive and finite")
        if not (isinstance(self.k_typical, (int, np.integer)) and self.k_typical >= 0):
            raise ValueError(f"k_typical must be a nonnegative integer, got {self.k_typical!r}")
        object.__setattr__(self, "k_typical", int(self.k_typical))
        if not (self.alpha >= 2.0 and math.isfinite(self.alpha)):
            raise ValueError(f"alpha must be finite and >= 2, got {self.alpha!r}")

    @property
    def n_interferers(self) -> int:
        return int(self.r_d.size)

    @property
    def interferers(self) -> tuple[Interferer, ...]:
        return tuple(Interferer(float(r), float(d)) for r, d in zip(self.r_d, self.y))

    def ratio_powers(self, alpha: float | None = None) -> np.ndarray:
        """(r_d / y)^alpha for every interferer; defaults to the sample's own
        exponent."""
        a = self.alpha if alpha is None else float(alpha)
        return (self.r_d / self.y) ** a


def realization_rng(master_seed: int, index: int) -> np.random.Generator:
    """Independent substream for one realization, keyed by (seed, index).

    Philox is counter-based: the 128-bit key (master_seed, index) yields the
    same stream no matter which worker draws it, which is what makes parallel
    runs bit-identical to serial ones.
    """
    if not (0 <= master_seed < 2**64):
        raise ValueError(f"master_seed must fit in 64 bits, got {master_seed!r}")
    if not (0 <= index < 2**64):
        raise ValueError(f"index must fit in 64 bits, got {index!r}")
    key = np.array([master_seed, index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _disk_radii(radius: float, n: int, rng: np.random.Generator) -> np.ndarray:
    # distance-from-center of uniform points on a disk: CDF (r/R)^2, support (0, R]
    return radius * np.sqrt(1.0 - rng.random(n))


def sample_parents(params: SystemParams, rng: np.random.Generator) -> np.ndarray:
    """Aggregator positions: a homogeneous Poisson process on the simulation
    disk, returned as an (n, 2) array."""
    n = int(rng.poisson(params.mean_parents))
    radii = _disk_radii(params.sim_radius, n, rng)
    angles = _TWO_PI * rng.random(n)
    return np.column_stack((radii * np.cos(angles), radii * np.sin(angles)))


def sample_offspring_distance(r_cluster: float, rng: np.random.Generator, size=None):
    """Device-to-aggregator distance with density 2 r / r_cluster^2 on
    (0, r_cluster]: r = r_cluster * sqrt(u)."""
    if not (r_cluster > 0.0 and math.isfinite(r_cluster)):
        raise ValueError(f"r_cluster must be positive and finite, got {r_cluster!r}")
    u = rng.random(size)
    if size is None:
        return r_cluster * math.sqrt(1.0 - u)
    return r_cluster * np.sqrt(1.0 - u)


def build_typical_link_thinned(
    params: SystemParams, p0: float, rng: np.random.Generator
) -> TypicalLinkSample:
    """Interferer field as an independently thinned Poisson process.

    Interfering devices are dropped directly on the simulation disk with
    density p0 * lambda_p; each carries its own serving-link distance.  This
    is the interference model the closed forms assume.
    """
    p0 = float(p0)
    if not (0.0 <= p0 <= 1.0):
        raise ValueError(f"p0 must lie in [0, 1], got {p0!r}")
    mean_count = p0 * params.mean_parents
    n = int(rng.poisson(mean_count))
    y = _disk_radii(params.sim_radius, n, rng)
    r_d = sample_offspring_distance(params.r_cluster, rng, size=n)
    k_typical = int(rng.poisson(params.m_mean))
    return TypicalLinkSample(r_d=r_d, y=y, k_typical=k_typical, alpha=params.alpha)


def build_typical_link_full(
    params: SystemParams, scheme: Scheme, rng: np.random.Generator
) -> TypicalLinkSample:
    """Interferer field built from the explicit mechanism.

    Parent aggregators are sampled on the disk; each draws its own device
    count K_i and occupies the typical link's channel with probability
    min(K_i, N) / N.  An occupying cluster contributes one device at the
    aggregator's position displaced by an offspring offset, and y is measured
    to the displaced device, not to its parent.

    Which member a cluster schedules depends on the scheme, but the scheduled
    member's position is exchangeable with any other member's and its fading
    toward the typical aggregator is independent of the gains the selection
    looked at, so the interferer field itself is scheme-independent.
    """
    if not isinstance(scheme, Scheme):
        raise ValueError(f"scheme must be a Scheme, got {scheme!r}")
    parents = sample_parents(params, rng)
    n_parents = parents.shape[0]
    k_counts = rng.poisson(params.m_mean, size=n_parents)
    occupation = np.minimum(k_counts, params.n_channels) / params.n_channels
    occupied = rng.random(n_parents) < occupation
    centers = parents[occupied]
    n = centers.shape[0]
    r_d = sample_offspring_distance(params.r_cluster, rng, size=n)
    angles = _TWO_PI * rng.random(n)
    positions = centers + np.column_stack((r_d * np.cos(angles), r_d * np.sin(angles)))
    y = np.hypot(positions[:, 0], positions[:, 1])
    k_typical = int(rng.poisson(params.m_mean))
    return TypicalLinkSample(r_d=r_d, y=y, k_typical=k_typical, alpha=params.alpha)
