import math
from dataclasses import replace

import numpy as np
import pytest

from metasir.network import (
    Interferer,
    SystemParams,
    TypicalLinkSample,
    build_typical_link_full,
    build_typical_link_thinned,
    realization_rng,
    sample_offspring_distance,
    sample_parents,
)
from metasir.scheduling import Scheme, occupation_probability


class TestSystemParams:
    def test_mean_parents_reference_value(self, reference_system):
        # 3e-6 * pi * 3000^2: about 84.8 aggregators on the disk
        assert reference_system.mean_parents == pytest.approx(84.823, abs=1e-3)

    @pytest.mark.parametrize(
        "field,value",
        [
            ("lambda_p", 0.0),
            ("lambda_p", -1e-6),
            ("n_channels", 0),
            ("n_channels", 2.5),
            ("m_mean", -1.0),
            ("r_cluster", 0.0),
            ("alpha", 1.5),
            ("sim_radius", 10.0),  # must exceed r_cluster = 40
            ("rho", 0.0),
        ],
    )
    def test_rejects_invalid(self, reference_system, field, value):
        kwargs = {
            "lambda_p": reference_system.lambda_p,
            "n_channels": reference_system.n_channels,
            "m_mean": reference_system.m_mean,
            "r_cluster": reference_system.r_cluster,
            "alpha": reference_system.alpha,
            "sim_radius": reference_system.sim_radius,
        }
        kwargs[field] = value
        with pytest.raises(ValueError):
            SystemParams(**kwargs)


class TestInterferer:
    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            Interferer(r_d=0.0, y=1.0)
        with pytest.raises(ValueError):
            Interferer(r_d=1.0, y=0.0)


class TestTypicalLinkSample:
    def test_ratio_powers_and_views(self):
        link = TypicalLinkSample(r_d=[2.0, 3.0], y=[4.0, 6.0], k_typical=5, alpha=4.0)
        assert link.n_interferers == 2
        assert np.allclose(link.ratio_powers(), [0.5**4, 0.5**4])
        assert np.allclose(link.ratio_powers(2.0), [0.25, 0.25])
        assert link.interferers == (Interferer(2.0, 4.0), Interferer(3.0, 6.0))

    def test_empty_link(self):
        link = TypicalLinkSample(r_d=[], y=[], k_typical=0, alpha=4.0)
        assert link.n_interferers == 0
        assert link.ratio_powers().size == 0

    def test_rejects_mismatched_and_invalid(self):
        with pytest.raises(ValueError):
            TypicalLinkSample(r_d=[1.0], y=[1.0, 2.0], k_typical=0, alpha=4.0)
        with pytest.raises(ValueError):
            TypicalLinkSample(r_d=[-1.0], y=[1.0], k_typical=0, alpha=4.0)
        with pytest.raises(ValueError):
            TypicalLinkSample(r_d=[1.0], y=[1.0], k_typical=-1, alpha=4.0)


class TestRealizationRng:
    def test_keyed_streams(self):
        a = realization_rng(42, 7).random(6)
        b = realization_rng(42, 7).random(6)
        c = realization_rng(42, 8).random(6)
        d = realization_rng(43, 7).random(6)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)
        assert not np.array_equal(a, d)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            realization_rng(-1, 0)
        with pytest.raises(ValueError):
            realization_rng(2**64, 0)


class TestSampleParents:
    def test_empirical_mean_count(self, reference_system):
        n_draws = 10_000
        counts = np.array(
            [sample_parents(reference_system, realization_rng(11, i)).shape[0] for i in range(n_draws)]
        )
        expected = reference_system.mean_parents
        stderr = math.sqrt(expected / n_draws)
        assert abs(counts.mean() - expected) <= 3 * stderr

    def test_points_inside_disk(self, reference_system, rng):
        points = sample_parents(reference_system, rng)
        assert np.all(np.hypot(points[:, 0], points[:, 1]) <= reference_system.sim_radius)

    def test_vanishing_density_gives_empty(self, reference_system, rng):
        sparse = replace(reference_system, lambda_p=1e-15)
        for i in range(100):
            assert sample_parents(sparse, realization_rng(3, i)).shape[0] == 0


class TestOffspringDistance:
    def test_scalar_and_vector_support(self, rng):
        scalar = sample_offspring_distance(40.0, rng)
        assert isinstance(scalar, float) and 0.0 < scalar <= 40.0
        vector = sample_offspring_distance(40.0, rng, size=10_000)
        assert vector.shape == (10_000,)
        assert np.all((vector > 0.0) & (vector <= 40.0))

    def test_mean_two_thirds_radius(self):
        rng = np.random.default_rng(5)
        n = 100_000
        samples = sample_offspring_distance(40.0, rng, size=n)
        # Var r = R^2/18 for the triangular-in-r density
        stderr = 40.0 / math.sqrt(18 * n)
        assert abs(samples.mean() - 2 * 40.0 / 3) <= 3 * stderr

    def test_cdf_is_quadratic(self):
        rng = np.random.default_rng(6)
        n = 200_000
        samples = np.sort(sample_offspring_distance(40.0, rng, size=n))
        grid = np.linspace(1.0, 39.0, 100)
        empirical = np.searchsorted(samples, grid, side="right") / n
        analytic = (grid / 40.0) ** 2
        assert np.max(np.abs(empirical - analytic)) <= 1.628 / math.sqrt(n)

    def test_rejects_bad_radius(self, rng):
        with pytest.raises(ValueError):
            sample_offspring_distance(0.0, rng)


class TestThinnedModel:
    def test_zero_thinning_gives_no_interferers(self, reference_system, rng):
        link = build_typical_link_thinned(reference_system, 0.0, rng)
        assert link.n_interferers == 0

    def test_mean_interferer_count(self, reference_system):
        p0 = 0.6
        n_draws = 8000
        counts = np.array(
            [
                build_typical_link_thinned(reference_system, p0, realization_rng(21, i)).n_interferers
                for i in range(n_draws)
            ]
        )
        expected = p0 * reference_system.mean_parents
        stderr = math.sqrt(expected / n_draws)
        assert abs(counts.mean() - expected) <= 3 * stderr

    def test_paper_point_has_85_expected_interferers(self, reference_system):
        p0 = occupation_probability(reference_system.n_channels, reference_system.m_mean)
        assert p0 * reference_system.mean_parents == pytest.approx(84.823, abs=1e-2)

    def test_support_bounds_and_k(self, reference_system):
        link = build_typical_link_thinned(reference_system, 1.0, realization_rng(4, 0))
        assert np.all(link.y > 0.0) and np.all(link.y <= reference_system.sim_radius)
        assert np.all(link.r_d > 0.0) and np.all(link.r_d <= reference_system.r_cluster)
        assert link.k_typical >= 0

    def test_nearest_interferer_distance_law(self, reference_system):
        # closest point of a Poisson field: P(min y <= r) = 1 - exp(-p0 lam pi r^2)
        p0 = 0.8
        n_draws = 4000
        nearest = np.sort(
            [
                build_typical_link_thinned(reference_system, p0, realization_rng(31, i)).y.min()
                for i in range(n_draws)
            ]
        )
        rate = p0 * reference_system.lambda_p * math.pi
        grid = np.linspace(10.0, 600.0, 100)
        empirical = np.searchsorted(nearest, grid, side="right") / n_draws
        analytic = 1.0 - np.exp(-rate * grid**2)
        assert np.max(np.abs(empirical - analytic)) <= 1.628 / math.sqrt(n_draws)

    def test_k_typical_poisson_mean(self, reference_system):
        n_draws = 4000
        ks = np.array(
            [
                build_typical_link_thinned(reference_system, 0.0, realization_rng(41, i)).k_typical
                for i in range(n_draws)
            ]
        )
        stderr = math.sqrt(reference_system.m_mean / n_draws)
        assert abs(ks.mean() - reference_system.m_mean) <= 3 * stderr

    def test_deterministic_given_stream(self, reference_system):
        a = build_typical_link_thinned(reference_system, 0.9, realization_rng(2, 5))
        b = build_typical_link_thinned(reference_system, 0.9, realization_rng(2, 5))
        assert np.array_equal(a.r_d, b.r_d) and np.array_equal(a.y, b.y)
        assert a.k_typical == b.k_typical

    def test_rejects_bad_p0(self, reference_system, rng):
        with pytest.raises(ValueError):
            build_typical_link_thinned(reference_system, 1.5, rng)


class TestFullModel:
    def test_no_devices_no_interferers(self, reference_system, rng):
        empty = replace(reference_system, m_mean=0.0)
        link = build_typical_link_full(empty, Scheme.RRS, rng)
        assert link.n_interferers == 0

    def test_huge_channel_count_suppresses_occupation(self, reference_system):
        airy = replace(reference_system, n_channels=10**6)
        counts = [
            build_typical_link_full(airy, Scheme.RRS, realization_rng(51, i)).n_interferers
            for i in range(200)
        ]
        assert np.mean(counts) < 0.05

    def test_counts_match_thinned_model(self, reference_system):
        # occupation thinning of a Poisson parent process is again Poisson with
        # rate p0 * lambda_p, so both constructions must agree in distribution
        p0 = occupation_probability(reference_system.n_channels, reference_system.m_mean)
        n_draws = 10_000
        full = np.array(
            [
                build_typical_link_full(reference_system, Scheme.CRS, realization_rng(61, i)).n_interferers
                for i in range(n_draws)
            ]
        )
        thinned = np.array(
            [
                build_typical_link_thinned(reference_system, p0, realization_rng(62, i)).n_interferers
                for i in range(n_draws)
            ]
        )
        z = (full.mean() - thinned.mean()) / math.sqrt(full.var() / n_draws + thinned.var() / n_draws)
        assert abs(z) < 2.576  # two-sample mean test at the 1% level

    def test_support_bounds(self, reference_system):
        link = build_typical_link_full(reference_system, Scheme.RRS, realization_rng(71, 0))
        assert np.all(link.r_d > 0.0) and np.all(link.r_d <= reference_system.r_cluster)
        assert np.all(link.y > 0.0)
        assert np.all(link.y <= reference_system.sim_radius + reference_system.r_cluster)

    def test_displacement_can_cross_the_disk_edge(self, reference_system):
        # y is measured to the displaced device, so devices of edge clusters
        # may land beyond the simulation radius
        crossed = False
        for i in range(300):
            link = build_typical_link_full(reference_system, Scheme.RRS, realization_rng(81, i))
            if link.n_interferers and link.y.max() > reference_system.sim_radius:
                crossed = True
                break
        assert crossed

    def test_scheme_validated(self, reference_system, rng):
        with pytest.raises(ValueError):
            build_typical_link_full(reference_system, "rrs", rng)
