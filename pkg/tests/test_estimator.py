import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from metasir import estimator
from metasir.estimator import (
    CondSuccessSample,
    CrsEvalSettings,
    CrsPrecisionError,
    MetaCurve,
    Provenance,
    _crs_weights,
    crs_conditional_success,
    crs_conditional_success_float64,
    crs_fading_oracle,
    curve_from_success_values,
    empirical_success_probability,
    estimate_meta_curve,
    rrs_conditional_success,
    sample_beta,
    simulate_conditional_success,
    worst_case_q,
)
from metasir.network import InterferenceModel, TypicalLinkSample
from metasir.scheduling import Scheme, crs_assign

SETTINGS = CrsEvalSettings()


def make_link(ratios, k_typical=1, alpha=4.0):
    ratios = np.asarray(ratios, dtype=float)
    return TypicalLinkSample(r_d=ratios ** (1.0 / alpha), y=np.ones(ratios.size), k_typical=k_typical, alpha=alpha)


ratio_lists = st.lists(st.floats(min_value=1e-4, max_value=10.0), min_size=0, max_size=12)


class TestCondSuccessSample:
    def test_bounds_enforced(self):
        CondSuccessSample(0.0)
        CondSuccessSample(1.0)
        with pytest.raises(ValueError):
            CondSuccessSample(1.0 + 1e-9)
        with pytest.raises(ValueError):
            CondSuccessSample(-1e-9)


class TestCrsEvalSettings:
    def test_floor(self):
        with pytest.raises(ValueError):
            CrsEvalSettings(precision_bits=52)
        with pytest.raises(ValueError):
            CrsEvalSettings(oracle_fading_draws=0)


class TestRrsConditionalSuccess:
    def test_empty_product(self):
        assert rrs_conditional_success(1.0, make_link([])).value == 1.0

    def test_unit_ratio(self):
        link = TypicalLinkSample(r_d=[7.0], y=[7.0], k_typical=1, alpha=4.0)
        assert rrs_conditional_success(2.0, link).value == pytest.approx(1.0 / 3.0, rel=1e-14)

    def test_matches_fading_simulation(self):
        rng = np.random.default_rng(17)
        link = make_link(10.0 ** rng.uniform(-3, 0.5, size=8))
        theta = 0.7
        exact = rrs_conditional_success(theta, link).value
        draws = 100_000
        h = rng.exponential(size=draws)
        interference = rng.exponential(size=(draws, 8)) @ link.ratio_powers()
        estimate = float((h > theta * interference).mean())
        stderr = math.sqrt(estimate * (1 - estimate) / draws)
        assert abs(exact - estimate) <= 3 * stderr + 1e-4

    @given(ratio_lists, st.floats(min_value=0.01, max_value=10.0))
    @settings(max_examples=50)
    def test_bounds_and_theta_monotonicity(self, ratios, theta):
        link = make_link(ratios)
        value = rrs_conditional_success(theta, link).value
        assert 0.0 < value <= 1.0
        assert rrs_conditional_success(theta * 2.0, link).value <= value + 1e-15

    def test_stronger_interferer_cannot_help(self):
        base = make_link([0.1, 0.2])
        worse = make_link([0.1, 0.4])
        assert rrs_conditional_success(1.0, worse).value < rrs_conditional_success(1.0, base).value

    def test_rejects_bad_theta(self):
        with pytest.raises(ValueError):
            rrs_conditional_success(0.0, make_link([0.1]))


class TestSampleBeta:
    def test_empty(self):
        assert sample_beta(make_link([]), 4.0) == 0.0

    def test_single_interferer_arithmetic(self):
        link = TypicalLinkSample(r_d=[20.0], y=[200.0], k_typical=1, alpha=4.0)
        assert sample_beta(link, 4.0) == pytest.approx(1e-4, rel=1e-12)

    @given(ratio_lists, st.floats(min_value=0.01, max_value=5.0))
    @settings(max_examples=50)
    def test_exponential_bound_direction(self, ratios, theta):
        # 1 + z <= e^z gives e^{-theta beta} <= prod (1 + theta c)^{-1} exactly,
        # so the closed-form approximation never overstates the success probability
        link = make_link(ratios)
        beta = sample_beta(link, 4.0)
        product = rrs_conditional_success(theta, link).value
        assert math.exp(-theta * beta) <= product + 1e-15


class TestApproximationGap:
    def test_mean_gap_at_reference_parameters(self, reference_system, reference_analytic):
        # the exponential bound understates success; at the reference
        # parameters the mean shortfall sits near 1.5e-3 at theta = 0 dB
        n = 10_000
        from metasir.network import build_typical_link_thinned, realization_rng

        gaps = np.empty(n)
        for i in range(n):
            link = build_typical_link_thinned(reference_system, reference_analytic.p0, realization_rng(55, i))
            exact = rrs_conditional_success(1.0, link).value
            gaps[i] = exact - math.exp(-sample_beta(link, 4.0))
        mean_gap = float(gaps.mean())
        assert np.all(gaps >= -1e-15)
        assert 0.0 < mean_gap <= 2.5e-3


class TestWorstCaseQ:
    def test_regimes(self):
        assert worst_case_q(60, 20) == 41
        assert worst_case_q(20, 20) == 1
        assert worst_case_q(5, 20) == 1


class TestCrsWeights:
    def test_hand_case_k3_n1(self):
        weights, _, _ = _crs_weights(3, 3)
        assert weights == (1, -3, 3, -1)

    @pytest.mark.parametrize("k,q", [(1, 1), (4, 2), (12, 5), (30, 11), (60, 41)])
    def test_weights_sum_to_zero(self, k, q):
        weights, _, _ = _crs_weights(k, q)
        assert sum(weights) == 0

    @pytest.mark.parametrize("k,q", [(4, 2), (7, 3), (9, 9)])
    def test_collapse_matches_double_sum(self, k, q):
        # oracle: evaluate both forms on random moments with exact fractions
        from fractions import Fraction

        rng = np.random.default_rng(k * 100 + q)
        moments = [Fraction(1)] + [
            Fraction(int(rng.integers(1, 1000)), 1000) for _ in range(k)
        ]
        direct = Fraction(0)
        for l in range(q, k + 1):
            for r in range(l + 1):
                term = math.comb(k, l) * math.comb(l, r) * moments[k - l + r]
                direct += -term if r % 2 else term
        weights, _, _ = _crs_weights(k, q)
        collapsed = sum(w * m for w, m in zip(weights, moments))
        assert collapsed == direct


class TestCrsConditionalSuccess:
    def test_no_interferers_is_one(self):
        for k, n in ((1, 1), (5, 2), (40, 20)):
            link = make_link([], k_typical=k)
            assert crs_conditional_success(1.0, k, n, link, SETTINGS).value == pytest.approx(
                1.0, abs=1e-12
            )

    def test_single_candidate_degenerates_to_rrs(self):
        link = make_link([0.37])
        value = crs_conditional_success(1.5, 1, 1, link, SETTINGS).value
        assert value == pytest.approx(rrs_conditional_success(1.5, link).value, rel=1e-12)

    def test_hand_case_three_candidates_one_channel(self):
        link = make_link([1.0])
        value = crs_conditional_success(1.0, 3, 1, link, SETTINGS).value
        # E[3 e^{-I} - 3 e^{-2I} + e^{-3I}] with deterministic ratio 1:
        # 3/2 - 3/3 + 1/4 = 0.75
        assert value == pytest.approx(0.75, abs=1e-12)

    def test_k_equals_n_is_minimum_of_exponentials(self):
        rng = np.random.default_rng(23)
        ratios = 10.0 ** rng.uniform(-2, 0.5, size=6)
        link = make_link(ratios)
        n = 4
        value = crs_conditional_success(0.8, n, n, link, SETTINGS).value
        # the weakest of N scheduled gains is the minimum, an Exp(N) variable
        product = float(np.prod(1.0 / (1.0 + 0.8 * n * ratios)))
        assert value == pytest.approx(product, rel=1e-12)
        # brute-force expansion of the full order-statistic double sum
        brute = crs_conditional_success_float64(0.8, n, n, link)
        assert value == pytest.approx(brute, rel=1e-10)

    def test_nondecreasing_in_k_beyond_n(self):
        link = make_link([0.5, 1.2, 0.05])
        n = 3
        values = [
            crs_conditional_success(1.0, k, n, link, SETTINGS).value for k in range(n, n + 7)
        ]
        assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))

    @pytest.mark.parametrize("case", range(4))
    def test_matches_fading_oracle_small_cases(self, case):
        rng = np.random.default_rng(900 + case)
        k = int(rng.integers(1, 13))
        n = int(rng.integers(1, 6))
        link = make_link(10.0 ** rng.uniform(-3, 1, size=int(rng.integers(0, 11))), k_typical=k)
        exact = crs_conditional_success(1.0, k, n, link, SETTINGS).value
        estimate, stderr = crs_fading_oracle(1.0, k, n, link, 40_000, rng)
        assert abs(exact - estimate) <= 3 * stderr + 1.25e-4

    def test_large_k_lands_in_unit_interval(self):
        rng = np.random.default_rng(31)
        link = make_link(10.0 ** rng.uniform(-3, 1, size=40))
        for k in (60, 95):
            value = crs_conditional_success(1.0, k, 20, link, SETTINGS).value
            assert 0.0 <= value <= 1.0

    def test_precision_failure_raises(self, monkeypatch):
        # weak interference keeps every moment near 1, which maximises the
        # alternating-mass cancellation: 53 bits cannot land in [0, 1]
        rng = np.random.default_rng(37)
        link = make_link(10.0 ** rng.uniform(-6, -4, size=30))
        monkeypatch.setattr(estimator, "_required_precision", lambda *a: 53)
        with pytest.raises(CrsPrecisionError):
            crs_conditional_success(1.0, 80, 20, link, SETTINGS)

    def test_rejects_bad_arguments(self):
        link = make_link([0.1])
        with pytest.raises(ValueError):
            crs_conditional_success(1.0, 0, 1, link, SETTINGS)
        with pytest.raises(ValueError):
            crs_conditional_success(-1.0, 3, 1, link, SETTINGS)


class TestCrsFloat64Reference:
    def test_catastrophic_cancellation_at_large_k(self):
        # ratios at the scale the deployment actually produces (distant
        # interferers, moments near 1); doubles lose ~90 bits to cancellation
        rng = np.random.default_rng(41)
        link = make_link(10.0 ** rng.uniform(-6, -4, size=30))
        naive = crs_conditional_success_float64(1.0, 95, 20, link)
        assert naive < -1.0 or naive > 2.0  # way outside [0, 1]
        exact = crs_conditional_success(1.0, 95, 20, link, SETTINGS).value
        assert 0.0 <= exact <= 1.0

    def test_agrees_at_small_k(self):
        link = make_link([0.3, 0.9])
        naive = crs_conditional_success_float64(1.0, 4, 2, link)
        exact = crs_conditional_success(1.0, 4, 2, link, SETTINGS).value
        assert naive == pytest.approx(exact, abs=1e-9)


class TestCrsFadingOracle:
    def test_no_interferers(self, rng):
        estimate, stderr = crs_fading_oracle(1.0, 4, 2, make_link([]), 1000, rng)
        assert estimate == 1.0 and stderr == 0.0

    def test_single_candidate_unit_ratio(self):
        rng = np.random.default_rng(43)
        estimate, stderr = crs_fading_oracle(1.0, 1, 1, make_link([1.0]), 100_000, rng)
        assert abs(estimate - 0.5) <= 3 * stderr

    def test_weakest_selected_matches_crs_assign(self):
        rng = np.random.default_rng(47)
        for _ in range(100):
            k = int(rng.integers(1, 10))
            n = int(rng.integers(1, 6))
            gains = rng.exponential(size=k)
            n_sel = min(k, n)
            via_assign = min(gains[list(crs_assign(gains, n).selected)])
            via_partition = np.partition(gains, k - n_sel)[k - n_sel]
            assert via_assign == via_partition


class TestSimulateAndCurves:
    def test_worker_count_is_invisible(self, reference_system):
        kwargs = dict(
            params=replace(reference_system, m_mean=5.0),
            theta=1.0,
            n_realizations=60,
            interference_model=InterferenceModel.THINNED,
            settings=SETTINGS,
            master_seed=99,
        )
        for scheme in (Scheme.RRS, Scheme.CRS):
            serial = simulate_conditional_success(scheme, n_workers=1, **kwargs)
            two = simulate_conditional_success(scheme, n_workers=2, **kwargs)
            eight = simulate_conditional_success(scheme, n_workers=8, **kwargs)
            assert np.array_equal(serial, two)
            assert np.array_equal(serial, eight)

    def test_no_interference_curve_is_one(self, reference_system):
        sparse = replace(reference_system, lambda_p=1e-14)
        curve = estimate_meta_curve(
            Scheme.RRS, sparse, 1.0, (0.0, 0.5, 0.99), 50, InterferenceModel.THINNED, None, 1
        )
        assert np.all(curve.values == 1.0)
        assert curve.provenance is Provenance.EMPIRICAL

    def test_full_model_path_runs(self, reference_system):
        small = replace(reference_system, m_mean=4.0)
        values = simulate_conditional_success(
            Scheme.CRS, small, 1.0, 40, InterferenceModel.FULL, SETTINGS, 3
        )
        assert np.all((values >= 0.0) & (values <= 1.0))

    def test_empty_cluster_redraw_in_crs(self, reference_system):
        # with m = 0.1 most clusters are empty; the estimator must keep
        # redrawing until a populated one appears
        tiny = replace(reference_system, m_mean=0.1)
        values = simulate_conditional_success(
            Scheme.CRS, tiny, 1.0, 30, InterferenceModel.THINNED, SETTINGS, 5
        )
        assert values.shape == (30,)
        assert np.all((values >= 0.0) & (values <= 1.0))

    def test_crs_rejects_zero_mean_cluster(self, reference_system):
        with pytest.raises(ValueError):
            simulate_conditional_success(
                Scheme.CRS, replace(reference_system, m_mean=0.0), 1.0, 5,
                InterferenceModel.THINNED, SETTINGS, 1,
            )

    def test_strict_inequality_in_ccdf(self):
        values = np.array([0.5, 0.9])
        curve = curve_from_success_values(1.0, (0.5, 0.7), values, Provenance.EMPIRICAL)
        assert curve.values[0] == 0.5  # 0.5 is not > 0.5
        assert curve.values[1] == 0.5
        assert curve.n_realizations == 2

    def test_ci_halfwidth_formula(self):
        values = np.concatenate([np.full(30, 0.2), np.full(70, 0.9)])
        curve = curve_from_success_values(1.0, (0.5,), values, Provenance.EMPIRICAL)
        p = 0.7
        assert curve.values[0] == pytest.approx(p)
        assert curve.ci_halfwidth[0] == pytest.approx(1.96 * math.sqrt(p * (1 - p) / 100), rel=1e-3)


class TestMetaCurve:
    def test_grid_property(self):
        curve = MetaCurve(
            theta=1.0, x=np.array([0.1, 0.2]), values=np.array([0.9, 0.8]),
            provenance=Provenance.ANALYTIC,
        )
        assert curve.grid == ((0.1, 0.9), (0.2, 0.8))

    def test_rejects_increasing_values(self):
        with pytest.raises(ValueError):
            MetaCurve(
                theta=1.0, x=np.array([0.1, 0.2]), values=np.array([0.5, 0.8]),
                provenance=Provenance.ANALYTIC,
            )

    def test_tolerates_noise_within_ci(self):
        with pytest.warns(RuntimeWarning):
            MetaCurve(
                theta=1.0, x=np.array([0.1, 0.2]), values=np.array([0.500, 0.505]),
                provenance=Provenance.EMPIRICAL, ci_halfwidth=np.array([0.02, 0.02]),
            )

    def test_rejects_bad_grids(self):
        with pytest.raises(ValueError):
            MetaCurve(theta=1.0, x=np.array([0.2, 0.1]), values=np.array([0.9, 0.8]),
                      provenance=Provenance.ANALYTIC)
        with pytest.raises(ValueError):
            MetaCurve(theta=1.0, x=np.array([0.1, 1.2]), values=np.array([0.9, 0.8]),
                      provenance=Provenance.ANALYTIC)


class TestEmpiricalSuccessProbability:
    def test_all_ones(self):
        samples = [CondSuccessSample(1.0)] * 5
        assert empirical_success_probability(samples) == 1.0

    def test_mean(self):
        samples = [CondSuccessSample(v) for v in (0.2, 0.4, 0.9)]
        assert empirical_success_probability(samples) == pytest.approx(0.5)

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            empirical_success_probability([])

    def test_equals_integral_of_ccdf(self, reference_system):
        values = simulate_conditional_success(
            Scheme.RRS, reference_system, 1.0, 4000, InterferenceModel.THINNED, None, 13
        )
        grid = np.linspace(0.0, 1.0, 2001)
        curve = curve_from_success_values(1.0, grid, values, Provenance.EMPIRICAL)
        integral = float(np.trapezoid(curve.values, grid))
        assert integral == pytest.approx(float(values.mean()), abs=2e-3)
