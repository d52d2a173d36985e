import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import kstest

from shotgamma.arrivals import (
    ArrivalTrajectory,
    ShockTrajectory,
    ShotNoiseParams,
    expected_intensity,
    expected_num_arrivals,
    intensity_at,
    simulate_arrival_batch,
    simulate_arrivals,
    simulate_shocks,
)
from shotgamma.errors import ValidationError
from shotgamma.special import integrate

BENCH_SCENARIO = ShotNoiseParams(lambda0=1.0, mu=2.0, delta=0.5)


class TestTypes:
    def test_parameter_validation(self):
        with pytest.raises(ValidationError):
            ShotNoiseParams(-0.1, 2.0, 0.5)
        with pytest.raises(ValidationError):
            ShotNoiseParams(1.0, -1.0, 0.5)
        with pytest.raises(ValidationError):
            ShotNoiseParams(1.0, 2.0, 0.0)

    def test_trajectory_validation(self):
        with pytest.raises(ValidationError):
            ShockTrajectory(horizon=1.0, shock_times=np.array([0.5, 0.4]))
        with pytest.raises(ValidationError):
            ShockTrajectory(horizon=1.0, shock_times=np.array([0.5, 1.5]))
        with pytest.raises(ValidationError):
            ArrivalTrajectory(horizon=0.0, arrival_times=np.array([]))

    def test_stationary_intensity(self):
        assert BENCH_SCENARIO.stationary_intensity == pytest.approx(5.0)


class TestIntensity:
    def test_no_shocks_gives_base_level(self):
        shocks = ShockTrajectory(horizon=10.0, shock_times=np.array([]))
        assert intensity_at(BENCH_SCENARIO, shocks, 3.0) == pytest.approx(1.0)

    def test_unit_jump_at_shock(self):
        shocks = ShockTrajectory(horizon=10.0, shock_times=np.array([2.0]))
        assert intensity_at(BENCH_SCENARIO, shocks, 2.0) == pytest.approx(2.0)
        assert intensity_at(BENCH_SCENARIO, shocks, 1.999) == pytest.approx(1.0)

    def test_two_shock_example(self):
        shocks = ShockTrajectory(horizon=5.0, shock_times=np.array([1.0, 2.0]))
        # 1 + e^{-1} + e^{-0.5}, direct evaluation
        assert intensity_at(BENCH_SCENARIO, shocks, 3.0) == pytest.approx(
            1.9744101008840757, rel=1e-12
        )

    def test_outside_horizon(self):
        shocks = ShockTrajectory(horizon=5.0, shock_times=np.array([1.0]))
        with pytest.raises(ValidationError):
            intensity_at(BENCH_SCENARIO, shocks, 6.0)


class TestExpectedValues:
    def test_expected_intensity_endpoints(self):
        assert expected_intensity(BENCH_SCENARIO, 0.0) == pytest.approx(1.0)
        assert expected_intensity(BENCH_SCENARIO, 1e9) == pytest.approx(5.0)

    def test_expected_intensity_closed_form(self):
        assert expected_intensity(BENCH_SCENARIO, 2.0) == pytest.approx(
            3.5284822353142307, rel=1e-12
        )

    def test_expected_intensity_monotone(self):
        s = np.linspace(0.0, 30.0, 500)
        assert np.all(np.diff(expected_intensity(BENCH_SCENARIO, s)) > 0)

    def test_expected_num_arrivals_at_zero(self):
        assert expected_num_arrivals(BENCH_SCENARIO, 0.0) == 0.0

    def test_expected_num_arrivals_poisson_degenerate(self):
        params = ShotNoiseParams(1.3, 0.0, 0.5)
        assert expected_num_arrivals(params, 7.0) == pytest.approx(1.3 * 7.0, rel=1e-12)

    def test_expected_num_arrivals_closed_form(self):
        assert expected_num_arrivals(BENCH_SCENARIO, 5.0) == pytest.approx(
            17.65667998899119, rel=1e-12
        )

    @given(
        st.floats(min_value=0.0, max_value=3.0),
        st.floats(min_value=0.0, max_value=4.0),
        st.floats(min_value=0.1, max_value=3.0),
        st.floats(min_value=0.2, max_value=12.0),
    )
    @settings(max_examples=25, deadline=None)
    def test_count_is_integral_of_intensity(self, lambda0, mu, delta, s):
        params = ShotNoiseParams(lambda0, mu, delta)
        numeric = integrate(lambda u: float(expected_intensity(params, u)), 0.0, s)
        assert numeric == pytest.approx(expected_num_arrivals(params, s), abs=1e-7, rel=1e-7)


class TestSimulateShocks:
    def test_zero_rate_gives_empty(self):
        params = ShotNoiseParams(1.0, 0.0, 0.5)
        rng = np.random.default_rng(0)
        assert simulate_shocks(params, 10.0, rng).shock_times.size == 0

    def test_poisson_count_mean(self):
        rng = np.random.default_rng(1)
        n = 100_000
        counts = np.array(
            [simulate_shocks(BENCH_SCENARIO, 10.0, rng).shock_times.size for _ in range(n)]
        )
        se = counts.std(ddof=1) / np.sqrt(n)
        assert abs(counts.mean() - 20.0) <= 3 * se

    def test_interarrival_distribution(self):
        rng = np.random.default_rng(2)
        gaps = []
        for _ in range(40):
            t = simulate_shocks(BENCH_SCENARIO, 200.0, rng).shock_times
            gaps.append(np.diff(t))
        gaps = np.concatenate(gaps)
        assert kstest(gaps, "expon", args=(0, 1.0 / BENCH_SCENARIO.mu)).pvalue > 0.01


class TestSimulateArrivals:
    def test_degenerate_homogeneous(self):
        params = ShotNoiseParams(2.0, 0.0, 0.5)
        rng = np.random.default_rng(3)
        counts = []
        for _ in range(20_000):
            shocks = simulate_shocks(params, 5.0, rng)
            counts.append(simulate_arrivals(params, shocks, 5.0, rng).arrival_times.size)
        counts = np.array(counts)
        se = counts.std(ddof=1) / np.sqrt(counts.size)
        assert abs(counts.mean() - 10.0) <= 3 * se

    def test_mean_count_matches_closed_form(self):
        rng = np.random.default_rng(4)
        n = 20_000
        counts = np.empty(n)
        for i in range(n):
            shocks = simulate_shocks(BENCH_SCENARIO, 5.0, rng)
            counts[i] = simulate_arrivals(BENCH_SCENARIO, shocks, 5.0, rng).arrival_times.size
        se = counts.std(ddof=1) / np.sqrt(n)
        expected = expected_num_arrivals(BENCH_SCENARIO, 5.0)
        assert abs(counts.mean() - expected) <= 3 * se

    def test_horizon_validation(self):
        rng = np.random.default_rng(0)
        shocks = simulate_shocks(BENCH_SCENARIO, 2.0, rng)
        with pytest.raises(ValidationError):
            simulate_arrivals(BENCH_SCENARIO, shocks, 3.0, rng)

    def test_conditional_uniform_representation(self):
        # given the shock count, shock times are distributed as uniform
        # order statistics, so the conditional intensity mean has the
        # closed form lambda0 + n*(1 - exp(-delta*s))/(s*delta)
        rng = np.random.default_rng(42)
        s, n_shocks = 4.0, 6
        vals = np.empty(20_000)
        for i in range(vals.size):
            shocks = ShockTrajectory(horizon=s, shock_times=np.sort(rng.uniform(0, s, n_shocks)))
            vals[i] = intensity_at(BENCH_SCENARIO, shocks, s)
        want = BENCH_SCENARIO.lambda0 + n_shocks * (1 - np.exp(-0.5 * s)) / (s * 0.5)
        se = vals.std(ddof=1) / np.sqrt(vals.size)
        assert abs(vals.mean() - want) <= 3 * se

    def test_intensity_mc_mean_converges(self):
        # average of the stochastic intensity over shock histories
        rng = np.random.default_rng(5)
        n = 100_000
        s = 4.0
        vals = np.empty(n)
        for i in range(n):
            shocks = simulate_shocks(BENCH_SCENARIO, s, rng)
            vals[i] = intensity_at(BENCH_SCENARIO, shocks, s)
        se = vals.std(ddof=1) / np.sqrt(n)
        assert abs(vals.mean() - expected_intensity(BENCH_SCENARIO, s)) <= 3 * se


class TestBatchSampler:
    def test_matches_closed_form_counts(self):
        rng = np.random.default_rng(6)
        n = 50_000
        run_ids, times = simulate_arrival_batch(BENCH_SCENARIO, 10.0, n, rng)
        for t in [1.0, 2.0, 5.0, 10.0]:
            counts = np.bincount(run_ids[times <= t], minlength=n)
            se = counts.std(ddof=1) / np.sqrt(n)
            assert abs(counts.mean() - expected_num_arrivals(BENCH_SCENARIO, t)) <= 3 * se

    def test_everything_inside_horizon(self):
        rng = np.random.default_rng(7)
        _, times = simulate_arrival_batch(BENCH_SCENARIO, 3.0, 500, rng)
        assert np.all((times >= 0) & (times <= 3.0))

    def test_horizon_guard(self):
        rng = np.random.default_rng(8)
        with pytest.raises(ValidationError):
            simulate_arrival_batch(ShotNoiseParams(1.0, 2.0, 1.0), 1e4, 10, rng)
