import math
from types import SimpleNamespace

import numpy as np
import pytest

from darkstate_sim import (
    Channel,
    EmptyGridError,
    InvalidUniformError,
    NegativeTimeError,
    Parameters,
    Propagator,
    StateVector,
    ZeroRateError,
    classify_jump,
    default_horizon,
    emission_probabilities,
    initial_state,
    no_emission_probability,
    run_ensemble,
    sample_waiting_time,
    simulate_trajectories,
    simulate_trajectory,
)

# Conditional channel probabilities by t = 50 for g_a = g_b = kappa = 1,
# gamma = 1e-3 (cavity, spontaneous-from-a, spontaneous-from-b), frozen from
# quadrature of the closed-form rates.
CHANNEL_BUDGET_AT_50 = np.array(
    [0.4992508740634678, 0.024665207959781252, 0.023665208958771194]
)

# One-percent critical values: Kolmogorov-Smirnov (asymptotic, 1.6276/sqrt(n))
# and chi-squared with two degrees of freedom.
KS_COEFFICIENT_1PC = 1.6276
CHI2_2DF_1PC = 9.21034


class TestWaitingTime:
    def test_u_one_maps_to_time_zero(self, fig_params):
        prop = Propagator.from_parameters(fig_params)
        assert sample_waiting_time(prop, initial_state(), 1.0) == 0.0

    def test_root_self_consistency(self, fig_params):
        prop = Propagator.from_parameters(fig_params)
        for u in (0.9, 0.6, 0.47):
            t = sample_waiting_time(prop, initial_state(), u)
            assert t is not None and t > 0.0
            assert abs(no_emission_probability(prop, t) - u) < 1e-9

    def test_no_jump_when_dark_weight_survives(self):
        # Lossless atoms: half the weight is trapped, u = 0.4 never fires.
        p = Parameters(g_a=1.0, g_b=1.0, kappa=1.0)
        prop = Propagator.from_parameters(p)
        assert sample_waiting_time(prop, initial_state(), 0.4) is None
        t = sample_waiting_time(prop, initial_state(), 0.6)
        assert t is not None

    @pytest.mark.parametrize("u", [0.0, -0.3, 1.0000001, float("nan")])
    def test_invalid_uniform_rejected(self, fig_params, u):
        prop = Propagator.from_parameters(fig_params)
        with pytest.raises(InvalidUniformError):
            sample_waiting_time(prop, initial_state(), u)

    def test_bad_horizon_rejected(self, fig_params):
        prop = Propagator.from_parameters(fig_params)
        with pytest.raises(NegativeTimeError):
            sample_waiting_time(prop, initial_state(), 0.5, horizon=-1.0)

    def test_default_horizon(self, fig_params):
        assert default_horizon(fig_params) == 15.0 / 1e-3
        assert default_horizon(Parameters(1.0, 1.0, 2.0)) == 25.0


class TestClassifyJump:
    def test_lossless_atoms_always_cavity(self):
        p = Parameters(g_a=1.0, g_b=1.0, kappa=1.0)
        prop = Propagator.from_parameters(p)
        state = StateVector(np.array([0.6, 0.5, 0.3]))
        for v in (0.0, 0.5, 0.999):
            assert classify_jump(prop, state, v) is Channel.CAVITY

    def test_zero_cavity_rate_never_cavity(self):
        # Stand-in with kappa = 0 (the library itself requires kappa > 0):
        # the cavity weight drops out of the thresholds entirely.
        fake = SimpleNamespace(
            generator=SimpleNamespace(params=SimpleNamespace(kappa=0.0, gamma=1.0))
        )
        state = StateVector(np.array([0.8, 0.4, 0.4]))
        channels = {classify_jump(fake, state, v) for v in (0.0, 0.3, 0.6, 0.9999)}
        assert Channel.CAVITY not in channels
        assert channels <= {Channel.SPON_A, Channel.SPON_B}

    def test_threshold_order(self, fig_params):
        prop = Propagator.from_parameters(fig_params)
        state = StateVector(np.array([0.5, 0.5, 0.5]))
        w_cav = 2.0 * fig_params.kappa * 0.25
        w_a = 2.0 * fig_params.gamma * 0.25
        total = w_cav + 2.0 * w_a
        assert classify_jump(prop, state, w_cav / total - 1e-9) is Channel.CAVITY
        assert classify_jump(prop, state, w_cav / total + 1e-9) is Channel.SPON_A
        assert classify_jump(prop, state, (w_cav + w_a) / total + 1e-9) is Channel.SPON_B

    def test_zero_total_rate_raises(self):
        p = Parameters(g_a=1.0, g_b=1.0, kappa=1.0)  # gamma = 0
        prop = Propagator.from_parameters(p)
        with pytest.raises(ZeroRateError):
            classify_jump(prop, initial_state(), 0.5)

    def test_invalid_uniform_rejected(self, fig_params):
        prop = Propagator.from_parameters(fig_params)
        with pytest.raises(InvalidUniformError):
            classify_jump(prop, initial_state(), -0.1)
        with pytest.raises(InvalidUniformError):
            classify_jump(prop, initial_state(), 1.1)


class TestTrajectories:
    def test_single_matches_batch_element(self, fig_params):
        times, codes, detected = simulate_trajectories(fig_params, 42, 0, 16)
        for index in (0, 7, 15):
            single = simulate_trajectory(fig_params, 42, index)
            if math.isnan(times[index]):
                assert single.first_jump_time is None
                assert single.channel is Channel.NONE
            else:
                assert single.first_jump_time == times[index]
                assert single.channel is not Channel.NONE
            assert single.detected == detected[index]

    def test_partition_independence(self, fig_params):
        whole = simulate_trajectories(fig_params, 42, 0, 64)
        first = simulate_trajectories(fig_params, 42, 0, 17)
        second = simulate_trajectories(fig_params, 42, 17, 47)
        assert np.array_equal(whole[0], np.concatenate([first[0], second[0]]), equal_nan=True)
        assert np.array_equal(whole[1], np.concatenate([first[1], second[1]]))
        assert np.array_equal(whole[2], np.concatenate([first[2], second[2]]))

    def test_sampled_times_satisfy_survival_law(self, fig_params):
        prop = Propagator.from_parameters(fig_params)
        times, codes, _ = simulate_trajectories(fig_params, 11, 0, 64, horizon=50.0)
        jumped = codes >= 0
        for t in times[jumped][:10]:
            p0 = no_emission_probability(prop, float(t))
            assert 0.0 < p0 < 1.0  # root strictly inside the bracket

    def test_cavity_fraction_matches_budget(self, fig_params):
        times, codes, _ = simulate_trajectories(fig_params, 123, 0, 20_000, horizon=50.0)
        jumped = codes >= 0
        n_jumped = int(jumped.sum())
        fraction = float((codes == 0).sum()) / n_jumped
        expected = CHANNEL_BUDGET_AT_50[0] / CHANNEL_BUDGET_AT_50.sum()
        sigma = math.sqrt(expected * (1.0 - expected) / n_jumped)
        assert abs(fraction - expected) < 3.0 * sigma

    def test_channel_split_chi_squared(self, fig_params):
        times, codes, _ = simulate_trajectories(fig_params, 42, 0, 10_000, horizon=50.0)
        jumped = codes >= 0
        n_jumped = int(jumped.sum())
        counts = np.array([(codes == c).sum() for c in (0, 1, 2)], dtype=float)
        expected = n_jumped * CHANNEL_BUDGET_AT_50 / CHANNEL_BUDGET_AT_50.sum()
        chi2 = float(np.sum((counts - expected) ** 2 / expected))
        assert chi2 < CHI2_2DF_1PC

    def test_waiting_time_distribution_ks(self, fig_params):
        times, codes, _ = simulate_trajectories(fig_params, 42, 0, 10_000)
        jump_times = np.sort(times[codes >= 0])
        n = jump_times.size
        assert n == 10_000  # the horizon leaves only ~5e-14 survival weight
        horizon = default_horizon(fig_params)
        p0_end = emission_probabilities(fig_params, horizon).p0
        cdf = (1.0 - emission_probabilities(fig_params, jump_times).p0) / (1.0 - p0_end)
        ranks = np.arange(1, n + 1)
        statistic = max(
            float(np.max(ranks / n - cdf)), float(np.max(cdf - (ranks - 1) / n))
        )
        assert statistic < KS_COEFFICIENT_1PC / math.sqrt(n)

    def test_detection_thinning(self):
        p = Parameters(g_a=1.0, g_b=1.0, kappa=1.0, gamma=1e-3, eta=0.8)
        _, codes, detected = simulate_trajectories(p, 7, 0, 20_000, horizon=50.0)
        cavity = codes == 0
        assert np.all(cavity[detected])  # only mirror photons can click
        n_cav = int(cavity.sum())
        fraction = float(detected[cavity].mean())
        sigma = math.sqrt(0.8 * 0.2 / n_cav)
        assert abs(fraction - 0.8) < 3.0 * sigma

    def test_unit_efficiency_detects_every_cavity_jump(self, fig_params):
        _, codes, detected = simulate_trajectories(fig_params, 5, 0, 2_000, horizon=50.0)
        assert np.array_equal(detected, codes == 0)

    def test_argument_validation(self, fig_params):
        with pytest.raises(ValueError):
            simulate_trajectories(fig_params, 42, -1, 4)
        with pytest.raises(ValueError):
            simulate_trajectories(fig_params, 42, 0, 0)
        with pytest.raises(ValueError):
            simulate_trajectories(fig_params, -1, 0, 4)
        with pytest.raises(ValueError):
            simulate_trajectories(fig_params, 2**64, 0, 4)
        with pytest.raises(NegativeTimeError):
            simulate_trajectories(fig_params, 42, 0, 4, horizon=0.0)


class TestEnsemble:
    def test_single_trajectory_is_one_hot(self, fig_params):
        grid = np.array([0.0, 1.0, 5.0])
        est = run_ensemble(fig_params, 1, grid, seed=3)
        stacked = np.stack([est.p0_hat, est.p_cav_hat, est.p_spon_hat])
        assert np.all((stacked == 0.0) | (stacked == 1.0))
        assert np.array_equal(stacked.sum(axis=0), np.ones(3))
        assert np.all(est.p0_stderr == 0.0)

    def test_budget_partition_is_exact(self, fig_params):
        grid = np.linspace(0.0, 50.0, 11)
        est = run_ensemble(fig_params, 5_000, grid, seed=9)
        total = est.p0_hat + est.p_cav_hat + est.p_spon_hat
        assert np.max(np.abs(total - 1.0)) < 1e-12

    def test_estimates_match_closed_form(self, fig_params):
        grid = np.array([1.0, 5.0, 50.0])
        est = run_ensemble(fig_params, 20_000, grid, seed=42)
        exact = emission_probabilities(fig_params, grid)
        for hat, err, ref in [
            (est.p0_hat, est.p0_stderr, exact.p0),
            (est.p_cav_hat, est.p_cav_stderr, exact.p_cav),
            (est.p_spon_hat, est.p_spon_stderr, exact.p_spon),
        ]:
            assert np.all(np.abs(hat - ref) < 4.0 * err + 1e-12)

    def test_worker_count_does_not_change_results(self, fig_params):
        grid = np.linspace(0.0, 30.0, 7)
        serial = run_ensemble(fig_params, 40_000, grid, seed=7, workers=1)
        threaded = run_ensemble(fig_params, 40_000, grid, seed=7, workers=8)
        assert np.array_equal(serial.p0_hat, threaded.p0_hat)
        assert np.array_equal(serial.p_cav_hat, threaded.p_cav_hat)
        assert np.array_equal(serial.p_spon_hat, threaded.p_spon_hat)

    def test_thread_environment_cap(self, fig_params, monkeypatch):
        grid = np.linspace(0.0, 10.0, 5)
        baseline = run_ensemble(fig_params, 20_000, grid, seed=1, workers=1)
        monkeypatch.setenv("DARKSTATE_THREADS", "8")
        from_env = run_ensemble(fig_params, 20_000, grid, seed=1)
        assert np.array_equal(baseline.p0_hat, from_env.p0_hat)
        monkeypatch.setenv("DARKSTATE_THREADS", "not-a-number")
        with pytest.raises(ValueError):
            run_ensemble(fig_params, 100, grid, seed=1)

    def test_stderr_formula(self, fig_params):
        grid = np.array([5.0])
        est = run_ensemble(fig_params, 1_000, grid, seed=2)
        expected = np.sqrt(est.p0_hat * (1.0 - est.p0_hat) / 1_000)
        assert np.allclose(est.p0_stderr, expected, atol=1e-15)

    def test_grid_validation(self, fig_params):
        with pytest.raises(EmptyGridError):
            run_ensemble(fig_params, 10, np.array([]), seed=0)
        with pytest.raises(NegativeTimeError):
            run_ensemble(fig_params, 10, np.array([-1.0, 2.0]), seed=0)
        with pytest.raises(ValueError):
            run_ensemble(fig_params, 10, np.array([2.0, 1.0]), seed=0)
        with pytest.raises(ValueError):
            run_ensemble(fig_params, 0, np.array([1.0]), seed=0)

    def test_grid_beyond_default_horizon_extends_sampling(self):
        # Lossless atoms keep 50% survival: grid times past the default
        # horizon must still tally correctly (no jump ever lands beyond it).
        p = Parameters(g_a=1.0, g_b=1.0, kappa=1.0)
        est = run_ensemble(p, 2_000, np.array([10.0, 200.0]), seed=4)
        assert est.p0_hat[-1] == pytest.approx(0.5, abs=0.05)
