"""Unit tests for the stochastic-geometry Monte Carlo engine."""

import math
from dataclasses import replace

import numpy as np
import pytest

from edgeprovision.analytic import (
    AirInterface,
    DeploymentConfig,
    InferenceWorkload,
    Scenario,
    cloud_use_probability,
    mean_cell_load,
)
from edgeprovision.errors import ModelDomainError
from edgeprovision.geomsim import (
    CANONICAL_SEED,
    DiscWindow,
    SimConfig,
    TorusWindow,
    associate,
    canonical_validation_scenario,
    cloud_delay,
    delay_ks_statistic,
    run_trials,
    sample_ppp,
    select_output,
    simulate_trial,
    uplink_rate,
    uplink_sinr,
)
from edgeprovision.numerics import EmpiricalCdf, RngStream


def small_cfg(**overrides) -> SimConfig:
    base = dict(
        scenario=canonical_validation_scenario(),
        window_radius=math.sqrt(50.0),
        trials=300,
    )
    base.update(overrides)
    return SimConfig(**base)


# ---------------------------------------------------------------------------
# geometry primitives
# ---------------------------------------------------------------------------


def test_torus_window_geometry():
    win = TorusWindow(radius=5.0)
    assert win.side == 10.0
    assert win.area == 100.0
    np.testing.assert_array_equal(win.center, [5.0, 5.0])


def test_disc_window_geometry():
    win = DiscWindow(radius=2.0)
    assert win.area == pytest.approx(4.0 * math.pi)
    np.testing.assert_array_equal(win.center, [0.0, 0.0])


def test_sample_ppp_count_moments():
    win = TorusWindow(radius=5.0)
    stream = RngStream(42, 0)
    counts = [sample_ppp(stream, 1.0, win).shape[0] for _ in range(2000)]
    # Poisson(100): mean sd is 10/sqrt(2000) ~ 0.224; allow 4 sigma
    assert abs(float(np.mean(counts)) - 100.0) < 0.9


def test_sample_ppp_points_inside_window():
    torus = TorusWindow(radius=5.0)
    pts = sample_ppp(RngStream(1, 0), 2.0, torus)
    assert np.all(pts >= 0.0) and np.all(pts < torus.side)
    disc = DiscWindow(radius=3.0)
    pts = sample_ppp(RngStream(1, 0), 2.0, disc)
    assert np.all(np.hypot(pts[:, 0], pts[:, 1]) <= 3.0)


def test_sample_ppp_deterministic():
    win = TorusWindow(radius=4.0)
    a = sample_ppp(RngStream(7, 3), 1.0, win)
    b = sample_ppp(RngStream(7, 3), 1.0, win)
    np.testing.assert_array_equal(a, b)


def test_associate_picks_min_pathloss():
    aps = np.array([[1.0, 0.0], [2.0, 0.0]])
    idx, pl = associate(np.array([0.0, 0.0]), aps)
    assert idx == 0
    assert pl == pytest.approx(1.0)  # distance 1 -> pathloss 1**4


def test_associate_shadowing_can_flip_choice():
    # distances 1 and 2 give bare pathloss 1 and 16; gains (20, 1) flip it
    aps = np.array([[1.0, 0.0], [2.0, 0.0]])
    idx, pl = associate(np.array([0.0, 0.0]), aps, shadowing_draws=np.array([20.0, 1.0]))
    assert idx == 1
    assert pl == pytest.approx(16.0)


def test_associate_torus_wraparound():
    aps = np.array([[9.5, 0.5], [4.0, 0.5]])
    idx, _ = associate(np.array([0.5, 0.5]), aps, torus_side=10.0)
    assert idx == 0  # wrapped distance 1 beats distance 3.5


def test_associate_rejects_empty():
    with pytest.raises(ModelDomainError):
        associate(np.array([0.0, 0.0]), np.empty((0, 2)))


# ---------------------------------------------------------------------------
# link primitives
# ---------------------------------------------------------------------------


def test_uplink_sinr_examples():
    assert uplink_sinr(1.0, [], snr=10.0) == pytest.approx(10.0)
    assert uplink_sinr(1.0, [0.5], snr=math.inf) == pytest.approx(2.0)
    assert uplink_sinr(2.0, [0.5, 0.5], snr=1.0) == pytest.approx(1.0)
    assert math.isinf(uplink_sinr(1.0, [], snr=math.inf))


def test_uplink_rate_examples():
    assert uplink_rate(3.0, bandwidth=10.0, load=2) == pytest.approx(10.0)
    assert uplink_rate(0.0, bandwidth=10.0, load=1) == 0.0
    assert uplink_rate(1.0, bandwidth=2.28, load=2.28) == pytest.approx(1.0)
    with pytest.raises(ModelDomainError):
        uplink_rate(1.0, bandwidth=1.0, load=0)


def test_cloud_delay_and_output_selection():
    w = InferenceWorkload(1e6, delay_budget=0.06, compute_delay=0.01, mse_cloud=1.0, mse_edge=1.5)
    assert cloud_delay(2e7, w) == pytest.approx(0.06)
    assert math.isinf(cloud_delay(0.0, w))
    assert select_output(0.06, w) == (True, 1.0)  # budget is inclusive
    assert select_output(0.0600001, w) == (False, 1.5)


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


def test_simconfig_validation():
    with pytest.raises(ModelDomainError):
        small_cfg(trials=0)
    with pytest.raises(ModelDomainError):
        small_cfg(window_radius=0.0)
    with pytest.raises(ModelDomainError):
        small_cfg(boundary="sphere")
    with pytest.raises(ModelDomainError):
        small_cfg(load_model="typo")


def test_simconfig_warns_on_small_window():
    with pytest.warns(UserWarning):
        small_cfg(window_radius=1.0)  # 4 expected APs


def test_canonical_scenario_frozen_parameters():
    s = canonical_validation_scenario()
    assert s.deployment.lambda_hat == 1.0
    assert s.inference_rate == pytest.approx(0.125, rel=1e-12)
    assert math.isinf(s.air.snr)


# ---------------------------------------------------------------------------
# trial-level behaviour
# ---------------------------------------------------------------------------


def test_trial_realization_invariants():
    cfg = small_cfg(trials=20)
    for index in range(8):
        tr = simulate_trial(cfg, index)
        np.testing.assert_array_equal(tr.dev_points[0], [0.0, 0.0])
        assert tr.load_nu >= 1
        assert tr.ap_points.shape[0] >= 1
        assert 0 <= tr.serving_ap < tr.ap_points.shape[0]
        # saturated scheduling: every cell but the serving one hosts one
        # active uplink transmitter
        assert len(tr.interferer_set) == tr.ap_points.shape[0] - 1
        assert tr.delay > cfg.scenario.workload.compute_delay
        assert tr.used_cloud == (tr.delay <= cfg.scenario.workload.delay_budget)
        assert tr.sinr_u >= 0.0
        assert tr.rate_u >= 0.0


def test_trial_determinism():
    cfg = small_cfg(trials=10)
    a = simulate_trial(cfg, 3)
    b = simulate_trial(cfg, 3)
    np.testing.assert_array_equal(a.ap_points, b.ap_points)
    np.testing.assert_array_equal(a.dev_points, b.dev_points)
    assert a.delay == b.delay
    assert a.sinr_u == b.sinr_u


def test_trial_index_bounds():
    cfg = small_cfg(trials=5)
    with pytest.raises(ModelDomainError):
        simulate_trial(cfg, 5)
    with pytest.raises(ModelDomainError):
        simulate_trial(cfg, -1)


def test_trials_differ_across_indices():
    cfg = small_cfg(trials=10)
    assert simulate_trial(cfg, 0).delay != simulate_trial(cfg, 1).delay


# ---------------------------------------------------------------------------
# aggregate behaviour
# ---------------------------------------------------------------------------


def test_run_trials_mse_identity():
    cfg = small_cfg()
    s = run_trials(cfg)
    w = cfg.scenario.workload
    expected = s.cloud_use_fraction * w.mse_cloud + (1.0 - s.cloud_use_fraction) * w.mse_edge
    assert s.mse_estimate == expected
    assert s.trial_count == cfg.trials
    assert s.delay_samples.count == cfg.trials


def test_run_trials_worker_invariance():
    cfg = small_cfg()
    one = run_trials(cfg, workers=1)
    two = run_trials(cfg, workers=2)
    assert one.delay_samples == two.delay_samples
    assert one.cloud_use_fraction == two.cloud_use_fraction
    assert one.mse_estimate == two.mse_estimate
    assert one.mean_load == two.mean_load


def test_run_trials_seed_sensitivity():
    a = run_trials(small_cfg(trials=100))
    b = run_trials(small_cfg(trials=100, master_seed=CANONICAL_SEED + 1))
    assert a.delay_samples != b.delay_samples


def test_bandwidth_scaling_coupling():
    # same seed, doubled bandwidth: every SINR draw is unchanged, so each
    # transfer delay above the compute floor exactly halves
    cfg1 = small_cfg(trials=40)
    s2 = replace(
        cfg1.scenario,
        air=AirInterface(bandwidth=2.0 * cfg1.scenario.air.bandwidth, snr=math.inf),
    )
    cfg2 = replace(cfg1, scenario=s2)
    dc = cfg1.scenario.workload.compute_delay
    for i in range(0, 40, 7):
        d1 = simulate_trial(cfg1, i).delay
        d2 = simulate_trial(cfg2, i).delay
        assert (d1 - dc) == pytest.approx(2.0 * (d2 - dc), rel=1e-12)


def test_finite_snr_slows_transfers():
    cfg_inf = small_cfg(trials=40)
    s_noisy = replace(cfg_inf.scenario, air=AirInterface(bandwidth=1.6e8, snr=0.5))
    cfg_noisy = replace(cfg_inf, scenario=s_noisy)
    for i in range(0, 40, 7):
        assert simulate_trial(cfg_noisy, i).delay >= simulate_trial(cfg_inf, i).delay


def test_realized_load_mode_runs_and_differs():
    mean_field = run_trials(small_cfg(trials=150))
    realized = run_trials(small_cfg(trials=150, load_model="realized"))
    assert realized.delay_samples != mean_field.delay_samples
    assert realized.mean_load == mean_field.mean_load  # same geometry draws


def test_fullbuffer_off_lowers_interference():
    # without saturation fill only occupied cells interfere, so delays
    # cannot be worse on a per-trial basis with identical draws
    cfg_on = small_cfg(trials=60)
    cfg_off = small_cfg(trials=60, full_buffer=False)
    on = run_trials(cfg_on)
    off = run_trials(cfg_off)
    assert off.cloud_use_fraction >= on.cloud_use_fraction


def test_disc_boundary_mode():
    s = run_trials(small_cfg(trials=100, boundary="disc"))
    assert 0.0 <= s.cloud_use_fraction <= 1.0
    assert s.mean_load >= 1.0


def test_shadowing_mode_runs():
    s = run_trials(small_cfg(trials=100, shadowing_sigma_db=4.0))
    assert 0.0 <= s.cloud_use_fraction <= 1.0
    assert math.isfinite(s.mean_load)


def test_mean_load_tracks_density_ratio():
    # lambda_hat = 2 with 400 trials: mean load should approach 1.64
    dep = DeploymentConfig(lambda_ap=1.0, lambda_dev=0.5)
    s = replace(canonical_validation_scenario(), deployment=dep)
    cfg = SimConfig(scenario=s, window_radius=5.0, trials=400)
    out = run_trials(cfg)
    assert out.mean_load == pytest.approx(mean_cell_load(dep), rel=0.15)


# ---------------------------------------------------------------------------
# KS statistic plumbing
# ---------------------------------------------------------------------------


def test_delay_ks_statistic_matches_bruteforce():
    scenario = canonical_validation_scenario()
    w = scenario.workload
    samples = np.array([0.012, 0.02, 0.05, 0.3, 1.0])
    ecdf = EmpiricalCdf.from_samples(samples)
    d_lo, d_hi = w.compute_delay, 10.0 * w.delay_budget
    stat = delay_ks_statistic(ecdf, scenario, d_lo, d_hi)

    from edgeprovision.analytic import delay_cdf

    grid = np.linspace(d_lo + 1e-9, d_hi, 400_000)
    brute = max(
        abs(ecdf.evaluate(float(d)) - delay_cdf(scenario, float(d))) for d in grid
    )
    assert stat == pytest.approx(brute, abs=2e-4)
    assert stat >= brute - 1e-12  # sup over steps dominates any grid scan


def test_delay_ks_statistic_ignores_out_of_window_mass():
    scenario = canonical_validation_scenario()
    w = scenario.workload
    base = [0.012, 0.02, 0.05]
    far = base + [1e6, 2e6]  # beyond the window: only reweights in-window steps
    s1 = delay_ks_statistic(
        EmpiricalCdf.from_samples(base), scenario, w.compute_delay, 10 * w.delay_budget
    )
    s2 = delay_ks_statistic(
        EmpiricalCdf.from_samples(far), scenario, w.compute_delay, 10 * w.delay_budget
    )
    assert s2 != s1  # global normalization keeps the statistic honest
    assert 0.0 <= s2 <= 1.0
