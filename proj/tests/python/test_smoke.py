"""Smoke tests for the python bindings: thin checks that the main operations
round-trip through the module with sane numbers."""

import numpy as np
import pytest

import hemskit


def test_metrics():
    assert hemskit.mae([1.0, 2.0], [2.0, 4.0]) == pytest.approx(1.5)
    assert hemskit.rmse([1.0, 2.0], [2.0, 4.0]) == pytest.approx(np.sqrt(2.5))
    assert hemskit.improvement(8.0, 10.0) == 20.0
    assert hemskit.soft_threshold(3.0, 1.0) == 2.0
    assert hemskit.soft_threshold(-0.5, 1.0) == 0.0


def test_degenerate_crps_equals_mae():
    levels = [0.05 * i for i in range(1, 20)]
    point = np.array([1.0, 2.5, 0.7])
    values = np.tile(point[:, None], (1, len(levels)))
    obs = [2.0, 2.0, 2.0]
    crps = hemskit.crps_from_quantiles(levels, values, obs)
    assert crps == pytest.approx(hemskit.mae(list(point), obs), abs=1e-12)


def test_var_admm_equivalence_and_privacy():
    panel = hemskit.make_var_panel(seed=5, n=3, p=2, length=200)
    lam = 0.1 * hemskit.lambda_max(panel, 2)
    central = hemskit.fit_var_centralized(panel, 2, lam, tol=1e-9)
    consensus, leak = hemskit.fit_var_consensus(panel, 2, 3, lam, tol=1e-9)
    sharing, exposed = hemskit.fit_var_sharing(panel, 2, 3, lam, tol=1e-9)
    assert central.converged and consensus.converged and sharing.converged
    scale = max(1.0, np.linalg.norm(central.B))
    assert np.linalg.norm(consensus.B - central.B) / scale < 1e-4
    assert np.linalg.norm(sharing.B - central.B) / scale < 1e-4
    assert leak <= 1e-8  # the curious node recovers Y from the broadcasts
    assert exposed  # raw lags cross node boundaries in the example split

    forecast = hemskit.forecast_var(central, panel[:, -2:], 4)
    assert forecast.shape == (3, 4)
    assert np.isfinite(forecast).all()


def test_quantile_gbt_shapes_and_ordering():
    x, y = hemskit.make_heteroscedastic(seed=7, n_samples=600)
    levels = [0.1, 0.5, 0.9]
    model = hemskit.fit_quantile_gbt(x, y, levels, n_trees=40)
    values, point = hemskit.predict_quantiles(model, x[:50])
    assert values.shape == (50, 3)
    assert point.shape == (50,)
    assert (np.diff(values, axis=1) >= 0).all()  # crossing repaired


def test_flexibility_pipeline():
    problem = hemskit.make_flex_problem(seed=11, scenarios=6)
    trajectories = hemskit.epso_sample(problem, k=6, swarm=12, generations=15, seed=11)
    assert trajectories.shape == (6, 8)
    for row in trajectories:
        feasible, fraction = hemskit.check_feasible(problem, list(row))
        assert feasible and fraction >= problem.alpha - 1e-12

    svdd = hemskit.svdd_fit(trajectories)
    inside = sum(
        hemskit.svdd_is_feasible(svdd, list(row)) for row in trajectories
    )
    assert inside >= 5

    vb = hemskit.vbattery_fit(trajectories)
    assert all(hemskit.vbattery_is_feasible(vb, list(row)) for row in trajectories)


def test_vbattery_hand_example():
    vb = hemskit.vbattery_fit(np.array([[1.0, -1.0], [2.0, 0.0]]))
    assert list(vb.p_max_kw) == [2.0, 0.0]
    assert list(vb.p_min_kw) == [1.0, -1.0]
    assert list(vb.soc_max_kwh) == [2.0, 2.0]
    assert list(vb.soc_min_kwh) == [1.0, 0.0]
    assert not hemskit.vbattery_is_feasible(vb, [2.0, 2.0])  # SOC ceiling


def test_schedule_toy():
    tariff = hemskit.Tariff()
    tariff.prices = [0.2, 0.1]
    washer = hemskit.ShiftableConfig()
    washer.power_kw = 1.0
    washer.duration_steps = 1
    washer.window_begin = 0
    washer.window_end = 1
    fleet = hemskit.DeviceFleet()
    fleet.shiftables = [washer]
    schedule = hemskit.optimize_schedule(fleet, tariff, [0.0, 0.0], [0.0, 0.0])
    assert schedule.feasible
    assert list(schedule.starts) == [1]
    assert schedule.cost == pytest.approx(0.1)
