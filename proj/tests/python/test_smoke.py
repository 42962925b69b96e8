import math

import numpy as np
import pytest

import besovlab as bl


def test_streams_are_reproducible():
    a = bl.normals(7, 3, 1000)
    b = bl.normals(7, 3, 1000)
    c = bl.normals(7, 4, 1000)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert abs(a.mean()) < 0.15 and abs(a.var() - 1.0) < 0.15


def test_cauchy_quartiles():
    x = np.sort(bl.stable_increments(1, 0, 100_000, 1.0))
    q1, q3 = np.quantile(x, [0.25, 0.75])
    assert abs(q1 + 1.0) < 0.03 and abs(q3 - 1.0) < 0.03


def test_simulate_brownian_variance():
    x = bl.simulate("brownian", 2.0, 8, 20_000, seed=5)
    assert x.shape == (20_000, 1)
    assert abs(x.var() - 2.0) < 0.1
    assert "stable" in bl.model_names()
    with pytest.raises(bl.UsageError):
        bl.simulate("no_such_model", 1.0, 8, 10)


def test_difference_estimate_matches_gaussian_oracle():
    x = bl.simulate("brownian", 1.0, 4, 200_000, seed=9)
    value, err = bl.mc_difference(x, "cosine", 0.5, 1, [0.5])
    # E cos(B_1 + h) - E cos(B_1) = e^{-1/2} (cos h - 1)
    exact = math.exp(-0.5) * (math.cos(0.5) - 1.0)
    assert abs(value - exact) < 4 * err + 1e-3


def test_gaussian_difference_closed_form():
    # m = 1, d = 1: 2 (2 Phi(h / (2 sqrt(eps))) - 1)
    h, eps = 0.3, 0.5
    exact = 2.0 * math.erf(h / (2.0 * math.sqrt(eps)) / math.sqrt(2.0))
    assert abs(bl.gaussian_difference_l1([1.0], 1, eps, [h], 1) - exact) < 1e-9


def test_fit_and_exponent_calculus():
    s = [2.0 ** -k for k in range(2, 8)]
    fit = bl.fit_scaling(s, [3.0 * x ** 1.5 for x in s])
    assert abs(fit["slope"] - 1.5) < 1e-12
    assert abs(bl.rough_drift_exponent(3.5, math.inf, 1, 0.5) - 0.7) < 1e-12
    assert abs(bl.a0_from_ae_rate(2.0 / 3.0, 1.75) - 1.0 / 6.0) < 1e-12
    w = bl.levy_feasibility(1.5, 0.5, 10, 20, 1, True)
    assert w["feasible"] and abs(w["e_low"] - 19.0 / 65.0) < 1e-12
    with pytest.raises(bl.InfeasibleError):
        bl.rough_drift_exponent(2.0, 4.0, 1, 0.5)


def test_scenarios():
    names = [s["name"] for s in bl.list_scenarios()]
    assert len(names) == len(set(names)) == 9
    keys = [k[0] for k in bl.scenario_keys("squared_bessel")]
    assert "grid_spacing" in keys
    report = bl.run_scenario("squared_bessel", "n_paths=2000\nn_steps=64\ngrid_spacing=2^-10\n")
    assert report["name"] == "squared_bessel"
    assert {c["check_id"] for c in report["checks"]} >= {"small_h_slope", "mc_ks"}
    with pytest.raises(bl.UsageError):
        bl.run_scenario("squared_bessel", "not_a_key = 1")
    with pytest.raises(bl.ParameterError):
        bl.run_scenario("bulk_bm", "epsilon_sweep = 1")
