import math

import pytest

import sardonics_mc as smc


def test_model_construction():
    model = smc.make_torus_2d(4, coupling="random", field="const:0", beta=1.0, seed=7)
    assert model.num_spins == 16
    assert len(model.edges) == 32
    assert model.beta == 1.0


def test_energy_and_state():
    model = smc.IsingModel(3, [smc.Edge(0, 1, 1.0), smc.Edge(1, 2, -0.5)],
                           [0.2, 0.0, -0.1], 1.0)
    e = smc.energy(model, [1, -1, 1])
    expected = -(1.0 * 1 * -1) - (-0.5 * -1 * 1) - (0.2 * 1 + 0.0 * -1 + -0.1 * 1)
    assert e == pytest.approx(expected)
    state = smc.random_state(10, seed=3)
    assert len(state) == 10
    assert all(s in (-1, 1) for s in state)


def test_model_roundtrip(tmp_path):
    model = smc.make_chimera(2, 2, coupling="random", beta=0.8, seed=3)
    path = str(tmp_path / "model.txt")
    smc.save_model(model, path)
    loaded = smc.load_model(path)
    assert loaded.num_spins == model.num_spins
    assert loaded.beta == model.beta
    assert len(loaded.edges) == len(model.edges)


def test_sardonics_chain_runs_and_is_deterministic():
    model = smc.make_torus_2d(4, coupling="random", field="random", seed=5)
    params = smc.KernelParams(k_lower=1, k_upper=5, gamma_low=0.95, gamma_high=1.1,
                              p_ll=0.7, p_hl=0.2, p_lh=0.1, n_segments=2)
    params.validate(model.num_spins)
    a = smc.run_sardonics(model, params, steps=500, seed=11)
    b = smc.run_sardonics(model, params, steps=500, seed=11)
    assert a == b
    assert len(a) == 500
    assert all(math.isfinite(e) for e in a)


def test_invalid_params_raise():
    params = smc.KernelParams(k_lower=3, k_upper=3)
    with pytest.raises(Exception):
        params.validate(8)


def test_baselines_run():
    model = smc.make_torus_2d(4, coupling="random", seed=2)
    assert len(smc.run_gibbs(model, sweeps=200, seed=1)) == 200
    assert len(smc.run_swendsen_wang(model, steps=200, seed=1)) == 200


def test_exact_distribution_and_tv():
    model = smc.make_torus_2d(3, coupling="const:1", beta=0.5, seed=1)
    pi = smc.exact_distribution(model)
    assert len(pi) == 2 ** 9
    assert sum(pi) == pytest.approx(1.0)
    assert smc.tv_distance(pi, pi) == 0.0


def test_acf_on_known_series():
    series = [float(i % 2) for i in range(10000)]
    rho = smc.acf(series, 2)
    assert rho[0] == 1.0
    assert rho[1] == pytest.approx(-1.0, abs=0.01)
    assert smc.acf_area(series, 2) < 0.0


def test_adapt_smoke():
    model = smc.make_torus_2d(4, coupling="random", field="random", seed=9)
    log = smc.adapt(model, iterations=4, n_init=2, chain_steps=150, max_lag=20,
                    seed=13)
    assert len(log) == 4
    best = -math.inf
    for row in log:
        best = max(best, row["reward"])
        assert row["best_so_far"] == pytest.approx(best)
        row["params"].validate(model.num_spins)
