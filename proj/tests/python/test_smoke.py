import json
import math

import numpy as np
import pytest

import epidet


def small_config(seed=3):
    cfg = epidet.SrmcConfig()
    cfg.n0, cfg.n_batch, cfg.n_end, cfg.d_candidates = 80, 40, 160, 200
    cfg.t_max, cfg.tol, cfg.master_seed = 3, 0.0, seed
    return cfg


def test_reduced_trajectory_stays_in_bounds():
    params = epidet.EpidemicParams()
    path = epidet.simulate_reduced(epidet.ReducedState(1990, 10, 0.1), 30, params,
                                   epidet.ModelVariant.full3d, seed=1)
    assert len(path) == 31
    assert all(0.0 <= x.p <= 1.0 for x in path)
    assert all(x.s1 + x.i1 <= 2000 for x in path)
    again = epidet.simulate_reduced(epidet.ReducedState(1990, 10, 0.1), 30, params,
                                    epidet.ModelVariant.full3d, seed=1)
    assert [(x.s1, x.i1, x.p) for x in path] == [(x.s1, x.i1, x.p) for x in again]


def test_two_pool_without_cross_transmission():
    params = epidet.EpidemicParams()
    params.alpha = 0.0
    start = epidet.MultiPoolState([epidet.PoolState(1990, 10), epidet.PoolState(2000, 0)])
    traj = epidet.simulate_trajectory(start, params, 20, seed=2)
    assert all(st.pools[1].infected == 0 for st in traj)
    assert epidet.outbreak_time(traj) is None


def test_costs():
    costs = epidet.CostParams(20.0)
    assert epidet.immediate_cost(0.25, costs) == 15.0
    assert epidet.pathwise_cost([0.3, 0.5], 0, costs) == epidet.immediate_cost(0.3, costs)


def test_loess_kernel_sums_to_one():
    rng = np.random.default_rng(0)
    x = rng.uniform(size=(40, 2))
    y = np.sin(x[:, 0]) + x[:, 1]
    model = epidet.LoessModel.fit(x, y)
    kernel = model.equivalent_kernel([0.5, 0.5])
    assert abs(kernel.sum() - 1.0) < 1e-10
    assert math.isclose(kernel @ y, model.predict([0.5, 0.5]).mean, abs_tol=1e-10)


def test_solve_evaluate_and_round_trip():
    params, costs = epidet.EpidemicParams(), epidet.CostParams()
    cfg = small_config()
    maps, reports, converged = epidet.solve(cfg, params, costs, epidet.ModelVariant.lp2d)
    assert len(maps) == 3 and len(reports) == 3 and not converged
    assert math.isnan(reports[0].q_change)
    final = maps[-1]
    reloaded = epidet.DetectionMap.from_json(final.to_json(params, cfg))
    for i1 in range(0, 400, 37):
        for p in np.linspace(0.0, 0.99, 7):
            x = epidet.ReducedState(2000 - i1, i1, float(p))
            assert final.q_hat(x) == reloaded.q_hat(x)

    scenarios = epidet.freeze_scenarios(epidet.ReducedState(1990, 10, 0.1), 200, 50, params,
                                        epidet.ModelVariant.full3d, seed=4)
    lp = epidet.evaluate(epidet.Policy.large_population(final), scenarios, costs)
    thr = epidet.evaluate(epidet.Policy.threshold_t(8), scenarios, costs)
    assert thr.sd_tau == 0.0 and thr.mean_tau == 8.0
    assert 1.0 <= lp.mean_tau <= 50.0
    cmp = epidet.paired_compare(lp, thr)
    assert 0.0 <= cmp.fraction_a_better <= 1.0


def test_cli_entry_point(tmp_path):
    cfg = {"seed": 5, "variant": "lp2d",
           "simulate": {"n_paths": 2, "horizon": 5},
           "output": {"dir": str(tmp_path / "out")}}
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    assert epidet.run_cli(["simulate", "--config", str(path)]) == 0
    lines = (tmp_path / "out" / "trajectories.csv").read_text().splitlines()
    assert lines[0].startswith("# epidet config_hash=")
    assert lines[1] == "path,t,s1,i1,p"
    assert len(lines) == 2 + 2 * 6
    del cfg["seed"]
    path.write_text(json.dumps(cfg))
    assert epidet.run_cli(["simulate", "--config", str(path)]) == 2
