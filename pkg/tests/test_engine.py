from dataclasses import replace

import numpy as np
import pytest

from photon_tow.bandit_env import CASE_1, CASE_2, CASE_3, BanditEnv
from photon_tow.engine import (
    ExperimentConfig,
    Standard,
    Tournament,
    aggregate,
    first_cycle_reaching,
    frozen_nodes,
    run_cycle,
    run_experiment,
    run_trial,
    sweep_resolutions,
)
from photon_tow.optics_tree import RoutingTree
from photon_tow.tow_control import ArmStats


def test_config_validation():
    with pytest.raises(ValueError, match="2\\*\\*depth"):
        ExperimentConfig((0.5, 0.5, 0.5))
    with pytest.raises(ValueError, match="resolution must be odd"):
        ExperimentConfig(CASE_1, resolution=8)
    with pytest.raises(ValueError, match="round1_cycles must be < cycles"):
        ExperimentConfig(CASE_1, cycles=15, strategy=Tournament(15))
    with pytest.raises(ValueError):
        ExperimentConfig(CASE_1, cycles=0)
    with pytest.raises(ValueError):
        ExperimentConfig(CASE_1, resolution=(7, 7))
    cfg = ExperimentConfig(CASE_1, resolution=(7, 9, 11))
    assert cfg.node_resolutions == (7, 9, 11)


def test_run_cycle_degenerate_tree():
    tree = RoutingTree.from_values(2, [-4.0, -4.0, 0.0], 7)
    env = BanditEnv.seeded(CASE_1, 1)
    wins = 0
    for _ in range(2000):
        _, _, rec = run_cycle(tree, env, ArmStats.zeros(4))
        assert rec.arm == 1
        assert rec.leaf_probs == (1.0, 0.0, 0.0, 0.0)
        wins += rec.rewarded
    assert abs(wins / 2000 - 0.8) < 0.04


def test_run_cycle_is_deterministic():
    def once():
        env = BanditEnv.seeded(CASE_2, 42)
        rng = np.random.default_rng(9)
        return run_cycle(RoutingTree(2), env, ArmStats.zeros(4), rng=rng)[2]

    first = once()
    assert first == once()
    assert first.leaf_probs == (0.25, 0.25, 0.25, 0.25)


def test_run_trial_shape_and_start():
    cfg = ExperimentConfig(CASE_1, cycles=30, replications=1)
    tr = run_trial(cfg, 0)
    assert len(tr) == 30
    assert tr.pa_values.shape == (30, 3) and tr.leaf_probs.shape == (30, 4)
    np.testing.assert_array_equal(tr.leaf_probs[0], [0.25] * 4)
    assert set(tr.arms) <= {1, 2, 3, 4}
    np.testing.assert_array_equal(tr.leaf_probs.sum(axis=1).round(12), 1.0)


def test_run_trial_deterministic_and_trials_differ():
    cfg = ExperimentConfig(CASE_1, cycles=50, replications=1, master_seed=77)
    a, b = run_trial(cfg, 3), run_trial(cfg, 3)
    np.testing.assert_array_equal(a.arms, b.arms)
    np.testing.assert_array_equal(a.pa_values, b.pa_values)
    c = run_trial(cfg, 4)
    assert not np.array_equal(a.arms, c.arms) or not np.array_equal(a.rewarded, c.rewarded)


def test_tournament_freeze_contract():
    cfg = ExperimentConfig(CASE_3, cycles=30, replications=1, strategy=Tournament(15))
    for i in range(50):
        tr = run_trial(cfg, i)
        assert np.all(tr.pa_values[:15, 0] == 0.0)
        assert np.all(tr.pa_values[15:, 1:] == tr.pa_values[15, 1:])
        assert np.all(tr.pa_values[14, 1:] == tr.pa_values[15, 1:])


def test_frozen_schedule_depth3():
    cfg = ExperimentConfig((0.1,) * 8, depth=3, cycles=30, strategy=Tournament((5, 10)))
    assert frozen_nodes(cfg, 1) == {1, 2, 3}
    assert frozen_nodes(cfg, 5) == {1, 2, 3}
    assert frozen_nodes(cfg, 6) == {1, 4, 5, 6, 7}
    assert frozen_nodes(cfg, 16) == {2, 3, 4, 5, 6, 7}
    assert frozen_nodes(replace(cfg, strategy=Standard()), 16) == set()


def test_tournament_phase_only_stats_changes_omega_source():
    base = ExperimentConfig(CASE_3, cycles=30, replications=1, strategy=Tournament(15))
    split = replace(base, strategy=Tournament(15, cumulative_stats=False))
    a, b = run_trial(base, 0), run_trial(split, 0)
    np.testing.assert_array_equal(a.pa_values[:16], b.pa_values[:16])
    np.testing.assert_array_equal(a.arms[:16], b.arms[:16])


def test_zero_knowledge_start_uniform():
    c = run_experiment(ExperimentConfig(CASE_3, cycles=1, replications=10_000), keep_traces=True)
    arms = np.array([tr.arms[0] for tr in c.traces])
    freq = np.bincount(arms, minlength=5)[1:] / arms.size
    np.testing.assert_allclose(freq, 0.25, atol=0.02)


def test_trial_order_does_not_matter():
    cfg = ExperimentConfig(CASE_2, cycles=20, replications=40, master_seed=5)
    ref = run_experiment(cfg)
    shuffled = {}
    for i in np.random.default_rng(0).permutation(40):
        shuffled[int(i)] = run_trial(cfg, int(i))
    got = aggregate(cfg, shuffled)
    np.testing.assert_array_equal(got.fine_cdr, ref.fine_cdr)
    np.testing.assert_array_equal(got.coarse_cdr, ref.coarse_cdr)
    np.testing.assert_array_equal(got.mean_pa, ref.mean_pa)


def test_parallel_workers_match_serial():
    cfg = ExperimentConfig(CASE_1, cycles=10, replications=12, master_seed=3)
    a, b = run_experiment(cfg), run_experiment(cfg, workers=2)
    np.testing.assert_array_equal(a.fine_cdr, b.fine_cdr)
    np.testing.assert_array_equal(a.mean_pa, b.mean_pa)


def test_rates_in_unit_interval_and_same_seed_repeat():
    cfg = ExperimentConfig(CASE_3, cycles=25, replications=30, master_seed=8)
    a, b = run_experiment(cfg), run_experiment(cfg)
    for c in (a, b):
        assert np.all((c.fine_cdr >= 0) & (c.fine_cdr <= 1))
        assert np.all((c.coarse_cdr >= 0) & (c.coarse_cdr <= 1))
    np.testing.assert_array_equal(a.fine_cdr, b.fine_cdr)
    one = replace(cfg, replications=1)
    np.testing.assert_array_equal(run_experiment(one).fine_cdr, run_experiment(one).fine_cdr)


@pytest.mark.parametrize("res", [3, 5, 7, 9, 11, 21])
def test_single_good_arm_converges_by_cycle_30(res):
    c = run_experiment(ExperimentConfig((1, 0, 0, 0), cycles=30, replications=100, resolution=res))
    assert c.fine_cdr[29] >= 0.9


@pytest.mark.parametrize("res", [51, 101])
def test_single_good_arm_converges_at_high_resolution(res):
    c = run_experiment(ExperimentConfig((1, 0, 0, 0), cycles=150, replications=100, resolution=res))
    assert c.fine_cdr[-1] == 1.0
    early, late = c.fine_cdr[:30].mean(), c.fine_cdr[-30:].mean()
    assert late > early


def test_case1_coarse_rises_faster_than_case2():
    c1 = run_experiment(ExperimentConfig(CASE_1, replications=300))
    c2 = run_experiment(ExperimentConfig(CASE_2, replications=300))
    assert c1.coarse(1)[4:].mean() > c2.coarse(1)[4:].mean()


def test_depth3_runs_and_reports_two_coarse_levels():
    probs = (0.1, 0.2, 0.9, 0.1, 0.3, 0.3, 0.2, 0.1)
    c = run_experiment(ExperimentConfig(probs, depth=3, cycles=60, replications=50))
    assert c.coarse_cdr.shape == (60, 2)
    assert c.mean_pa.shape == (60, 7)
    assert c.fine_cdr[-10:].mean() > c.fine_cdr[:5].mean()


def test_sweep_resolutions_snapshot():
    cfg = ExperimentConfig(CASE_3, cycles=40, replications=20)
    sweep = sweep_resolutions(cfg, [5, 7], snapshot_cycle=30)
    rows = sweep.snapshot()
    assert [r[0] for r in rows] == [5, 7]
    assert rows[0][1] == sweep.curves[5].fine_cdr[29]
    with pytest.raises(ValueError):
        sweep_resolutions(cfg, [5], snapshot_cycle=41)


def test_first_cycle_reaching():
    assert first_cycle_reaching([0.1, 0.5, 0.7], 0.5) == 2
    assert first_cycle_reaching([0.1, 0.2], 0.5) == float("inf")
