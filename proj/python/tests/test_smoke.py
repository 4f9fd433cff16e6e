import numpy as np
import pytest

import maktd

QUICK = {"episodes_train": 3, "episodes_test": 2, "rbf_count": 3, "master_seed": 4}


def test_scenarios_listed():
    names = [name for name, _ in maktd.scenarios()]
    assert sorted(names) == [
        "predator_prey_1v2",
        "predator_prey_2v1",
        "simple_competition",
        "simple_cooperation",
    ]


def test_rbf_features_shape_and_bias():
    bank = maktd.RbfBank([np.zeros(2), np.ones(2)], [np.eye(2), np.eye(2)])
    phi = bank.state_features(np.zeros(2))
    assert phi.shape == (3,)
    assert phi[0] == 1.0
    assert phi[1] == pytest.approx(1.0)
    assert phi[2] == pytest.approx(np.exp(-1.0))
    sa = bank.state_action_features(np.zeros(2), 2, 5)
    assert sa.shape == (15,)
    assert np.count_nonzero(sa[:6]) == 0 and np.count_nonzero(sa[9:]) == 0


def test_kalman_matches_closed_form():
    f = maktd.MmaeFilter(2, p0_scale=1.0, q_scale=0.0, r_candidates=[0.5])
    h = np.array([1.0, 2.0])
    f.predict()
    f.update(h, 3.0)
    p = np.eye(2)
    k = p @ h / (h @ p @ h + 0.5)
    np.testing.assert_allclose(f.theta, k * 3.0, atol=1e-12)


def test_tabular_td_learns_terminal_reward():
    learner = maktd.MakTdLearner(n_states=2, n_actions=1, gamma=0.5, seed=1)
    for _ in range(300):
        learner.train_step(np.array([1.0]), 0, 1.0, np.array([1.0]), terminal=True)
        learner.train_step(np.array([0.0]), 0, 0.0, np.array([1.0]))
    assert learner.action_values(np.array([1.0]))[0] == pytest.approx(1.0, abs=1e-2)
    assert learner.action_values(np.array([0.0]))[0] == pytest.approx(0.5, abs=1e-2)


def test_sr_learner_shapes():
    learner = maktd.MakSrLearner(n_states=3, n_actions=2, seed=2)
    learner.train_step(np.array([0.0]), 1, 1.0, np.array([1.0]))
    assert learner.sr_matrix.shape == (6, 6)
    assert learner.action_values(np.array([0.0])).shape == (2,)


def test_world_step():
    world = maktd.ParticleWorld("predator_prey_1v2", seed=3)
    world.reset()
    obs = world.observe_all()
    assert [len(o) for o in obs] == [12, 10, 10]
    next_obs, rewards, done, _ = world.step([0, 1, 2])
    assert len(rewards) == 3 and world.step_count == 1 and isinstance(done, bool)


def test_run_is_deterministic_and_checkpoint_replays():
    train_a, test_a, cp = maktd.run(QUICK)
    train_b, test_b, _ = maktd.run(QUICK)
    assert train_a == train_b and test_a == test_b
    assert len(train_a) == 3 and len(test_a) == 2
    assert maktd.evaluate(cp) == test_a


def test_monte_carlo_summary():
    s = maktd.monte_carlo(dict(QUICK, mc_runs=2, learner="mak_sr", threads=1))
    assert s["learner"] == "mak_sr" and len(s["seeds"]) == 2


def test_bad_config_rejected():
    with pytest.raises(ValueError):
        maktd.run({"gamma": 2.0})
    with pytest.raises(ValueError):
        maktd.run({"no_such_key": 1})
