import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from powergame.actions import build_policy_sets
from powergame.channel import FadingModel, GainAlphabet, user_streams
from powergame.mw import (
    MultiplicativeWeightsLearner, StrategyRecorder, WeightState, empirical_utility, external_regret, mw_strategy,
    mw_update, run_cce_learning,
)
from powergame.sim import Game

from _instances import toy_game


def test_empirical_utility_examples():
    sums = np.zeros(3)
    sums[1] = 7
    # oracle: 7 ACKs over t = 100 slots
    assert 7 / 100 == 0.07
    u = empirical_utility(sums, 100)
    assert u[1] == pytest.approx(0.07) and u[0] == 0.0
    assert empirical_utility(np.array([50.0]), 50)[0] == 1.0
    visits = np.array([0, 10, 90])
    assert empirical_utility(sums, 100, visits)[1] == pytest.approx(0.7)
    with pytest.raises(ValueError):
        empirical_utility(sums, 0)


def test_mw_update_examples():
    # oracle: 1 * (1 - 0.1) ** (-1)
    expected = 1 * (1 - 0.1) ** -1
    assert round(expected, 4) == 1.1111
    s = WeightState.initial(2, 0.1)
    mw_update(s, np.array([-1.0, 0.0]))
    assert np.exp(s.log_weights[0]) == pytest.approx(expected, rel=1e-12)
    assert np.exp(s.log_weights[1]) == 1.0


def test_identical_costs_leave_strategy_unchanged():
    s = WeightState(np.log(np.array([2.0, 1.0, 1.0])), 0.2)
    before = mw_strategy(s)
    mw_update(s, np.full(3, -0.37))
    assert np.allclose(mw_strategy(s), before, atol=1e-15)


def test_strategy_examples():
    assert mw_strategy(WeightState.initial(4, 0.1)).tolist() == [0.25] * 4
    # oracle: (2, 1, 1) / 4
    assert np.allclose(mw_strategy(WeightState(np.log(np.array([2.0, 1.0, 1.0])), 0.1)), [0.5, 0.25, 0.25])
    dom = WeightState(np.log(np.array([1e6, 1.0, 1.0])), 0.1)
    assert mw_strategy(dom)[0] > 0.999


@pytest.mark.parametrize("eps", [0.0, 1.0, -0.2])
def test_epsilon_must_be_open_unit(eps):
    with pytest.raises(ValueError):
        WeightState.initial(3, eps)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-30, 30), min_size=1, max_size=8), st.floats(-50, 50))
def test_scaling_invariance(logw, shift):
    a = WeightState(np.array(logw), 0.1)
    b = WeightState(np.array(logw) + shift, 0.1)
    pa, pb = mw_strategy(a), mw_strategy(b)
    assert np.allclose(pa, pb, rtol=1e-12, atol=1e-15)
    assert abs(pa.sum() - 1) < 1e-12 and np.all(pa >= 0)


def test_weights_stay_finite_on_long_runs():
    ps = toy_game().policy_sets[0]
    learner = MultiplicativeWeightsLearner(ps, epsilon=0.5)
    for t in range(5000):
        learner.observe(2, 1, 1)
    # positivity lives in the log domain: every log weight stays finite
    assert np.all(np.isfinite(learner.state.log_weights))
    assert learner.state.log_weights.max() <= 0.0 and learner.state.weights.max() == 1.0
    assert learner.strategy[2] > 0.999


def test_external_regret_examples():
    assert external_regret(10.0, np.array([10.0, 4.0]), 10) == 0.0
    assert external_regret(0.0, np.array([0.0, 8.0]), 8) == 1.0
    with pytest.raises(ValueError):
        external_regret(0.0, np.zeros(2), 0)


def test_recorder_marginals_and_dense_form():
    rec = StrategyRecorder((2, 3), snapshot_every=2)
    qs = [(np.array([1.0, 0.0]), np.array([0.2, 0.3, 0.5])), (np.array([0.5, 0.5]), np.array([1.0, 0.0, 0.0]))]
    for q in qs:
        rec.record(q)
    phi = rec.distribution()
    expected = (np.outer(*qs[0]) + np.outer(*qs[1])) / 2
    for k, p in zip(phi.support(), [expected[k] for k in phi.support()]):
        assert p == pytest.approx(expected[k])
    assert np.allclose(rec.average_marginals()[0], [0.75, 0.25])
    assert np.allclose(phi.marginal(1), rec.average_marginals()[1])
    assert len(rec.snapshots[0]) == 1


def test_single_user_dominant_action():
    model = FadingModel(1, (GainAlphabet([0.3, 1.0]),), {})
    g = Game(model, build_policy_sets(model, [0, 5, 10], 0.75, 10.0))
    env, users = user_streams(0, 1)
    res = run_cce_learning(g, 20_000, env, users)
    best = int(np.argmax(res.learners[0].state.reward_sums))
    assert np.all(g.policy_sets[0].thresholds[best] >= 0)
    assert res.learners[0].strategy[best] > 0.99
    assert res.external_regret()[0] < 0.02


def test_phi_marginals_equal_average_strategies():
    g = toy_game()
    env, users = user_streams(1, 2)
    res = run_cce_learning(g, 3000, env, users)
    for i in range(2):
        assert np.allclose(res.distribution.marginal(i), res.recorder.average_marginals()[i], atol=1e-12)
    assert res.distribution.total() == pytest.approx(1.0)


def test_snapshot_form_for_large_joint_spaces():
    g = toy_game()
    env, users = user_streams(1, 2)
    res = run_cce_learning(g, 1000, env, users, dense_limit=1, snapshot_every=100)
    assert res.distribution.kind == "product"
    assert len(res.recorder.snapshots[0]) == 10
    assert res.distribution.total() == pytest.approx(1.0)


def test_regret_trace_csv(tmp_path):
    g = toy_game()
    env, users = user_streams(0, 2)
    res = run_cce_learning(g, 2500, env, users)
    path = tmp_path / "ext.csv"
    res.write_regret_trace(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "slot,user,external_regret"
    # checkpoints at 1000, 2000 and the final slot
    assert [l.split(",")[0] for l in lines[1:]] == ["1000", "1000", "2000", "2000", "2500", "2500"]
