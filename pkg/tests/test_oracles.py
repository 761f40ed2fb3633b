import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import brute_force_best_response_value, random_behavior
from psrolab.core.policy import BehaviorPolicy, DefaultRule, MixturePolicy, uniform_policy
from psrolab.core.rng import stream
from psrolab.core.simulate import expected_returns_exact
from psrolab.eval.mixed import mixed_to_behavior
from psrolab.games.kuhn import make_kuhn
from psrolab.games.matrix import RPS, make_matrix_game
from psrolab.oracles.best_response import exact_best_response
from psrolab.oracles.purify import purify
from psrolab.oracles.qlearning import (
    GreedyView,
    QParams,
    QTable,
    q_learning_episode,
    train_independent_learners,
    train_q_oracle,
)


def rock():
    return BehaviorPolicy({"1": np.array([1.0, 0.0, 0.0])}, name="rock")


def test_exact_best_response_matches_brute_force():
    game = make_kuhn()
    rng = np.random.default_rng(0)
    opp = BehaviorPolicy(random_behavior(game, 1, rng))
    br, value = exact_best_response(game, 0, [None, opp])
    assert br.is_deterministic()
    assert value == pytest.approx(brute_force_best_response_value(game, 0, [None, opp]), abs=1e-12)
    assert expected_returns_exact(game, [br, opp])[0] == pytest.approx(value, abs=1e-12)


def test_best_response_to_uniform_kuhn_value():
    game = make_kuhn()
    # brute force over all 64 pure strategies gives the same value
    _, value = exact_best_response(game, 0, [None, uniform_policy()])
    assert value == pytest.approx(0.5, abs=1e-12)


def test_best_response_to_mixture_equals_response_to_converted_policy():
    game = make_kuhn()
    rng = np.random.default_rng(1)
    members = [BehaviorPolicy(random_behavior(game, 1, rng, deterministic=True)) for _ in range(3)]
    sigma = np.array([0.2, 0.3, 0.5])
    _, v_mix = exact_best_response(game, 0, [None, MixturePolicy(members, sigma)])
    _, v_beh = exact_best_response(game, 0, [None, mixed_to_behavior(members, sigma, game, 1)])
    assert v_mix == pytest.approx(v_beh, abs=1e-12)


def test_best_response_argument_count_checked():
    with pytest.raises(ValueError):
        exact_best_response(make_kuhn(), 0, [uniform_policy()])


def test_purify_keeps_argmax_and_breaks_ties_low():
    pol = BehaviorPolicy({"a": np.array([0.2, 0.5, 0.3]), "b": np.array([0.5, 0.5])}, DefaultRule.UNIFORM_RANDOM, "x")
    pure = purify(pol)
    assert np.array_equal(pure.table["a"], [0, 1, 0])
    assert np.array_equal(pure.table["b"], [1, 0])
    assert pure.is_deterministic() and pure.default_rule is DefaultRule.UNIFORM_RANDOM


@given(st.integers(1, 500), st.floats(0, 1), st.floats(0, 1))
def test_epsilon_schedule_is_linear_between_endpoints(total, start, end):
    q = QParams(epsilon_start=start, epsilon_end=end)
    assert q.epsilon(0, total) == pytest.approx(start if total > 1 else end)
    assert q.epsilon(total - 1, total) == pytest.approx(end)
    if total > 2:
        mid = q.epsilon(1, total)
        assert min(start, end) - 1e-12 <= mid <= max(start, end) + 1e-12


def test_greedy_ties_go_to_lowest_index():
    table = QTable()
    table.values["k"] = [0.0, 1.0, 1.0]
    assert np.array_equal(table.greedy_policy().table["k"], [0, 1, 0])
    view = GreedyView(table)
    assert np.array_equal(view.probs("k", 3), [0, 1, 0])
    assert np.allclose(view.probs("unseen", 4), 0.25)
    table.values["k"][2] = 2.0
    assert np.array_equal(view.probs("k", 3), [0, 0, 1])


def test_q_learning_finds_best_response_in_rps():
    game = make_matrix_game(RPS)
    report = train_q_oracle(game, 0, [None, rock()], 400, QParams(step_size=0.2), stream(0, "q"))
    assert np.array_equal(report.policy.table["0"], [0, 1, 0])
    assert report.final_value == pytest.approx(1.0)


def test_q_learning_reaches_exact_best_response_value_on_kuhn():
    game = make_kuhn()
    u = uniform_policy()
    _, br_value = exact_best_response(game, 0, [None, u])
    report = train_q_oracle(game, 0, [None, u], 20_000, QParams(step_size=0.01), stream(3, "kuhn"))
    assert expected_returns_exact(game, [report.policy, u])[0] >= br_value - 0.1


def test_q_learning_updates_only_the_learner():
    game = make_kuhn()
    tables = {1: QTable()}
    q_learning_episode(game, tables, [uniform_policy(), None], stream(0), 1.0, QParams())
    assert tables[1].values and all(k.startswith("1|") for k in tables[1].values)


def test_terminal_update_moves_toward_the_episode_reward():
    game = make_matrix_game(RPS)
    table = QTable()
    q_learning_episode(game, {0: table}, [None, rock()], stream(2), 0.0, QParams(step_size=0.5))
    # greedy on an all-zero row plays rock and draws
    assert table.values["0"] == [0.0, 0.0, 0.0]
    against_rock = [0.0, 1.0, -1.0]
    for seed in range(20):
        before = list(table.values["0"])
        q_learning_episode(game, {0: table}, [None, rock()], stream(seed, "explore"), 1.0, QParams(step_size=0.5))
        after = table.values["0"]
        changed = [a for a in range(3) if after[a] != before[a]]
        assert len(changed) <= 1
        for a in changed:
            assert after[a] == pytest.approx(before[a] + 0.5 * (against_rock[a] - before[a]))


def test_training_is_deterministic_per_seed():
    game = make_kuhn()
    a = train_independent_learners(game, 300, QParams(), stream(9))
    b = train_independent_learners(game, 300, QParams(), stream(9))
    assert [r.qtable.dumps() for r in a] == [r.qtable.dumps() for r in b]
    c = train_independent_learners(game, 300, QParams(), stream(10))
    assert [r.qtable.dumps() for r in a] != [r.qtable.dumps() for r in c]


def test_training_argument_checks():
    game = make_kuhn()
    with pytest.raises(ValueError):
        train_q_oracle(game, 0, [None, uniform_policy()], 0)
    with pytest.raises(ValueError):
        train_q_oracle(game, 0, [None], 10)
    with pytest.raises(ValueError):
        train_independent_learners(game, 0)
