import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import brute_force_best_response_value, random_behavior
from psrolab.core.policy import BehaviorPolicy, MixturePolicy, uniform_policy
from psrolab.core.simulate import expected_returns_exact
from psrolab.eval.curves import format_metrics, mauc, read_metrics
from psrolab.eval.jpc import JpcMatrix, cell_policies, jpc_matrix, jpc_stats, jpc_summary_json, proportional_loss
from psrolab.eval.mixed import as_behavior, mixed_to_behavior
from psrolab.eval.nashconv import nashconv
from psrolab.eval.tournament import evaluate_vs_fixed
from psrolab.games.kuhn import make_kuhn
from psrolab.games.leduc import make_leduc
from psrolab.games.matrix import COORDINATION, RPS, make_matrix_game


def kuhn_equilibrium(alpha):
    """The standard one-parameter family of Kuhn equilibria (bet probabilities)."""
    bet = {
        "0|J|": alpha, "0|Q|": 0.0, "0|K|": 3 * alpha,
        "0|J|pb": 0.0, "0|Q|pb": alpha + 1 / 3, "0|K|pb": 1.0,
        "1|J|p": 1 / 3, "1|Q|p": 0.0, "1|K|p": 1.0,
        "1|J|b": 0.0, "1|Q|b": 1 / 3, "1|K|b": 1.0,
    }
    return [
        BehaviorPolicy({k: np.array([1 - b, b]) for k, b in bet.items() if k[0] == str(p)}, name=f"eq{p}")
        for p in range(2)
    ]


def pure(player, action, n=2):
    return BehaviorPolicy({str(player): np.eye(n)[action]}, name=f"p{player}a{action}")


# -- JPC ----------------------------------------------------------------------------


def summed(d_vals, o_val, d):
    m = np.full((d, d), o_val, dtype=float)
    np.fill_diagonal(m, d_vals)
    return JpcMatrix(m, np.ones((d, d), bool), 100)


def test_proportional_loss_formula():
    assert round(proportional_loss(30.44, 20.03), 3) == 0.342
    assert round(proportional_loss(20.15, 5.71), 3) == 0.717
    assert round(proportional_loss(28.20, 26.63), 3) == 0.056
    assert proportional_loss(2.0, 3.0) == pytest.approx(-0.5)
    with pytest.raises(ValueError):
        proportional_loss(0.0, 1.0)


def test_jpc_stats_on_a_summed_matrix():
    stats = jpc_stats(summed(4.0, 1.0, 5))
    assert (stats.diag_mean, stats.offdiag_mean) == (4.0, 1.0)
    assert stats.r_minus == pytest.approx(0.75)
    assert jpc_stats(summed(3.0, 3.0, 3)).r_minus == 0.0
    doc = json.loads(jpc_summary_json(stats, algorithm="x"))
    assert doc["r_minus"] == pytest.approx(0.75) and doc["algorithm"] == "x"


@given(st.integers(2, 6), st.integers(0, 1000))
def test_loss_times_diagonal_is_the_gap(d, seed):
    m = np.random.default_rng(seed).uniform(0.1, 10, size=(d, d))
    stats = jpc_stats(JpcMatrix(m, np.ones((d, d), bool), 1))
    assert stats.r_minus * stats.diag_mean == pytest.approx(stats.diag_mean - stats.offdiag_mean)
    assert stats.diag_mean == pytest.approx(np.trace(m) / d)
    assert stats.offdiag_mean == pytest.approx((m.sum() - np.trace(m)) / (d * d - d))


def test_jpc_stats_needs_diagonal_and_off_diagonal_cells():
    computed = np.eye(3, dtype=bool)
    with pytest.raises(ValueError):
        jpc_stats(JpcMatrix(np.ones((3, 3)), computed, 1))
    computed = np.ones((3, 3), bool)
    computed[1, 1] = False
    with pytest.raises(ValueError):
        jpc_stats(JpcMatrix(np.ones((3, 3)), computed, 1))


def test_cell_policies_follow_the_instance_index():
    instances = [[f"d{d}p{p}" for p in range(4)] for d in range(5)]
    assert cell_policies(instances, (0, 3, 2, 2)) == ["d0p0", "d3p1", "d2p2", "d2p3"]
    with pytest.raises(ValueError):
        cell_policies(instances, (0, 1))


def test_jpc_matrix_seats_row_instance_first():
    game = make_matrix_game(COORDINATION)
    instances = [[pure(0, 0), pure(1, 0)], [pure(0, 1), pure(1, 1)]]
    m = jpc_matrix(game, instances, episodes=3)
    assert m.values.tolist() == [[4.0, 0.0], [0.0, 2.0]]
    stats = jpc_stats(m)
    assert (stats.diag_mean, stats.offdiag_mean, stats.r_minus) == (3.0, 0.0, 1.0)
    assert m.to_csv().splitlines() == [
        "instance_p0,instance_p1,return_sum", "0,0,4.0", "0,1,0.0", "1,0,0.0", "1,1,2.0",
    ]


def test_general_form_keeps_per_player_tensors():
    game = make_matrix_game(RPS)
    instances = [[pure(0, a, 3), pure(1, b, 3)] for a, b in [(0, 0), (1, 2), (2, 2)]]
    m = jpc_matrix(game, instances, episodes=1, form="general")
    assert m.values.shape == (2, 3, 3)
    # row instance 1 plays paper, column instance 0 plays rock
    assert m.values[0][1][0] == 1.0 and m.values[1][1][0] == -1.0
    assert m.to_csv().splitlines()[0] == "instance_p0,instance_p1,return_p0,return_p1"


def test_sampled_off_diagonals():
    game = make_matrix_game(COORDINATION)
    instances = [[uniform_policy(), uniform_policy()] for _ in range(4)]
    m = jpc_matrix(game, instances, episodes=2, seed=1, offdiag_samples=5)
    assert int(m.computed.sum()) == 4 + 5
    assert np.all(np.diag(m.computed))
    jpc_stats(m)


def test_jpc_matrix_is_deterministic_per_seed():
    game = make_kuhn()
    instances = [[uniform_policy(), uniform_policy()] for _ in range(3)]
    a = jpc_matrix(game, instances, episodes=20, seed=4)
    b = jpc_matrix(game, instances, episodes=20, seed=4)
    assert np.array_equal(a.values, b.values)
    with pytest.raises(ValueError):
        jpc_matrix(game, instances[:1])
    with pytest.raises(ValueError):
        jpc_matrix(game, instances, episodes=0)


# -- mixed strategies and NashConv ----------------------------------------------------


@pytest.mark.parametrize("maker,count", [(make_kuhn, 10), (make_leduc, 2)])
def test_converted_mixture_is_payoff_equivalent(maker, count):
    game = maker()
    rng = np.random.default_rng(7)
    for _ in range(count):
        player = int(rng.integers(2))
        members = [BehaviorPolicy(random_behavior(game, player, rng, deterministic=bool(rng.integers(2))))
                   for _ in range(int(rng.integers(1, 5)))]
        sigma = rng.dirichlet(np.ones(len(members)))
        converted = mixed_to_behavior(members, sigma, game, player)
        opp = BehaviorPolicy(random_behavior(game, 1 - player, rng))

        def seat(pol):
            return [pol, opp] if player == 0 else [opp, pol]

        direct = sum(w * expected_returns_exact(game, seat(m)) for w, m in zip(sigma, members))
        assert np.allclose(expected_returns_exact(game, seat(converted)), direct, atol=1e-9)


def test_as_behavior_flattens_nested_mixtures():
    game = make_kuhn()
    rng = np.random.default_rng(8)
    a, b, c = (BehaviorPolicy(random_behavior(game, 0, rng)) for _ in range(3))
    nested = MixturePolicy([MixturePolicy([a, b], np.array([0.5, 0.5])), c], np.array([0.4, 0.6]))
    flat = mixed_to_behavior([a, b, c], np.array([0.2, 0.2, 0.6]), game, 0)
    got = as_behavior(nested, game, 0)
    for key, probs in flat.table.items():
        assert np.allclose(got.table[key], probs)
    assert as_behavior(a, game, 0) is a


@pytest.mark.parametrize("alpha", [0.0, 0.2, 1 / 3])
def test_kuhn_equilibria_have_zero_nashconv(alpha):
    total, gains = nashconv(make_kuhn(), kuhn_equilibrium(alpha))
    assert total == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(gains, 0.0, atol=1e-12)


def test_nashconv_matches_brute_force():
    game = make_kuhn()
    rng = np.random.default_rng(9)
    joint = [BehaviorPolicy(random_behavior(game, p, rng)) for p in range(2)]
    values = expected_returns_exact(game, joint)
    expected = sum(brute_force_best_response_value(game, p, joint) - values[p] for p in range(2))
    assert nashconv(game, joint)[0] == pytest.approx(expected, abs=1e-12)


def test_nashconv_accepts_mixtures():
    game = make_kuhn()
    eq = kuhn_equilibrium(0.1)
    mixed = [MixturePolicy([eq[p], uniform_policy()], np.array([1.0, 0.0])) for p in range(2)]
    assert nashconv(game, mixed)[0] == pytest.approx(0.0, abs=1e-12)


# -- tournaments and curves -------------------------------------------------------------


def test_evaluate_vs_fixed_plays_every_seat():
    game = make_matrix_game(RPS)
    paper = [pure(0, 1, 3), pure(1, 1, 3)]
    rock = [pure(0, 0, 3), pure(1, 0, 3)]
    res = evaluate_vs_fixed(game, paper, rock, episodes=5)
    assert res.mean == 1.0 and res.per_seat == [1.0, 1.0] and res.stderr == 0.0
    with pytest.raises(ValueError):
        evaluate_vs_fixed(game, paper[:1], rock, 5)
    with pytest.raises(ValueError):
        evaluate_vs_fixed(game, paper, rock, 0)


def test_mauc_of_simple_curves():
    assert mauc([2.0] * 10) == 2.0
    assert mauc(np.arange(100.0), window=11) == pytest.approx(94.0)
    assert mauc([5.0]) == 5.0
    with pytest.raises(ValueError):
        mauc([1.0], window=0)
    with pytest.raises(ValueError):
        mauc([])


def test_metrics_csv_round_trip(tmp_path):
    rows = [(0, "a", 1.5, ""), (1, "a", 0.1, 0.01), (1, "b", -2.0, "")]
    path = tmp_path / "metrics.csv"
    path.write_text(format_metrics(rows))
    assert read_metrics(path) == {"a": [(0.0, 1.5), (1.0, 0.1)], "b": [(1.0, -2.0)]}
    (tmp_path / "bad.csv").write_text("x,y\n")
    with pytest.raises(ValueError):
        read_metrics(tmp_path / "bad.csv")
