"""Tabular Q-learning as an approximate best-response oracle.

Updates run online over player-specific transitions: a player's transition
stretches from one of its decisions to its next one, collecting every reward
it received in between, so co-players' moves and chance are part of the
environment.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from psrolab.core.game import CHANCE, Game, sample_chance, sample_index
from psrolab.core.policy import BehaviorPolicy, DefaultRule


@dataclass(frozen=True)
class QParams:
    step_size: float = 0.1
    epsilon_start: float = 1.0
    epsilon_end: float = 0.1
    discount: float = 1.0
    # Monte Carlo episodes used to report the trained policy's value
    eval_episodes: int = 200

    def epsilon(self, episode: int, total: int) -> float:
        if total <= 1:
            return self.epsilon_end
        frac = min(1.0, episode / (total - 1))
        return self.epsilon_start + (self.epsilon_end - self.epsilon_start) * frac


class QTable:
    def __init__(self):
        self.values: dict[str, list[float]] = {}

    def row(self, key: str, num_legal: int) -> list[float]:
        row = self.values.get(key)
        if row is None:
            row = [0.0] * num_legal
            self.values[key] = row
        return row

    def greedy_policy(self, name: str = "") -> BehaviorPolicy:
        table = {}
        for key, row in self.values.items():
            vec = np.zeros(len(row))
            vec[row.index(max(row))] = 1.0
            table[key] = vec
        return BehaviorPolicy(table, DefaultRule.UNIFORM_RANDOM, name)

    def to_json(self) -> dict:
        return {"format": "qtable", "version": 1, "values": {k: self.values[k] for k in sorted(self.values)}}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


@dataclass
class OracleReport:
    policy: BehaviorPolicy
    episodes: int
    mean_training_return: float
    final_value: float
    qtable: QTable | None = field(default=None, repr=False)

    def to_json(self) -> dict:
        return {
            "policy_name": self.policy.name,
            "episodes": self.episodes,
            "mean_training_return": self.mean_training_return,
            "final_value": self.final_value,
        }


def q_learning_episode(
    game: Game,
    learners: dict[int, QTable],
    policies: list,
    rng: np.random.Generator,
    epsilon: float,
    params: QParams,
) -> np.ndarray:
    """Play one episode; players in ``learners`` act epsilon-greedily and learn.

    ``policies`` supplies already-sampled behavior policies for the other
    seats. Returns the episode's per-player returns.
    """
    n = game.num_players
    alpha, gamma = params.step_size, params.discount
    state = game.new_initial_state()
    returns = np.zeros(n)
    # per learner: (row, action index, reward accumulated since the decision)
    pending: dict[int, list] = {}
    while not state.is_terminal():
        player = state.current_player()
        if player == CHANCE:
            action = sample_chance(state, rng)
        else:
            legal = state.legal_actions()
            key = state.information_state_key(player)
            table = learners.get(player)
            if table is None:
                action = legal[sample_index(policies[player].probs(key, len(legal)), rng)]
            else:
                row = table.row(key, len(legal))
                prev = pending.get(player)
                if prev is not None:
                    prow, pa, pr = prev
                    prow[pa] += alpha * (pr + gamma * max(row) - prow[pa])
                if rng.random() < epsilon:
                    idx = int(rng.integers(len(legal)))
                else:
                    idx = row.index(max(row))
                pending[player] = [row, idx, 0.0]
                action = legal[idx]
        state = state.child(action)
        r = state.rewards()
        returns += r
        for p, entry in pending.items():
            entry[2] += r[p]
    for prow, pa, pr in pending.values():
        prow[pa] += alpha * (pr - prow[pa])
    return returns


def evaluate_policy_mc(game: Game, joint: list, player: int, episodes: int, rng) -> float:
    from psrolab.core.simulate import simulate_episode

    if episodes < 1:
        return float("nan")
    total = 0.0
    for _ in range(episodes):
        total += simulate_episode(game, joint, rng).returns[player]
    return total / episodes


def train_q_oracle(
    game: Game,
    player: int,
    opponents: list,
    episodes: int,
    params: QParams | None = None,
    rng: np.random.Generator | None = None,
    table: QTable | None = None,
    name: str = "",
) -> OracleReport:
    """Train ``player`` against ``opponents`` (one entry per seat; own seat ignored).

    A fixed opponent policy is drawn from each opponent mixture at the start
    of every episode.
    """
    if episodes < 1:
        raise ValueError("episodes must be >= 1")
    if len(opponents) != game.num_players:
        raise ValueError(f"need {game.num_players} entries, got {len(opponents)}")
    params = params or QParams()
    rng = rng if rng is not None else np.random.default_rng(0)
    table = table if table is not None else QTable()
    total = 0.0
    for t in range(episodes):
        sampled = [None if p == player else opp.sample(rng) for p, opp in enumerate(opponents)]
        ret = q_learning_episode(game, {player: table}, sampled, rng, params.epsilon(t, episodes), params)
        total += ret[player]
    policy = table.greedy_policy(name or f"q_p{player}")
    joint = [policy if p == player else opp for p, opp in enumerate(opponents)]
    value = evaluate_policy_mc(game, joint, player, params.eval_episodes, rng)
    return OracleReport(policy, episodes, total / episodes, value, table)


def train_independent_learners(
    game: Game,
    episodes: int,
    params: QParams | None = None,
    rng: np.random.Generator | None = None,
    tables: list[QTable] | None = None,
) -> list[OracleReport]:
    """All players learn at once, each treating the others as environment."""
    if episodes < 1:
        raise ValueError("episodes must be >= 1")
    params = params or QParams()
    rng = rng if rng is not None else np.random.default_rng(0)
    n = game.num_players
    tables = tables if tables is not None else [QTable() for _ in range(n)]
    totals = np.zeros(n)
    for t in range(episodes):
        totals += q_learning_episode(
            game, dict(enumerate(tables)), [None] * n, rng, params.epsilon(t, episodes), params
        )
    policies = [tables[p].greedy_policy(f"inrl_p{p}") for p in range(n)]
    reports = []
    for p in range(n):
        value = evaluate_policy_mc(game, policies, p, params.eval_episodes, rng)
        reports.append(OracleReport(policies[p], episodes, totals[p] / episodes, value, tables[p]))
    return reports


class GreedyView:
    """Live greedy policy over a Q-table that is still being trained."""

    def __init__(self, table: QTable, name: str = ""):
        self.table = table
        self.name = name

    def probs(self, key: str, num_legal: int, strict: bool = False) -> np.ndarray:
        row = self.table.values.get(key)
        if row is None:
            return np.full(num_legal, 1.0 / num_legal)
        out = np.zeros(num_legal)
        out[row.index(max(row))] = 1.0
        return out

    def sample(self, rng) -> "GreedyView":
        return self
