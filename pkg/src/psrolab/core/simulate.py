"""Monte Carlo play-outs and exact expectations of joint policies."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from psrolab.core.game import CHANCE, Game, sample_chance, sample_index
from psrolab.core.rng import stream
from psrolab.core.tree import DEFAULT_NODE_BUDGET, GameTree


@dataclass
class Transition:
    key: str
    action: int
    legal: tuple[int, ...]
    reward: float
    next_key: str | None  # None when the episode ended first


@dataclass
class Episode:
    returns: np.ndarray
    transitions: list[list[Transition]] = field(default_factory=list)


def simulate_episode(game: Game, joint, rng: np.random.Generator) -> Episode:
    """Play one episode.

    Mixture entries of ``joint`` are resolved to a single policy at the
    start of the episode. Transitions are player-specific: each one spans
    from a player's decision to that same player's next decision (or the
    end), accumulating the rewards it received in between.
    """
    n = game.num_players
    if len(joint) != n:
        raise ValueError(f"{game.name} needs {n} policies, got {len(joint)}")
    policies = [p.sample(rng) for p in joint]
    state = game.new_initial_state()
    returns = np.zeros(n)
    chains: list[list[Transition]] = [[] for _ in range(n)]
    pending: list[Transition | None] = [None] * n
    while not state.is_terminal():
        player = state.current_player()
        if player == CHANCE:
            action = sample_chance(state, rng)
        else:
            key = state.information_state_key(player)
            legal = state.legal_actions()
            probs = policies[player].probs(key, len(legal))
            action = legal[sample_index(probs, rng)]
            if pending[player] is not None:
                pending[player].next_key = key
                chains[player].append(pending[player])
            pending[player] = Transition(key, action, tuple(legal), 0.0, None)
        state = state.child(action)
        r = state.rewards()
        returns += r
        for p in range(n):
            if pending[p] is not None:
                pending[p].reward += r[p]
    for p in range(n):
        if pending[p] is not None:
            chains[p].append(pending[p])
    return Episode(returns, chains)


@dataclass
class PayoffEstimate:
    """Running sums for a payoff-table cell; merges exactly."""

    total: np.ndarray
    total_sq: np.ndarray
    count: int

    @property
    def mean(self) -> np.ndarray:
        return self.total / self.count

    @property
    def stderr(self) -> np.ndarray:
        if self.count < 2:
            return np.full_like(self.total, np.inf)
        var = (self.total_sq - self.total**2 / self.count) / (self.count - 1)
        return np.sqrt(np.maximum(var, 0.0) / self.count)

    def merge(self, other: "PayoffEstimate") -> "PayoffEstimate":
        return PayoffEstimate(self.total + other.total, self.total_sq + other.total_sq, self.count + other.count)


def estimate_payoff_entry(
    game: Game, joint, episodes: int, seed: int, first_episode: int = 0
) -> PayoffEstimate:
    """Sample means over ``episodes`` play-outs.

    Episode ``t`` draws from its own stream ``(seed, "episode", t)``, so
    estimates over adjacent episode ranges merge into exactly the estimate
    over their union.
    """
    if episodes < 1:
        raise ValueError("episodes must be >= 1")
    total = np.zeros(game.num_players)
    total_sq = np.zeros(game.num_players)
    for t in range(first_episode, first_episode + episodes):
        ret = simulate_episode(game, joint, stream(seed, "episode", t)).returns
        total += ret
        total_sq += ret * ret
    return PayoffEstimate(total, total_sq, episodes)


_TREE_CACHE: dict[int, GameTree] = {}


def game_tree(game: Game | GameTree, max_nodes: int = DEFAULT_NODE_BUDGET) -> GameTree:
    """Enumerate ``game`` once and reuse the tree for later exact passes."""
    if isinstance(game, GameTree):
        return game
    tree = _TREE_CACHE.get(id(game))
    if tree is None or tree.game is not game:
        tree = GameTree(game, max_nodes)
        _TREE_CACHE[id(game)] = tree
    return tree


def expected_returns_exact(game: Game | GameTree, joint, max_nodes: int = DEFAULT_NODE_BUDGET) -> np.ndarray:
    """Exact expected returns by full enumeration.

    Policies whose default rule is ERROR must cover every reachable
    information state.
    """
    tree = game_tree(game, max_nodes)
    return tree.expected_returns(tree.profile(list(joint), strict=True))
