"""Vanilla counterfactual regret minimization over an enumerated game tree.

All players update on every pass from the same current strategy
(simultaneous updates); no sampling, no abstraction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from psrolab.core.game import Game
from psrolab.core.policy import BehaviorPolicy
from psrolab.core.tree import DEFAULT_NODE_BUDGET, GameTree


@dataclass
class CfrState:
    tree: GameTree
    regrets: np.ndarray = None
    strategy_sum: np.ndarray = None
    iteration: int = 0
    history: list = field(default_factory=list)

    def __post_init__(self):
        if self.regrets is None:
            self.regrets = np.zeros(self.tree.num_slots)
        if self.strategy_sum is None:
            self.strategy_sum = np.zeros(self.tree.num_slots)


def new_cfr_state(game: Game | GameTree, max_nodes: int = DEFAULT_NODE_BUDGET) -> CfrState:
    tree = game if isinstance(game, GameTree) else GameTree(game, max_nodes)
    return CfrState(tree)


def current_strategy(state: CfrState) -> np.ndarray:
    """Regret matching at every information state."""
    return state.tree.normalize(np.maximum(state.regrets, 0.0))


def cfr_iterate(state: CfrState) -> CfrState:
    tree = state.tree
    n = tree.num_players
    sigma = current_strategy(state)
    p = tree.edge_probs(sigma)
    reach = tree.reach(sigma, p)
    vals = tree.values(sigma, p)

    # counterfactual reach of each node for each player: everyone else's
    # contribution, chance included
    cf_reach = np.empty((tree.num_nodes, n))
    for j in range(n):
        cf_reach[:, j] = np.delete(reach, j, axis=1).prod(axis=1)

    dec = tree.is_decision_edge
    parent = tree.edge_parent[dec]
    child = tree.edge_child[dec]
    actor = tree.edge_actor[dec]
    gain = vals[child, actor] - vals[parent, actor]
    state.regrets += np.bincount(
        tree.edge_slot[dec], weights=cf_reach[parent, actor] * gain, minlength=tree.num_slots
    )
    own_reach = reach[tree.infoset_rep, tree.infoset_player]
    state.strategy_sum += own_reach[tree.slot_infoset] * sigma
    state.iteration += 1
    return state


def average_profile(state: CfrState) -> np.ndarray:
    return state.tree.normalize(state.strategy_sum)


def cfr_average_strategy(state: CfrState) -> list[BehaviorPolicy]:
    if state.iteration < 1:
        raise ValueError("run at least one CFR iteration first")
    avg = average_profile(state)
    return [state.tree.to_policy(avg, i, f"cfr{state.iteration}_p{i}") for i in range(state.tree.num_players)]


def solve(game: Game | GameTree, iterations: int, record_every: int = 0) -> CfrState:
    """Run ``iterations`` CFR passes; optionally log NashConv every ``record_every``."""
    from psrolab.eval.nashconv import nashconv_profile

    state = new_cfr_state(game)
    for t in range(iterations):
        cfr_iterate(state)
        if record_every and (state.iteration % record_every == 0 or t == iterations - 1):
            total, _ = nashconv_profile(state.tree, average_profile(state))
            state.history.append((state.iteration, total))
    return state


def make_cfr_bots(game: Game | GameTree, iterations: int) -> tuple[list[BehaviorPolicy], list[BehaviorPolicy]]:
    """CFR average strategies and their purified counterparts ("cfrN" / "cfrNpure")."""
    from psrolab.oracles.purify import purify

    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    state = new_cfr_state(game)
    for _ in range(iterations):
        cfr_iterate(state)
    bots = cfr_average_strategy(state)
    pure = [purify(b) for b in bots]
    for i, b in enumerate(pure):
        b.name = f"cfr{iterations}pure_p{i}"
    return bots, pure
